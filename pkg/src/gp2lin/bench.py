"""Scaling benchmarks.

Wall time covers parsing the input text, running the program and
printing the result, mirroring how a compiled program would be timed
end to end.  Graph generation and the program's own compilation are
excluded.
"""

from __future__ import annotations

import csv
import gc
import statistics
import time
from dataclasses import astuple, dataclass
from typing import IO, Iterable, List, Optional, Sequence

from .generators import generate
from .interpreter import DEFAULT_MAX_STEPS, CompiledProgram
from .programs import PROGRAM_NAMES, bundled_program
from .textio import ProgramSource, parse_host, parse_program, print_host

CSV_HEADER = ("program", "class", "size", "rep", "ms", "steps", "probes", "outcome")


@dataclass
class BenchRow:
    program: str
    cls: str
    size: int
    rep: str
    ms: float
    steps: int
    probes: int
    outcome: str


def load_program(name_or_path: str) -> ProgramSource:
    """A bundled program name or a path to a program file."""
    if name_or_path in PROGRAM_NAMES:
        return bundled_program(name_or_path)
    with open(name_or_path) as f:
        return parse_program(f.read())


def time_run(program: CompiledProgram, text: str,
             max_steps: int = DEFAULT_MAX_STEPS):
    """Parse, run and print once; returns (ms, outcome, stats)."""
    gc_was = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter()
        g = parse_host(text)
        outcome, stats = program.run(g, max_steps)
        if outcome.ok:
            print_host(outcome.graph)
        ms = (time.perf_counter() - t0) * 1000.0
    finally:
        if gc_was:
            gc.enable()
    return ms, outcome, stats


def bench(program_name: str, cls: str, sizes: Sequence[int], reps: int = 5,
          seed: Optional[int] = None, max_steps: int = DEFAULT_MAX_STEPS,
          program: Optional[ProgramSource] = None) -> List[BenchRow]:
    """One row per size and repetition, plus a median row per size."""
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    cp = CompiledProgram.from_source(program or load_program(program_name))
    rows: List[BenchRow] = []
    for n in sizes:
        g = generate(cls, n, seed)
        size = g.size
        text = print_host(g)
        del g
        times = []
        last = None
        for rep in range(reps):
            ms, outcome, stats = time_run(cp, text, max_steps)
            times.append(ms)
            last = BenchRow(program_name, cls, size, str(rep), round(ms, 3), stats.steps,
                            stats.probes, outcome.kind)
            rows.append(last)
            gc.collect()
        if last is not None:
            rows.append(BenchRow(program_name, cls, size, "median",
                                 round(statistics.median(times), 3),
                                 last.steps, last.probes, last.outcome))
    return rows


def write_csv(rows: Iterable[BenchRow], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(astuple(r))


def plot_rows(rows: Sequence[BenchRow], path: str) -> None:
    """Median time against size, one line per program and class."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    series = {}
    for r in rows:
        if r.rep == "median":
            series.setdefault((r.program, r.cls), []).append((r.size, r.ms))
    for (prog, cls), pts in series.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=f"{prog} / {cls}")
    ax.set_xlabel("Size of input graph")
    ax.set_ylabel("Execution time (ms)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
