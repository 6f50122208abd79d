"""Command-line front end.

Exit codes: 0 output graph, 2 the program failed, 3 step limit reached,
1 usage, I/O or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .bench import bench, load_program, plot_rows, write_csv
from .generators import GRAPH_CLASSES, GeneratorError, generate
from .interpreter import DEFAULT_MAX_STEPS, CompiledProgram, ProgramError, trace_lines
from .programs import UnknownProgramError
from .rules import RuleError, classify_fast
from .textio import ParseError, parse_host, print_host

EXIT_OK, EXIT_ERROR, EXIT_FAIL, EXIT_LIMIT = 0, 1, 2, 3


def _sizes(text: str) -> List[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}")
    if not sizes or any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return sizes


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_run(args) -> int:
    program = CompiledProgram.from_source(load_program(args.program))
    with open(args.input) as f:
        graph = parse_host(f.read())
    events = [] if args.trace else None
    outcome, stats = program.run(graph, args.max_steps, events.append if args.trace else None)
    if args.trace:
        for line in trace_lines(events):
            print(line, file=sys.stderr)
        print(f"steps {stats.steps} probes {stats.probes}", file=sys.stderr)
    if outcome.kind == "graph":
        _write(print_host(outcome.graph), args.output)
        return EXIT_OK
    if outcome.kind == "fail":
        print("fail")
        return EXIT_FAIL
    print(f"step limit of {args.max_steps} reached", file=sys.stderr)
    return EXIT_LIMIT


def cmd_gen(args) -> int:
    _write(print_host(generate(args.cls, args.n, args.seed)), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = bench(args.program, args.cls, args.sizes, args.reps, args.seed, args.max_steps,
                 program=load_program(args.program))
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            write_csv(rows, f)
    else:
        write_csv(rows, sys.stdout)
    if args.plot:
        plot_rows(rows, args.plot)
    return EXIT_OK


def cmd_check_fast(args) -> int:
    ps = load_program(args.program)
    for name, rule in ps.rules.items():
        rep = classify_fast(rule)
        status = "fast" if rep.fast else "slow"
        why = "" if rep.fast else ": " + "; ".join(rep.reasons)
        print(f"{name} {status}{why}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gp2lin", description="Run rooted graph programs.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a program on a host graph")
    r.add_argument("program", help="bundled program name or program file")
    r.add_argument("input", help="host graph file")
    r.add_argument("-o", "--output", help="write the output graph here")
    r.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    r.add_argument("--trace", action="store_true", help="print rule attempts to stderr")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen", help="generate a benchmark graph")
    g.add_argument("--class", dest="cls", required=True, choices=GRAPH_CLASSES)
    g.add_argument("-n", type=int, required=True, help="number of nodes")
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="time a program over a size series")
    b.add_argument("program")
    b.add_argument("--class", dest="cls", required=True, choices=GRAPH_CLASSES)
    b.add_argument("--sizes", type=_sizes, required=True, help="ascending, comma separated")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--seed", type=int)
    b.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    b.add_argument("--csv", help="write CSV here instead of stdout")
    b.add_argument("--plot", help="also save a PNG of median times (needs matplotlib)")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("check-fast", help="classify each rule as fast or slow")
    c.add_argument("program")
    c.set_defaults(func=cmd_check_fast)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2, which here means the program failed
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (OSError, ParseError, ProgramError, RuleError, GeneratorError,
            UnknownProgramError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
