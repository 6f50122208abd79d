"""Deterministic execution of commands over a host graph.

Nondeterminism is resolved leftmost: the first rule of a set that has a
match, at the first match in search order, and the left arm of ``or``.
Conditions of ``if`` run under a checkpoint that is always rolled back;
those of ``try`` keep their changes on success.  A loop body whose
failure may leave partial changes behind runs under a checkpoint so the
pre-iteration graph can be restored.

A step is one rule attempt (every member tried in a rule set counts),
or one ``break`` or ``fail``.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from .commands import Break, Call, Command, Fail, If, Loop, Or, Seq, Skip, Try, unseq
from .host import HostGraph
from .matcher import CompiledRule, compile_rule
from .rules import Rule

OK = 0
FAIL = 1
BREAK = 2

DEFAULT_MAX_STEPS = 10 ** 9


class ProgramError(Exception):
    pass


class MissingMainError(ProgramError):
    pass


class MissingDeclarationError(ProgramError):
    pass


class RecursiveProcedureError(ProgramError):
    pass


class BreakPlacementError(ProgramError):
    pass


# ------------------------------------------------------------- outcomes


@dataclass
class Outcome:
    kind: str                       # "graph", "fail" or "limit"
    graph: Optional[HostGraph] = None

    @property
    def ok(self) -> bool:
        return self.kind == "graph"


@dataclass
class RuleTally:
    calls: int = 0
    successes: int = 0
    probes: int = 0
    max_probes: int = 0


@dataclass
class RunStats:
    steps: int = 0
    failed_calls: int = 0
    probes: int = 0
    wall: float = 0.0
    tallies: Dict[str, RuleTally] = field(default_factory=dict)

    def tally(self, name: str) -> RuleTally:
        t = self.tallies.get(name)
        if t is None:
            t = self.tallies[name] = RuleTally()
        return t


@dataclass(frozen=True)
class TraceEvent:
    step: int
    name: str
    matched: bool
    probes: int


class _StepLimit(Exception):
    pass


# -------------------------------------------------------------- inlining


def inline_procedures(program) -> Command:
    """Substitute procedure bodies into ``Main``.

    ``program`` is anything with ``procedures`` and ``rules`` mappings,
    such as a parsed ``ProgramSource``.
    """
    procs: Mapping[str, Command] = program.procedures
    rules = program.rules
    if "Main" not in procs:
        raise MissingMainError("program has no Main declaration")
    for name in procs:
        if name in rules:
            raise ProgramError(f"{name} is declared both as a rule and a procedure")
    done: Dict[str, Command] = {}

    def expand(c: Command, stack: Tuple[str, ...]) -> Command:
        if isinstance(c, Call):
            if len(c.rules) == 1 and c.rules[0] in procs:
                name = c.rules[0]
                if name in stack:
                    cycle = " -> ".join(stack[stack.index(name):] + (name,))
                    raise RecursiveProcedureError(f"recursive procedure: {cycle}")
                if name not in done:
                    done[name] = expand(procs[name], stack + (name,))
                return done[name]
            for r in c.rules:
                if r in procs:
                    raise ProgramError(f"procedure {r} cannot appear inside a rule set")
                if r not in rules:
                    raise MissingDeclarationError(f"undeclared rule or procedure {r}")
            return c
        if isinstance(c, Seq):
            return Seq(expand(c.first, stack), expand(c.second, stack))
        if isinstance(c, Or):
            return Or(expand(c.left, stack), expand(c.right, stack))
        if isinstance(c, If):
            return If(expand(c.cond, stack), expand(c.then, stack), expand(c.else_, stack))
        if isinstance(c, Try):
            return Try(expand(c.cond, stack), expand(c.then, stack), expand(c.else_, stack))
        if isinstance(c, Loop):
            return Loop(expand(c.body, stack))
        return c

    return expand(procs["Main"], ("Main",))


def check_command(c: Command, in_loop: bool = False) -> None:
    """Reject ``break`` outside a loop, including a loop outside a condition."""
    if isinstance(c, Break):
        if not in_loop:
            raise BreakPlacementError("break outside of a loop body")
    elif isinstance(c, Loop):
        check_command(c.body, True)
    elif isinstance(c, (If, Try)):
        check_command(c.cond, False)
        check_command(c.then, in_loop)
        check_command(c.else_, in_loop)
    elif isinstance(c, Seq):
        check_command(c.first, in_loop)
        check_command(c.second, in_loop)
    elif isinstance(c, Or):
        check_command(c.left, in_loop)
        check_command(c.right, in_loop)


# ------------------------------------------------- static effect analysis


def never_fails(c: Command) -> bool:
    if isinstance(c, (Skip, Loop, Break)):
        return True
    if isinstance(c, Seq):
        return never_fails(c.first) and never_fails(c.second)
    if isinstance(c, (If, Try)):
        return never_fails(c.then) and never_fails(c.else_)
    if isinstance(c, Or):
        return never_fails(c.left)
    return False


def is_pure(c: Command) -> bool:
    """True if ``c`` never changes the graph."""
    if isinstance(c, (Skip, Fail, Break)):
        return True
    if isinstance(c, Seq):
        return is_pure(c.first) and is_pure(c.second)
    if isinstance(c, If):
        return is_pure(c.then) and is_pure(c.else_)
    if isinstance(c, Try):
        return is_pure(c.cond) and is_pure(c.then) and is_pure(c.else_)
    if isinstance(c, Or):
        return is_pure(c.left)
    if isinstance(c, Loop):
        return is_pure(c.body)
    return False


def is_atomic(c: Command) -> bool:
    """True if a failing run of ``c`` is guaranteed to leave the graph untouched."""
    if never_fails(c) or isinstance(c, (Call, Fail)):
        return True
    if isinstance(c, Seq):
        items = unseq(c)
        for k, x in enumerate(items):
            if never_fails(x):
                continue
            if not is_atomic(x) or not all(is_pure(y) for y in items[:k]):
                return False
        return True
    if isinstance(c, If):
        return is_atomic(c.then) and is_atomic(c.else_)
    if isinstance(c, Try):
        then_ok = never_fails(c.then) or (is_pure(c.cond) and is_atomic(c.then))
        return then_ok and is_atomic(c.else_)
    if isinstance(c, Or):
        return is_atomic(c.left)
    return False


# ---------------------------------------------------------------- compiler


@functools.lru_cache(maxsize=None)
def compiled(rule: Rule) -> CompiledRule:
    return compile_rule(rule)


class _Ctx:
    def __init__(self, rules: Mapping[str, CompiledRule], stats: RunStats, limit: int,
                 trace: Optional[Callable[[TraceEvent], None]]) -> None:
        self.rules = rules
        self.stats = stats
        self.limit = limit
        self.trace = trace


def _build(c: Command, ctx: _Ctx) -> Callable[[HostGraph], int]:
    st = ctx.stats
    limit = ctx.limit
    trace = ctx.trace

    if isinstance(c, Call):
        return _build_call(c, ctx, apply=True)

    if isinstance(c, Skip):
        return lambda g: OK

    if isinstance(c, (Fail, Break)):
        code = FAIL if isinstance(c, Fail) else BREAK
        name = "fail" if code == FAIL else "break"

        def run_marker(g):
            st.steps += 1
            if st.steps > limit:
                raise _StepLimit
            if trace is not None:
                trace(TraceEvent(st.steps, name, True, 0))
            return code
        return run_marker

    if isinstance(c, Seq):
        parts = [_build(x, ctx) for x in unseq(c)]
        if len(parts) == 2:
            a, b = parts

            def run_seq2(g):
                r = a(g)
                if r:
                    return r
                return b(g)
            return run_seq2

        def run_seq(g):
            for p in parts:
                r = p(g)
                if r:
                    return r
            return OK
        return run_seq

    if isinstance(c, Or):
        return _build(c.left, ctx)

    if isinstance(c, Loop):
        body = _build(c.body, ctx)
        guarded = not is_atomic(c.body)

        def run_loop(g):
            while True:
                before = st.steps
                if guarded:
                    tok = g.checkpoint()
                    r = body(g)
                    if r == FAIL:
                        g.rollback(tok)
                        return OK
                    g.commit(tok)
                else:
                    r = body(g)
                    if r == FAIL:
                        return OK
                if r == BREAK:
                    return OK
                if st.steps == before:
                    # no step means no change: the loop would repeat forever
                    raise _StepLimit
        return run_loop

    if isinstance(c, If):
        then = _build(c.then, ctx)
        other = _build(c.else_, ctx)
        if isinstance(c.cond, Call):
            test = _build_call(c.cond, ctx, apply=False)

            def run_if_call(g):
                if test(g) == OK:
                    return then(g)
                return other(g)
            return run_if_call
        cond = _build(c.cond, ctx)
        pure = is_pure(c.cond)

        def run_if(g):
            if pure:
                r = cond(g)
            else:
                tok = g.checkpoint()
                r = cond(g)
                g.rollback(tok)
            return then(g) if r == OK else other(g)
        return run_if

    if isinstance(c, Try):
        then = _build(c.then, ctx)
        other = _build(c.else_, ctx)
        cond = _build(c.cond, ctx)
        if is_atomic(c.cond):
            def run_try_atomic(g):
                if cond(g) == OK:
                    return then(g)
                return other(g)
            return run_try_atomic

        def run_try(g):
            tok = g.checkpoint()
            if cond(g) == OK:
                g.commit(tok)
                return then(g)
            g.rollback(tok)
            return other(g)
        return run_try

    raise ProgramError(f"unknown command {c!r}")


def _build_call(c: Call, ctx: _Ctx, apply: bool) -> Callable[[HostGraph], int]:
    st = ctx.stats
    limit = ctx.limit
    trace = ctx.trace
    members = []
    for name in c.rules:
        cr = ctx.rules.get(name)
        if cr is None:
            raise MissingDeclarationError(f"undeclared rule {name}")
        members.append((cr.match, cr.apply if apply else None, st.tally(name), name))

    if len(members) == 1 and trace is None:
        match, app, tally, _ = members[0]

        def run_one(g):
            st.steps += 1
            if st.steps > limit:
                raise _StepLimit
            before = g.probes
            m = match(g)
            spent = g.probes - before
            tally.calls += 1
            tally.probes += spent
            if spent > tally.max_probes:
                tally.max_probes = spent
            if m is None:
                st.failed_calls += 1
                return FAIL
            tally.successes += 1
            if app is not None:
                app(g, m)
            return OK
        return run_one

    def run_set(g):
        for match, app, tally, name in members:
            st.steps += 1
            if st.steps > limit:
                raise _StepLimit
            before = g.probes
            m = match(g)
            spent = g.probes - before
            tally.calls += 1
            tally.probes += spent
            if spent > tally.max_probes:
                tally.max_probes = spent
            if trace is not None:
                trace(TraceEvent(st.steps, name, m is not None, spent))
            if m is not None:
                tally.successes += 1
                if app is not None:
                    app(g, m)
                return OK
        st.failed_calls += 1
        return FAIL
    return run_set


# ---------------------------------------------------------------- running


def _compile_rules(rules: Mapping[str, object]) -> Dict[str, CompiledRule]:
    out = {}
    for name, r in rules.items():
        out[name] = r if isinstance(r, CompiledRule) else compiled(r)
    return out


def execute(command: Command, graph: HostGraph, rules: Mapping[str, object],
            max_steps: int = DEFAULT_MAX_STEPS,
            trace: Optional[Callable[[TraceEvent], None]] = None) -> Tuple[Outcome, RunStats]:
    """Run ``command`` on ``graph`` in place.

    ``rules`` maps names to ``Rule`` or ``CompiledRule`` objects.  On a
    ``graph`` outcome the returned graph is ``graph`` itself; on ``fail``
    or ``limit`` the graph's contents are unspecified.
    """
    check_command(command)
    stats = RunStats()
    ctx = _Ctx(_compile_rules(rules), stats, max_steps, trace)
    run = _build(command, ctx)
    p0 = graph.probes
    depth0 = graph.open_checkpoints
    t0 = time.perf_counter()
    try:
        r = run(graph)
        outcome = Outcome("graph", graph) if r == OK else Outcome("fail")
    except _StepLimit:
        # drop checkpoints opened by the aborted run
        while graph.open_checkpoints > depth0:
            graph.commit(graph.open_checkpoints)
        outcome = Outcome("limit")
    stats.wall = time.perf_counter() - t0
    stats.probes = graph.probes - p0
    return outcome, stats


@dataclass
class CompiledProgram:
    """A parsed program with procedures inlined and rules compiled."""
    main: Command
    rules: Dict[str, CompiledRule]

    @classmethod
    def from_source(cls, program) -> "CompiledProgram":
        main = inline_procedures(program)
        check_command(main)
        return cls(main, _compile_rules(program.rules))

    def run(self, graph: HostGraph, max_steps: int = DEFAULT_MAX_STEPS,
            trace: Optional[Callable[[TraceEvent], None]] = None) -> Tuple[Outcome, RunStats]:
        return execute(self.main, graph, self.rules, max_steps, trace)


def trace_lines(events: List[TraceEvent]) -> List[str]:
    return [f"{e.step} {e.name} {'ok' if e.matched else 'fail'} {e.probes}" for e in events]
