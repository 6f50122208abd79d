"""Search plans and their compilation.

``build_plan`` orders the left-hand side of a rule into a sequence of
probes: an anchor (root list for rooted rules, node list otherwise),
then edge extensions from already bound nodes.  Node checks carry degree
hints: a node the rule deletes must have exactly the degree its
left-hand side gives it, which settles the dangling condition before
any edge is explored; a preserved node needs at least that degree.
Condition conjuncts are tested as soon as every node they mention is
bound.

``compile_rule`` turns a plan into two Python functions, generated as
source text: ``match(g)`` returns a tuple of host cells or ``None`` and
``apply(g, m)`` performs the rewrite.  Every list step the matcher takes
(the initial ``first`` and each ``next``) adds one to ``g.probes``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .host import ANY, HostGraph, Node
from .rules import (And, Condition, Const, Degree, EdgePred, Match, Not, Rule,
                    Var, condition_tags, conjuncts)


class PlanError(Exception):
    pass


# ------------------------------------------------------------------ probes


@dataclass(frozen=True)
class PickRoot:
    node: int


@dataclass(frozen=True)
class PickNode:
    node: int


@dataclass(frozen=True)
class ExtendOut:
    """Walk the out-list of bound ``edge.src``; binds the edge and its target."""
    edge: int


@dataclass(frozen=True)
class ExtendIn:
    edge: int


@dataclass(frozen=True)
class ExtendEither:
    """Undirected edge from bound node ``origin``: out-list, then in-list."""
    edge: int
    origin: int


@dataclass(frozen=True)
class Connect:
    """Edge whose endpoints are both bound (loops included)."""
    edge: int


@dataclass(frozen=True)
class ConnectEither:
    edge: int


@dataclass(frozen=True)
class VerifyNode:
    node: int
    mark: int
    root: bool
    label: object
    indeg: Tuple[str, int]
    outdeg: Tuple[str, int]
    degree: Tuple[str, int]


@dataclass(frozen=True)
class VerifyEdge:
    edge: int
    mark: int
    label: object


@dataclass(frozen=True)
class CheckCondition:
    condition: Condition


BIND_PROBES = (PickRoot, PickNode, ExtendOut, ExtendIn, ExtendEither, Connect, ConnectEither)


@dataclass(frozen=True)
class SearchPlan:
    rule: Rule
    probes: Tuple[object, ...]
    node_ids: Tuple[str, ...]
    edge_ids: Tuple[str, ...]

    @property
    def anchored_at_root(self) -> bool:
        return isinstance(self.probes[0], PickRoot)

    def describe(self) -> List[str]:
        out = []
        for p in self.probes:
            name = type(p).__name__
            if isinstance(p, (PickRoot, PickNode, VerifyNode)):
                out.append(f"{name}({self.node_ids[p.node]})")
            elif isinstance(p, CheckCondition):
                out.append(f"{name}")
            else:
                out.append(f"{name}({self.edge_ids[p.edge]})")
        return out


# ---------------------------------------------------------------- planning


def _degree_hints(rule: Rule):
    lhs = rule.lhs
    din: Dict[str, int] = {n.id: 0 for n in lhs.nodes}
    dout = dict(din)
    dund = dict(din)
    for e in lhs.edges:
        if e.bidirectional:
            dund[e.src] += 1
            dund[e.tgt] += 1
        else:
            dout[e.src] += 1
            din[e.tgt] += 1
    deleted = set(rule.deleted_nodes)
    hints = {}
    for nid in din:
        i, o, u = din[nid], dout[nid], dund[nid]
        if nid in deleted and u == 0:
            hints[nid] = (("=", i), ("=", o), (">=", 0))
        elif nid in deleted:
            hints[nid] = ((">=", i), (">=", o), ("=", i + o + u))
        else:
            hints[nid] = ((">=", i), (">=", o), (">=", i + o + u))
    return hints


def build_plan(rule: Rule) -> SearchPlan:
    lhs = rule.lhs
    if not lhs.nodes:
        raise PlanError(f"rule {rule.name}: empty left-hand side cannot be planned")
    nids = lhs.node_ids
    eids = lhs.edge_ids
    nidx = {n: i for i, n in enumerate(nids)}
    hints = _degree_hints(rule)
    pending = list(enumerate(conjuncts(rule.condition)))
    probes: List[object] = []
    bound = set()
    done_edges = set()

    def attach_conditions():
        for item in list(pending):
            if all(nidx[t] in bound for t in condition_tags(item[1])):
                probes.append(CheckCondition(item[1]))
                pending.remove(item)

    def verify(i):
        n = lhs.nodes[i]
        din, dout, dtot = hints[n.id]
        probes.append(VerifyNode(i, n.mark, n.root, n.label, din, dout, dtot))
        bound.add(i)
        attach_conditions()

    attach_conditions()
    while len(bound) < len(nids):
        rooted = [i for i, n in enumerate(lhs.nodes) if n.root and i not in bound]
        if rooted:
            probes.append(PickRoot(rooted[0]))
            verify(rooted[0])
        else:
            i = next(i for i in range(len(nids)) if i not in bound)
            probes.append(PickNode(i))
            verify(i)
        while True:
            # cheapest first: edges between bound nodes, then out-, then in-extensions
            step = None
            for j, e in enumerate(lhs.edges):
                if j in done_edges:
                    continue
                s, t = nidx[e.src], nidx[e.tgt]
                if s in bound and t in bound:
                    cand = (0, j)
                elif s in bound or (t in bound and e.bidirectional):
                    cand = (1, j)
                elif t in bound:
                    cand = (2, j)
                else:
                    continue
                if step is None or cand < step:
                    step = cand
            if step is None:
                break
            kind, j = step
            e = lhs.edges[j]
            s, t = nidx[e.src], nidx[e.tgt]
            done_edges.add(j)
            if kind == 0:
                probes.append(ConnectEither(j) if e.bidirectional else Connect(j))
                probes.append(VerifyEdge(j, e.mark, e.label))
                continue
            if e.bidirectional:
                origin, other = (s, t) if s in bound else (t, s)
                probes.append(ExtendEither(j, origin))
            elif kind == 1:
                other = t
                probes.append(ExtendOut(j))
            else:
                other = s
                probes.append(ExtendIn(j))
            probes.append(VerifyEdge(j, e.mark, e.label))
            verify(other)
    for j in range(len(eids)):
        if j not in done_edges:  # pragma: no cover - every edge touches a bound node
            raise PlanError(f"rule {rule.name}: edge {eids[j]} left unplanned")
    for _, c in pending:
        probes.append(CheckCondition(c))
    return SearchPlan(rule, tuple(probes), nids, eids)


# ------------------------------------------------------------- compilation


class _Src:
    def __init__(self) -> None:
        self.lines: List[str] = []
        self.depth = 1

    def emit(self, text: str) -> None:
        self.lines.append("    " * self.depth + text)


def _mark_test(var: str, mark: int) -> Optional[str]:
    if mark == ANY:
        return f"{var}.mark != 0"
    return f"{var}.mark == {mark}"


def _deg_test(expr: str, hint: Tuple[str, int]) -> Optional[str]:
    op, k = hint
    if op == ">=" and k == 0:
        return None
    if op == "=":
        return f"{expr} == {k}"
    return f"{expr} >= {k}"


_PY_OPS = {"=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _edge_exists(g: HostGraph, s: Node, t: Node) -> bool:
    g.probes += 1
    e = s.ohead
    while e is not None:
        if e.tgt is t:
            return True
        e = e.onext
        g.probes += 1
    return False


@dataclass
class CompiledRule:
    """A rule with its plan and generated match/apply functions."""
    rule: Rule
    plan: SearchPlan
    match: Callable
    apply: Callable
    source: str = field(repr=False, default="")

    @property
    def name(self) -> str:
        return self.rule.name


def compile_rule(rule: Rule, plan: Optional[SearchPlan] = None) -> CompiledRule:
    plan = plan or build_plan(rule)
    lhs = rule.lhs
    nidx = {n: i for i, n in enumerate(plan.node_ids)}
    consts: Dict[str, object] = {}
    var_src: Dict[str, str] = {}   # variable -> expression reading its binding

    def const(label) -> str:
        name = f"C{len(consts)}"
        consts[name] = label
        return name

    def label_test(item: str, expr) -> Optional[str]:
        if isinstance(expr, Const):
            return f"{item}.label == {const(expr.label)}" if expr.label else f"not {item}.label"
        first = var_src.get(expr.name)
        if first is None:
            var_src[expr.name] = f"{item}.label"
            return None
        return f"{item}.label == {first}"

    def cond_expr(c: Condition) -> str:
        if isinstance(c, Degree):
            attr = "indeg" if c.kind == "indeg" else "outdeg"
            return f"n{nidx[c.node]}.{attr} {_PY_OPS[c.op]} {c.value}"
        if isinstance(c, EdgePred):
            return f"_edge_exists(g, n{nidx[c.src]}, n{nidx[c.tgt]})"
        if isinstance(c, Not):
            return f"not ({cond_expr(c.arg)})"
        assert isinstance(c, And)
        return f"({cond_expr(c.left)}) and ({cond_expr(c.right)})"

    src = _Src()
    lines = src.lines
    lines.append("def match(g):")
    src.emit("p = 0")
    flagged: List[str] = []
    # (loop depth, advance statement, flag depth, cells flagged at that depth)
    closers: List[Tuple[int, str, int, str]] = []
    probes = list(plan.probes)
    k = 0
    first = True
    while k < len(probes):
        pr = probes[k]
        if isinstance(pr, CheckCondition):
            src.emit(f"if {cond_expr(pr.condition)}:")
            src.depth += 1
            k += 1
            continue
        # gather the verify probes that follow this binding probe
        k += 1
        nver = ever = None
        while k < len(probes) and isinstance(probes[k], (VerifyNode, VerifyEdge)):
            if isinstance(probes[k], VerifyNode):
                nver = probes[k]
            else:
                ever = probes[k]
            k += 1

        def node_tests(v: VerifyNode, var: str, via_root: bool, fresh: bool) -> List[str]:
            tests = []
            if not fresh:
                tests.append(f"not {var}.matched")
            if not via_root:
                tests.append(f"{var}.root" if v.root else f"not {var}.root")
            tests.append(_mark_test(var, v.mark))
            for expr, hint in ((f"{var}.indeg", v.indeg), (f"{var}.outdeg", v.outdeg),
                               (f"{var}.indeg + {var}.outdeg", v.degree)):
                t = _deg_test(expr, hint)
                if t:
                    tests.append(t)
            t = label_test(var, v.label)
            if t:
                tests.append(t)
            return tests

        def edge_tests(v: VerifyEdge, var: str) -> List[str]:
            tests = [f"not {var}.matched", _mark_test(var, v.mark)]
            t = label_test(var, v.label)
            if t:
                tests.append(t)
            return tests

        if isinstance(pr, (PickRoot, PickNode)):
            i = pr.node
            var = f"n{i}"
            head, nxt = ("g._rhead", "rnext") if isinstance(pr, PickRoot) else ("g._nhead", "next")
            src.emit("p += 1")
            src.emit(f"{var} = {head}")
            src.emit(f"while {var} is not None:")
            src.depth += 1
            tests = node_tests(nver, var, isinstance(pr, PickRoot), first)
            loop_depth = src.depth
            src.emit(f"if {' and '.join(tests)}:")
            src.depth += 1
            src.emit(f"{var}.matched = True")
            flagged.append(var)
            # the loop advance is emitted when this level closes
            closers.append((loop_depth, f"{var} = {var}.{nxt}", src.depth, var))
        elif isinstance(pr, (ExtendOut, ExtendIn)):
            j = pr.edge
            e = lhs.edges[j]
            evar = f"e{j}"
            if isinstance(pr, ExtendOut):
                frm, to = nidx[e.src], nidx[e.tgt]
                head, nxt, end = "ohead", "onext", "tgt"
            else:
                frm, to = nidx[e.tgt], nidx[e.src]
                head, nxt, end = "ihead", "inext", "src"
            nvar = f"n{to}"
            src.emit("p += 1")
            src.emit(f"{evar} = n{frm}.{head}")
            src.emit(f"while {evar} is not None:")
            src.depth += 1
            loop_depth = src.depth
            src.emit(f"if {' and '.join(edge_tests(ever, evar))}:")
            src.depth += 1
            src.emit(f"{nvar} = {evar}.{end}")
            src.emit(f"if {' and '.join(node_tests(nver, nvar, False, False))}:")
            src.depth += 1
            src.emit(f"{evar}.matched = True")
            src.emit(f"{nvar}.matched = True")
            flagged.extend([evar, nvar])
            closers.append((loop_depth, f"{evar} = {evar}.{nxt}", src.depth, evar + "," + nvar))
        elif isinstance(pr, ExtendEither):
            j = pr.edge
            e = lhs.edges[j]
            evar = f"e{j}"
            frm = pr.origin
            to = nidx[e.tgt] if nidx[e.src] == frm else nidx[e.src]
            nvar = f"n{to}"
            dvar = f"d{j}"
            src.emit("p += 1")
            src.emit(f"{dvar} = 0")
            src.emit(f"{evar} = n{frm}.ohead")
            src.emit("while True:")
            src.depth += 1
            loop_depth = src.depth
            src.emit(f"if {evar} is None:")
            src.emit(f"    if {dvar}:")
            src.emit("        break")
            src.emit(f"    {dvar} = 1")
            src.emit(f"    {evar} = n{frm}.ihead")
            src.emit("    p += 1")
            src.emit("    continue")
            src.emit(f"if {' and '.join(edge_tests(ever, evar))}:")
            src.depth += 1
            src.emit(f"{nvar} = {evar}.src if {dvar} else {evar}.tgt")
            src.emit(f"if {' and '.join(node_tests(nver, nvar, False, False))}:")
            src.depth += 1
            src.emit(f"{evar}.matched = True")
            src.emit(f"{nvar}.matched = True")
            flagged.extend([evar, nvar])
            closers.append((loop_depth, f"{evar} = {evar}.inext if {dvar} else {evar}.onext",
                            src.depth, evar + "," + nvar))
        elif isinstance(pr, (Connect, ConnectEither)):
            j = pr.edge
            e = lhs.edges[j]
            evar = f"e{j}"
            dvar = f"d{j}"
            s, t = f"n{nidx[e.src]}", f"n{nidx[e.tgt]}"
            src.emit("p += 1")
            if isinstance(pr, Connect):
                # walk whichever of the two lists is shorter
                src.emit(f"if {s}.outdeg <= {t}.indeg:")
                src.emit(f"    {dvar} = 0")
                src.emit(f"    {evar} = {s}.ohead")
                src.emit("else:")
                src.emit(f"    {dvar} = 1")
                src.emit(f"    {evar} = {t}.ihead")
                src.emit(f"while {evar} is not None:")
                src.depth += 1
                loop_depth = src.depth
                endtest = f"({evar}.src is {s} if {dvar} else {evar}.tgt is {t})"
                advance = f"{evar} = {evar}.inext if {dvar} else {evar}.onext"
            else:
                src.emit(f"{dvar} = 0")
                src.emit(f"{evar} = {s}.ohead")
                src.emit("while True:")
                src.depth += 1
                loop_depth = src.depth
                src.emit(f"if {evar} is None:")
                src.emit(f"    if {dvar}:")
                src.emit("        break")
                src.emit(f"    {dvar} = 1")
                src.emit(f"    {evar} = {s}.ihead")
                src.emit("    p += 1")
                src.emit("    continue")
                endtest = f"({evar}.src is {t} if {dvar} else {evar}.tgt is {t})"
                advance = f"{evar} = {evar}.inext if {dvar} else {evar}.onext"
            src.emit(f"if {endtest} and {' and '.join(edge_tests(ever, evar))}:")
            src.depth += 1
            src.emit(f"{evar}.matched = True")
            flagged.append(evar)
            closers.append((loop_depth, advance, src.depth, evar))
        else:  # pragma: no cover
            raise PlanError(f"unexpected probe {pr!r}")
        first = False

    # success: clear flags, report probes, hand back the cells
    for var in flagged:
        src.emit(f"{var}.matched = False")
    src.emit("g.probes += p")
    ncells = ", ".join(f"n{i}" for i in range(len(plan.node_ids)))
    ecells = ", ".join(f"e{j}" for j in range(len(plan.edge_ids)))
    src.emit(f"return ({ncells}{', ' if ncells and ecells else ''}{ecells},)")
    # unwind the nested loops, clearing flags on backtrack
    while closers:
        depth, advance, flag_depth, cells = closers.pop()
        src.depth = flag_depth
        for c in cells.split(","):
            src.emit(f"{c}.matched = False")
        src.depth = depth
        src.emit(advance)
        src.emit("p += 1")
    src.depth = 1
    src.emit("g.probes += p")
    src.emit("return None")

    # ---------------------------------------------------------------- apply
    rhs = rule.rhs
    iface = set(rule.interface)
    kept_edges = set(rule.preserved_edges)
    eidx = {e: j for j, e in enumerate(plan.edge_ids)}
    lines.append("")
    lines.append("def apply(g, m):")
    src.depth = 1
    cells = [f"n{i}" for i in range(len(plan.node_ids))] + [f"e{j}" for j in range(len(plan.edge_ids))]
    src.emit(f"{', '.join(cells)}, = m")

    def value(expr) -> str:
        if isinstance(expr, Const):
            return const(expr.label)
        return f"v_{expr.name}"

    for name, read in var_src.items():
        if any(isinstance(x.label, Var) and x.label.name == name for x in rhs.nodes + rhs.edges):
            src.emit(f"v_{name} = {read}")
    for j, e in enumerate(lhs.edges):
        if e.id not in kept_edges:
            src.emit(f"g._del_edge(e{j})")
    for i, n in enumerate(lhs.nodes):
        if n.id not in iface:
            src.emit(f"g._del_node(n{i})")
    rvar: Dict[str, str] = {}
    for n in rhs.nodes:
        if n.id in iface:
            i = nidx[n.id]
            old = lhs.nodes[i]
            var = f"n{i}"
            if n.label != old.label:
                src.emit(f"g._set_nlabel({var}, {value(n.label)})")
            if n.mark != ANY and n.mark != old.mark:
                src.emit(f"g._set_nmark({var}, {n.mark})")
            if n.root != old.root:
                src.emit(f"g._set_root({var}, {n.root})")
        else:
            var = f"r_{len(rvar)}"
            src.emit(f"{var} = g._new_node({value(n.label)}, {n.mark}, {n.root})")
        rvar[n.id] = var
    for e in rhs.edges:
        if e.id in kept_edges:
            old = lhs.edge(e.id)
            var = f"e{eidx[e.id]}"
            if e.label != old.label:
                src.emit(f"g._set_elabel({var}, {value(e.label)})")
            if e.mark != ANY and e.mark != old.mark:
                src.emit(f"g._set_emark({var}, {e.mark})")
        else:
            src.emit(f"g._new_edge({rvar[e.src]}, {rvar[e.tgt]}, {value(e.label)}, {e.mark})")
    src.emit("return None")

    text = "\n".join(lines) + "\n"
    ns: Dict[str, object] = dict(consts)
    ns["_edge_exists"] = _edge_exists
    code = compile(text, f"<rule {rule.name}>", "exec")
    exec(code, ns)
    return CompiledRule(rule, plan, ns["match"], ns["apply"], text)


# --------------------------------------------------------------- public ops


@dataclass
class ProbeBudgetReport:
    rule: str
    calls: int = 0
    probes: int = 0
    max_probes: int = 0


def to_match(cr: CompiledRule, cells: tuple) -> Match:
    """Convert the raw tuple returned by a compiled matcher."""
    plan = cr.plan
    nn = len(plan.node_ids)
    nodes = {plan.node_ids[i]: cells[i].id for i in range(nn)}
    edges = {plan.edge_ids[j]: cells[nn + j].id for j in range(len(plan.edge_ids))}
    bindings: Dict[str, object] = {}
    marks: Dict[str, int] = {}
    lhs = cr.rule.lhs
    for i, n in enumerate(lhs.nodes):
        if isinstance(n.label, Var):
            bindings.setdefault(n.label.name, cells[i].label)
        if n.mark == ANY:
            marks[n.id] = cells[i].mark
    for j, e in enumerate(lhs.edges):
        if isinstance(e.label, Var):
            bindings.setdefault(e.label.name, cells[nn + j].label)
        if e.mark == ANY:
            marks[e.id] = cells[nn + j].mark
    return Match(nodes, edges, bindings, marks)


def find_match(graph: HostGraph, plan, stats: Optional[ProbeBudgetReport] = None) -> Optional[Match]:
    """First match of ``plan`` (a SearchPlan or CompiledRule) in search order."""
    cr = plan if isinstance(plan, CompiledRule) else compile_rule(plan.rule, plan)
    before = graph.probes
    cells = cr.match(graph)
    spent = graph.probes - before
    if stats is not None:
        stats.calls += 1
        stats.probes += spent
        stats.max_probes = max(stats.max_probes, spent)
    return None if cells is None else to_match(cr, cells)


def apply_match(graph: HostGraph, cr: CompiledRule, m: Match) -> None:
    """Apply a compiled rule at a match given by host ids."""
    plan = cr.plan
    cells = tuple(graph.node(m.nodes[n]) for n in plan.node_ids) + tuple(
        graph.edge(m.edges[e]) for e in plan.edge_ids)
    cr.apply(graph, cells)


def count_roots(graph: HostGraph) -> int:
    return graph.num_roots


__all__ = [
    "BIND_PROBES", "CheckCondition", "CompiledRule", "Connect", "ConnectEither",
    "ExtendEither", "ExtendIn", "ExtendOut", "PickNode", "PickRoot", "PlanError",
    "ProbeBudgetReport", "SearchPlan", "VerifyEdge", "VerifyNode", "apply_match",
    "build_plan", "compile_rule", "count_roots", "find_match", "to_match",
]
