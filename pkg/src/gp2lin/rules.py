"""Conditional rules and their reference (uncompiled) semantics.

A rule is a pair of rule graphs plus an optional application condition.
Nodes with the same identifier on both sides form the interface and are
preserved in place; an edge identifier shared by both sides likewise
preserves that edge (it may be relabelled or re-marked).  Everything
else on the left is deleted and everything else on the right created.

The functions at the bottom (``check_dangling``, ``eval_condition``,
``apply_at``) are straightforward reference implementations.  The
interpreter runs compiled versions produced by :mod:`gp2lin.matcher`;
tests keep the two in agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .host import ANY, EDGE_MARKS, MARK_NAMES, NODE_MARKS, HostGraph, Label


class RuleError(Exception):
    """A rule violates a well-formedness constraint."""


# ----------------------------------------------------------------- labels


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    label: Label

    def __str__(self) -> str:
        from .textio import format_label
        return format_label(self.label)


LabelExpr = Union[Var, Const]

EMPTY_EXPR = Const(())


# ------------------------------------------------------------- rule graphs


@dataclass(frozen=True)
class RuleNode:
    id: str
    label: LabelExpr = EMPTY_EXPR
    mark: int = 0
    root: bool = False


@dataclass(frozen=True)
class RuleEdge:
    id: str
    src: str
    tgt: str
    label: LabelExpr = EMPTY_EXPR
    mark: int = 0
    bidirectional: bool = False


@dataclass(frozen=True)
class RuleGraph:
    nodes: Tuple[RuleNode, ...] = ()
    edges: Tuple[RuleEdge, ...] = ()

    def node(self, nid: str) -> RuleNode:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def edge(self, eid: str) -> RuleEdge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    @property
    def node_ids(self) -> Tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        return tuple(e.id for e in self.edges)


# -------------------------------------------------------------- conditions

_OPS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Degree:
    """``indeg(tag) op k`` or ``outdeg(tag) op k``."""
    kind: str
    node: str
    op: str
    value: int

    def __post_init__(self) -> None:
        if self.kind not in ("indeg", "outdeg"):
            raise RuleError(f"unknown degree predicate {self.kind!r}")
        if self.op not in _OPS:
            raise RuleError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class EdgePred:
    src: str
    tgt: str


@dataclass(frozen=True)
class Not:
    arg: "Condition"


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"


Condition = Union[Degree, EdgePred, Not, And]


def condition_tags(c: Condition) -> Tuple[str, ...]:
    if isinstance(c, Degree):
        return (c.node,)
    if isinstance(c, EdgePred):
        return (c.src, c.tgt)
    if isinstance(c, Not):
        return condition_tags(c.arg)
    return condition_tags(c.left) + condition_tags(c.right)


def conjuncts(c: Optional[Condition]) -> List[Condition]:
    if c is None:
        return []
    if isinstance(c, And):
        return conjuncts(c.left) + conjuncts(c.right)
    return [c]


def has_edge_pred(c: Optional[Condition]) -> bool:
    if c is None:
        return False
    if isinstance(c, EdgePred):
        return True
    if isinstance(c, Not):
        return has_edge_pred(c.arg)
    if isinstance(c, And):
        return has_edge_pred(c.left) or has_edge_pred(c.right)
    return False


# ------------------------------------------------------------------- rules


@dataclass(frozen=True)
class Rule:
    name: str
    params: Tuple[str, ...]
    lhs: RuleGraph
    rhs: RuleGraph
    condition: Optional[Condition] = None
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        validate_rule(self)

    @property
    def interface(self) -> Tuple[str, ...]:
        rids = set(self.rhs.node_ids)
        return tuple(i for i in self.lhs.node_ids if i in rids)

    @property
    def preserved_edges(self) -> Tuple[str, ...]:
        rids = set(self.rhs.edge_ids)
        return tuple(i for i in self.lhs.edge_ids if i in rids)

    @property
    def deleted_nodes(self) -> Tuple[str, ...]:
        keep = set(self.interface)
        return tuple(i for i in self.lhs.node_ids if i not in keep)

    @property
    def deleted_edges(self) -> Tuple[str, ...]:
        keep = set(self.preserved_edges)
        return tuple(i for i in self.lhs.edge_ids if i not in keep)

    @property
    def created_nodes(self) -> Tuple[str, ...]:
        keep = set(self.interface)
        return tuple(i for i in self.rhs.node_ids if i not in keep)

    @property
    def created_edges(self) -> Tuple[str, ...]:
        keep = set(self.preserved_edges)
        return tuple(i for i in self.rhs.edge_ids if i not in keep)


def _label_vars(g: RuleGraph) -> List[str]:
    out = []
    for item in g.nodes + g.edges:
        if isinstance(item.label, Var):
            out.append(item.label.name)
    return out


def validate_rule(r: Rule) -> None:
    where = f"rule {r.name}"
    if len(set(r.params)) != len(r.params):
        raise RuleError(f"{where}: duplicate parameter")
    params = set(r.params)
    for side, g in (("lhs", r.lhs), ("rhs", r.rhs)):
        ids = g.node_ids
        if len(set(ids)) != len(ids):
            raise RuleError(f"{where}: duplicate node id in {side}")
        eids = g.edge_ids
        if len(set(eids)) != len(eids):
            raise RuleError(f"{where}: duplicate edge id in {side}")
        known = set(ids)
        for n in g.nodes:
            if n.mark not in NODE_MARKS and n.mark != ANY:
                raise RuleError(f"{where}: node {n.id} has edge-only mark {MARK_NAMES[n.mark]}")
        for e in g.edges:
            if e.src not in known or e.tgt not in known:
                raise RuleError(f"{where}: edge {e.id} in {side} references an unknown node")
            if e.mark not in EDGE_MARKS and e.mark != ANY:
                raise RuleError(f"{where}: edge {e.id} has node-only mark {MARK_NAMES[e.mark]}")
        for v in _label_vars(g):
            if v not in params:
                raise RuleError(f"{where}: undeclared variable {v!r}")
    lvars = set(_label_vars(r.lhs))
    for v in _label_vars(r.rhs):
        if v not in lvars:
            raise RuleError(f"{where}: variable {v!r} occurs in rhs but not in lhs")
    iface = set(r.interface)
    for n in r.rhs.nodes:
        if n.mark == ANY and (n.id not in iface or r.lhs.node(n.id).mark != ANY):
            raise RuleError(f"{where}: rhs node {n.id} is 'any' without an 'any' lhs partner")
    lhs_edges = {e.id: e for e in r.lhs.edges}
    for e in r.rhs.edges:
        old = lhs_edges.get(e.id)
        if old is None:
            if e.mark == ANY:
                raise RuleError(f"{where}: created edge {e.id} cannot be marked 'any'")
            if e.bidirectional:
                raise RuleError(f"{where}: created edge {e.id} cannot be bidirectional")
            continue
        if (old.src, old.tgt) != (e.src, e.tgt) or old.src not in iface or old.tgt not in iface:
            raise RuleError(f"{where}: preserved edge {e.id} must keep its interface endpoints")
        if old.bidirectional != e.bidirectional:
            raise RuleError(f"{where}: preserved edge {e.id} changes direction kind")
        if e.mark == ANY and old.mark != ANY:
            raise RuleError(f"{where}: rhs edge {e.id} is 'any' without an 'any' lhs partner")
    lids = set(r.lhs.node_ids)
    for tag in condition_tags(r.condition) if r.condition is not None else ():
        if tag not in lids:
            raise RuleError(f"{where}: condition refers to unknown node {tag}")


# ------------------------------------------------------------- matches


@dataclass
class Match:
    """Injective assignment of a rule's left-hand side into a host graph."""
    nodes: Dict[str, int]
    edges: Dict[str, int]
    bindings: Dict[str, Label] = field(default_factory=dict)
    marks: Dict[str, int] = field(default_factory=dict)


def check_dangling(graph: HostGraph, rule: Rule, match: Match) -> bool:
    """True iff no node about to be deleted has an edge outside the match."""
    image = set(match.edges.values())
    for tag in rule.deleted_nodes:
        v = match.nodes[tag]
        for e in graph.out_edges(v):
            if e not in image:
                return False
        for e in graph.in_edges(v):
            if e not in image:
                return False
    return True


def _has_edge(graph: HostGraph, s: int, t: int) -> bool:
    return any(graph.target(e) == t for e in graph.out_edges(s))


def eval_condition(graph: HostGraph, cond: Optional[Condition], match: Match) -> bool:
    if cond is None:
        return True
    if isinstance(cond, Degree):
        v = match.nodes[cond.node]
        d = graph.indegree(v) if cond.kind == "indeg" else graph.outdegree(v)
        return _OPS[cond.op](d, cond.value)
    if isinstance(cond, EdgePred):
        return _has_edge(graph, match.nodes[cond.src], match.nodes[cond.tgt])
    if isinstance(cond, Not):
        return not eval_condition(graph, cond.arg, match)
    return (eval_condition(graph, cond.left, match)
            and eval_condition(graph, cond.right, match))


def instantiate(expr: LabelExpr, bindings: Dict[str, Label]) -> Label:
    if isinstance(expr, Var):
        return bindings[expr.name]
    return expr.label


def apply_at(graph: HostGraph, rule: Rule, match: Match) -> Dict[str, int]:
    """Apply ``rule`` at ``match``; returns the host ids of the rhs nodes.

    Callers must have checked the dangling condition and the rule's
    application condition.
    """
    b = match.bindings
    for eid in rule.deleted_edges:
        graph.delete_edge(match.edges[eid])
    for nid in rule.deleted_nodes:
        graph.delete_node(match.nodes[nid])
    out: Dict[str, int] = {}
    for n in rule.rhs.nodes:
        if n.id in match.nodes and n.id not in rule.deleted_nodes:
            v = match.nodes[n.id]
            old = rule.lhs.node(n.id)
            if n.label != old.label:
                graph.relabel_node(v, instantiate(n.label, b))
            if n.mark != ANY and n.mark != old.mark:
                graph.set_node_mark(v, n.mark)
            if n.root != old.root:
                graph.set_root(v, n.root)
        else:
            v = graph.add_node(instantiate(n.label, b), n.mark, n.root)
        out[n.id] = v
    for e in rule.rhs.edges:
        if e.id in match.edges and e.id in rule.preserved_edges:
            h = match.edges[e.id]
            old = rule.lhs.edge(e.id)
            if e.label != old.label:
                graph.relabel_edge(h, instantiate(e.label, b))
            if e.mark != ANY and e.mark != old.mark:
                graph.set_edge_mark(h, e.mark)
        else:
            graph.add_edge(out[e.src], out[e.tgt], instantiate(e.label, b), e.mark)
    return out


# ------------------------------------------------------------ fast rules


@dataclass(frozen=True)
class FastReport:
    rule: str
    fast: bool
    reasons: Tuple[str, ...]


def classify_fast(rule: Rule) -> FastReport:
    reasons = []
    lhs = rule.lhs
    roots = [n.id for n in lhs.nodes if n.root]
    adj: Dict[str, set] = {n.id: set() for n in lhs.nodes}
    for e in lhs.edges:
        adj[e.src].add(e.tgt)
        adj[e.tgt].add(e.src)
    seen = set(roots)
    todo = list(roots)
    while todo:
        for w in adj[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    if not roots:
        reasons.append("lhs has no root node")
    elif len(seen) < len(adj):
        missing = ", ".join(sorted(set(adj) - seen))
        reasons.append(f"lhs nodes not reachable from a root: {missing}")
    for side, g in (("lhs", lhs), ("rhs", rule.rhs)):
        vs = _label_vars(g)
        dup = sorted({v for v in vs if vs.count(v) > 1})
        if dup:
            reasons.append(f"repeated variables in {side}: {', '.join(dup)}")
    if has_edge_pred(rule.condition):
        reasons.append("condition uses an edge predicate")
    return FastReport(rule.name, not reasons, tuple(reasons))


def node_mark_ok(pattern: int, mark: int) -> bool:
    if pattern == ANY:
        return mark != 0
    return pattern == mark


edge_mark_ok = node_mark_ok

__all__ = [
    "And", "Condition", "Const", "Degree", "EdgePred", "FastReport", "LabelExpr",
    "Match", "Not", "Rule", "RuleEdge", "RuleError", "RuleGraph", "RuleNode",
    "Var", "apply_at", "check_dangling", "classify_fast", "condition_tags",
    "conjuncts", "eval_condition", "instantiate", "validate_rule", "node_mark_ok",
    "edge_mark_ok", "EMPTY_EXPR",
]
