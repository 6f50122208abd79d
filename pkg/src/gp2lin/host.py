"""Host graph store.

Nodes and edges live in intrusive doubly linked lists so that every
primitive the matcher relies on (first/next over the node list, the
root list and the per-node in/out lists, degree lookups, matched flags)
runs in constant time.  Identifiers are dense integers that are never
reused within one graph.

Speculative execution is supported by an undo log.  While at least one
checkpoint is open, every mutation records its inverse; rolling back
replays the log backwards, relinking list cells exactly where they were
("dancing links"), so iteration order and identities come back intact.
"""

from __future__ import annotations

from typing import Iterator, Optional, Tuple, Union

Atom = Union[int, str]
Label = Tuple[Atom, ...]

EMPTY: Label = ()

# Marks are small ints: comparisons in generated matcher code stay cheap.
NONE = 0
RED = 1
GREEN = 2
BLUE = 3
GREY = 4
DASHED = 5
ANY = 6

MARK_NAMES = ("none", "red", "green", "blue", "grey", "dashed", "any")
MARK_CODES = {name: code for code, name in enumerate(MARK_NAMES)}
NODE_MARKS = frozenset((NONE, RED, GREEN, BLUE, GREY))
EDGE_MARKS = frozenset((NONE, RED, GREEN, BLUE, DASHED))

# undo-log opcodes
_ADD_NODE = 0
_ADD_EDGE = 1
_DEL_NODE = 2
_DEL_EDGE = 3
_NODE_MARK = 4
_EDGE_MARK = 5
_NODE_LABEL = 6
_EDGE_LABEL = 7
_ROOT_ON = 8
_ROOT_OFF = 9


class GraphError(Exception):
    """Base class for host graph errors."""


class UnknownItemError(GraphError):
    pass


class DanglingError(GraphError):
    pass


class StaleCursorError(GraphError):
    pass


class CheckpointError(GraphError):
    pass


class Node:
    __slots__ = (
        "id", "label", "mark", "root", "matched", "alive",
        "prev", "next", "rprev", "rnext",
        "ohead", "otail", "ihead", "itail", "indeg", "outdeg",
    )

    def __init__(self, nid: int, label: Label, mark: int, root: bool) -> None:
        self.id = nid
        self.label = label
        self.mark = mark
        self.root = root
        self.matched = False
        self.alive = True
        self.prev = self.next = None
        self.rprev = self.rnext = None
        self.ohead = self.otail = None
        self.ihead = self.itail = None
        self.indeg = 0
        self.outdeg = 0

    def __repr__(self) -> str:
        return f"Node({self.id}, {self.label!r}, {MARK_NAMES[self.mark]}, root={self.root})"


class Edge:
    __slots__ = (
        "id", "src", "tgt", "label", "mark", "matched", "alive",
        "prev", "next", "oprev", "onext", "iprev", "inext",
    )

    def __init__(self, eid: int, src: Node, tgt: Node, label: Label, mark: int) -> None:
        self.id = eid
        self.src = src
        self.tgt = tgt
        self.label = label
        self.mark = mark
        self.matched = False
        self.alive = True
        self.prev = self.next = None
        self.oprev = self.onext = None
        self.iprev = self.inext = None

    def __repr__(self) -> str:
        return (f"Edge({self.id}, {self.src.id}->{self.tgt.id}, {self.label!r}, "
                f"{MARK_NAMES[self.mark]})")


def check_label(label) -> Label:
    """Normalise a label to a tuple of atoms, rejecting anything else."""
    label = tuple(label)
    for atom in label:
        if isinstance(atom, bool) or not isinstance(atom, (int, str)):
            raise TypeError(f"label atoms must be int or str, got {atom!r}")
        if isinstance(atom, str) and "\n" in atom:
            raise ValueError("string atoms may not contain newlines")
    return label


class HostGraph:
    """Labelled, marked, rooted directed multigraph.

    The public API speaks integer identifiers.  The underscore methods
    take the ``Node``/``Edge`` cells themselves; the matcher and rule
    application use those on the hot path.
    """

    def __init__(self) -> None:
        self._nodes: list = []
        self._edges: list = []
        self._nhead = self._ntail = None
        self._rhead = self._rtail = None
        self._ehead = self._etail = None
        self.num_nodes = 0
        self.num_edges = 0
        self.num_roots = 0
        self.probes = 0
        self._log: list = []
        self._marks: list = []

    # ---------------------------------------------------------------- lookup

    def node(self, nid: int) -> Node:
        try:
            n = self._nodes[nid]
        except (IndexError, TypeError):
            n = None
        if n is None or nid < 0:
            raise UnknownItemError(f"no node {nid}")
        return n

    def edge(self, eid: int) -> Edge:
        try:
            e = self._edges[eid]
        except (IndexError, TypeError):
            e = None
        if e is None or eid < 0:
            raise UnknownItemError(f"no edge {eid}")
        return e

    def has_node(self, nid: int) -> bool:
        return 0 <= nid < len(self._nodes) and self._nodes[nid] is not None

    def has_edge(self, eid: int) -> bool:
        return 0 <= eid < len(self._edges) and self._edges[eid] is not None

    @property
    def size(self) -> int:
        return self.num_nodes + self.num_edges

    def __len__(self) -> int:
        return self.size

    def node_label(self, nid: int) -> Label:
        return self.node(nid).label

    def node_mark(self, nid: int) -> int:
        return self.node(nid).mark

    def is_root(self, nid: int) -> bool:
        return self.node(nid).root

    def edge_label(self, eid: int) -> Label:
        return self.edge(eid).label

    def edge_mark(self, eid: int) -> int:
        return self.edge(eid).mark

    def source(self, eid: int) -> int:
        return self.edge(eid).src.id

    def target(self, eid: int) -> int:
        return self.edge(eid).tgt.id

    def indegree(self, nid: int) -> int:
        return self.node(nid).indeg

    def outdegree(self, nid: int) -> int:
        return self.node(nid).outdeg

    # ------------------------------------------------------------ iteration
    # Each first_*/next_* call counts as one probe.

    def first_node(self) -> Optional[int]:
        self.probes += 1
        n = self._nhead
        return None if n is None else n.id

    def next_node(self, nid: int) -> Optional[int]:
        self.probes += 1
        n = self._cursor_node(nid).next
        return None if n is None else n.id

    def first_root(self) -> Optional[int]:
        self.probes += 1
        n = self._rhead
        return None if n is None else n.id

    def next_root(self, nid: int) -> Optional[int]:
        self.probes += 1
        n = self._cursor_node(nid)
        if not n.root:
            raise StaleCursorError(f"node {nid} is no longer a root")
        n = n.rnext
        return None if n is None else n.id

    def first_out_edge(self, nid: int) -> Optional[int]:
        self.probes += 1
        e = self.node(nid).ohead
        return None if e is None else e.id

    def next_out_edge(self, eid: int) -> Optional[int]:
        self.probes += 1
        e = self._cursor_edge(eid).onext
        return None if e is None else e.id

    def first_in_edge(self, nid: int) -> Optional[int]:
        self.probes += 1
        e = self.node(nid).ihead
        return None if e is None else e.id

    def next_in_edge(self, eid: int) -> Optional[int]:
        self.probes += 1
        e = self._cursor_edge(eid).inext
        return None if e is None else e.id

    def _cursor_node(self, nid: int) -> Node:
        if 0 <= nid < len(self._nodes):
            n = self._nodes[nid]
            if n is not None:
                return n
            raise StaleCursorError(f"node {nid} was deleted")
        raise UnknownItemError(f"no node {nid}")

    def _cursor_edge(self, eid: int) -> Edge:
        if 0 <= eid < len(self._edges):
            e = self._edges[eid]
            if e is not None:
                return e
            raise StaleCursorError(f"edge {eid} was deleted")
        raise UnknownItemError(f"no edge {eid}")

    # Convenience iterators; these do not touch the probe counter.

    def nodes(self) -> Iterator[int]:
        n = self._nhead
        while n is not None:
            yield n.id
            n = n.next

    def roots(self) -> Iterator[int]:
        n = self._rhead
        while n is not None:
            yield n.id
            n = n.rnext

    def edges(self) -> Iterator[int]:
        e = self._ehead
        while e is not None:
            yield e.id
            e = e.next

    def out_edges(self, nid: int) -> Iterator[int]:
        e = self.node(nid).ohead
        while e is not None:
            yield e.id
            e = e.onext

    def in_edges(self, nid: int) -> Iterator[int]:
        e = self.node(nid).ihead
        while e is not None:
            yield e.id
            e = e.inext

    def node_cells(self) -> Iterator[Node]:
        n = self._nhead
        while n is not None:
            yield n
            n = n.next

    def edge_cells(self) -> Iterator[Edge]:
        e = self._ehead
        while e is not None:
            yield e
            e = e.next

    # ------------------------------------------------------------- mutation

    def add_node(self, label=EMPTY, mark: int = NONE, rooted: bool = False) -> int:
        if mark not in NODE_MARKS:
            raise ValueError(f"invalid node mark {mark!r}")
        return self._new_node(check_label(label), mark, bool(rooted)).id

    def add_edge(self, src: int, tgt: int, label=EMPTY, mark: int = NONE) -> int:
        if mark not in EDGE_MARKS:
            raise ValueError(f"invalid edge mark {mark!r}")
        return self._new_edge(self.node(src), self.node(tgt), check_label(label), mark).id

    def delete_node(self, nid: int) -> None:
        self._del_node(self.node(nid))

    def delete_edge(self, eid: int) -> None:
        self._del_edge(self.edge(eid))

    def relabel_node(self, nid: int, label) -> None:
        self._set_nlabel(self.node(nid), check_label(label))

    def relabel_edge(self, eid: int, label) -> None:
        self._set_elabel(self.edge(eid), check_label(label))

    def set_node_mark(self, nid: int, mark: int) -> None:
        if mark not in NODE_MARKS:
            raise ValueError(f"invalid node mark {mark!r}")
        self._set_nmark(self.node(nid), mark)

    def set_edge_mark(self, eid: int, mark: int) -> None:
        if mark not in EDGE_MARKS:
            raise ValueError(f"invalid edge mark {mark!r}")
        self._set_emark(self.edge(eid), mark)

    def set_root(self, nid: int, flag: bool) -> None:
        self._set_root(self.node(nid), bool(flag))

    # cell-level mutators

    def _new_node(self, label: Label, mark: int, root: bool) -> Node:
        n = Node(len(self._nodes), label, mark, root)
        self._nodes.append(n)
        t = self._ntail
        n.prev = t
        if t is None:
            self._nhead = n
        else:
            t.next = n
        self._ntail = n
        if root:
            t = self._rtail
            n.rprev = t
            if t is None:
                self._rhead = n
            else:
                t.rnext = n
            self._rtail = n
            self.num_roots += 1
        self.num_nodes += 1
        if self._marks:
            self._log.append((_ADD_NODE, n))
        return n

    def _new_edge(self, s: Node, t: Node, label: Label, mark: int) -> Edge:
        e = Edge(len(self._edges), s, t, label, mark)
        self._edges.append(e)
        last = self._etail
        e.prev = last
        if last is None:
            self._ehead = e
        else:
            last.next = e
        self._etail = e
        last = s.otail
        e.oprev = last
        if last is None:
            s.ohead = e
        else:
            last.onext = e
        s.otail = e
        s.outdeg += 1
        last = t.itail
        e.iprev = last
        if last is None:
            t.ihead = e
        else:
            last.inext = e
        t.itail = e
        t.indeg += 1
        self.num_edges += 1
        if self._marks:
            self._log.append((_ADD_EDGE, e))
        return e

    def _del_edge(self, e: Edge) -> None:
        self._unlink_edge(e)
        if self._marks:
            self._log.append((_DEL_EDGE, e))

    def _del_node(self, n: Node) -> None:
        if n.indeg or n.outdeg:
            raise DanglingError(f"node {n.id} still has incident edges")
        self._unlink_node(n)
        if self._marks:
            self._log.append((_DEL_NODE, n))

    def _set_nmark(self, n: Node, mark: int) -> None:
        if self._marks:
            self._log.append((_NODE_MARK, n, n.mark))
        n.mark = mark

    def _set_emark(self, e: Edge, mark: int) -> None:
        if self._marks:
            self._log.append((_EDGE_MARK, e, e.mark))
        e.mark = mark

    def _set_nlabel(self, n: Node, label: Label) -> None:
        if self._marks:
            self._log.append((_NODE_LABEL, n, n.label))
        n.label = label

    def _set_elabel(self, e: Edge, label: Label) -> None:
        if self._marks:
            self._log.append((_EDGE_LABEL, e, e.label))
        e.label = label

    def _set_root(self, n: Node, flag: bool) -> None:
        if n.root == flag:
            return
        if flag:
            self._root_append(n)
            if self._marks:
                self._log.append((_ROOT_ON, n))
        else:
            self._root_unlink(n)
            if self._marks:
                self._log.append((_ROOT_OFF, n))

    # list surgery; unlinking keeps the cell's own pointers so that an
    # undo in LIFO order can splice it back into the same position

    def _root_append(self, n: Node) -> None:
        t = self._rtail
        n.rprev = t
        n.rnext = None
        if t is None:
            self._rhead = n
        else:
            t.rnext = n
        self._rtail = n
        n.root = True
        self.num_roots += 1

    def _root_unlink(self, n: Node) -> None:
        p, q = n.rprev, n.rnext
        if p is None:
            self._rhead = q
        else:
            p.rnext = q
        if q is None:
            self._rtail = p
        else:
            q.rprev = p
        n.root = False
        self.num_roots -= 1

    def _root_relink(self, n: Node) -> None:
        p, q = n.rprev, n.rnext
        if p is None:
            self._rhead = n
        else:
            p.rnext = n
        if q is None:
            self._rtail = n
        else:
            q.rprev = n
        n.root = True
        self.num_roots += 1

    def _unlink_node(self, n: Node) -> None:
        p, q = n.prev, n.next
        if p is None:
            self._nhead = q
        else:
            p.next = q
        if q is None:
            self._ntail = p
        else:
            q.prev = p
        if n.root:
            self._root_unlink(n)
            n.root = True  # remembered for relinking
        n.alive = False
        self._nodes[n.id] = None
        self.num_nodes -= 1

    def _relink_node(self, n: Node) -> None:
        p, q = n.prev, n.next
        if p is None:
            self._nhead = n
        else:
            p.next = n
        if q is None:
            self._ntail = n
        else:
            q.prev = n
        if n.root:
            self._root_relink(n)
        n.alive = True
        self._nodes[n.id] = n
        self.num_nodes += 1

    def _unlink_edge(self, e: Edge) -> None:
        p, q = e.prev, e.next
        if p is None:
            self._ehead = q
        else:
            p.next = q
        if q is None:
            self._etail = p
        else:
            q.prev = p
        s = e.src
        p, q = e.oprev, e.onext
        if p is None:
            s.ohead = q
        else:
            p.onext = q
        if q is None:
            s.otail = p
        else:
            q.oprev = p
        s.outdeg -= 1
        t = e.tgt
        p, q = e.iprev, e.inext
        if p is None:
            t.ihead = q
        else:
            p.inext = q
        if q is None:
            t.itail = p
        else:
            q.iprev = p
        t.indeg -= 1
        e.alive = False
        self._edges[e.id] = None
        self.num_edges -= 1

    def _relink_edge(self, e: Edge) -> None:
        p, q = e.prev, e.next
        if p is None:
            self._ehead = e
        else:
            p.next = e
        if q is None:
            self._etail = e
        else:
            q.prev = e
        s = e.src
        p, q = e.oprev, e.onext
        if p is None:
            s.ohead = e
        else:
            p.onext = e
        if q is None:
            s.otail = e
        else:
            q.oprev = e
        s.outdeg += 1
        t = e.tgt
        p, q = e.iprev, e.inext
        if p is None:
            t.ihead = e
        else:
            p.inext = e
        if q is None:
            t.itail = e
        else:
            q.iprev = e
        t.indeg += 1
        e.alive = True
        self._edges[e.id] = e
        self.num_edges += 1

    # ---------------------------------------------------------- checkpoints

    def checkpoint(self) -> int:
        """Open a nested checkpoint and return its token."""
        self._marks.append(len(self._log))
        return len(self._marks)

    def _check_top(self, token: int) -> None:
        if token != len(self._marks) or token <= 0:
            raise CheckpointError(
                f"checkpoint {token} is not the innermost open checkpoint")

    def commit(self, token: int) -> None:
        """Close a checkpoint, keeping its changes."""
        self._check_top(token)
        self._marks.pop()
        if not self._marks:
            self._log.clear()

    def rollback(self, token: int) -> None:
        """Undo every change made since ``token`` was opened and close it."""
        self._check_top(token)
        pos = self._marks.pop()
        log = self._log
        while len(log) > pos:
            entry = log.pop()
            op = entry[0]
            x = entry[1]
            if op == _NODE_MARK:
                x.mark = entry[2]
            elif op == _EDGE_MARK:
                x.mark = entry[2]
            elif op == _DEL_EDGE:
                self._relink_edge(x)
            elif op == _ADD_EDGE:
                self._unlink_edge(x)
            elif op == _DEL_NODE:
                self._relink_node(x)
            elif op == _ADD_NODE:
                self._unlink_node(x)
                x.root = False
            elif op == _ROOT_ON:
                self._root_unlink(x)
            elif op == _ROOT_OFF:
                self._root_relink(x)
            elif op == _NODE_LABEL:
                x.label = entry[2]
            else:
                x.label = entry[2]

    @property
    def undo_depth(self) -> int:
        """Number of undo-log entries currently held."""
        return len(self._log)

    @property
    def open_checkpoints(self) -> int:
        return len(self._marks)

    # --------------------------------------------------------------- misc

    def copy(self) -> "HostGraph":
        """Structural copy with identical ids and iteration order."""
        g = HostGraph()
        g._nodes = [None] * len(self._nodes)
        g._edges = [None] * len(self._edges)
        for n in self.node_cells():
            m = Node(n.id, n.label, n.mark, False)
            g._nodes[n.id] = m
            t = g._ntail
            m.prev = t
            if t is None:
                g._nhead = m
            else:
                t.next = m
            g._ntail = m
            g.num_nodes += 1
        for nid in self.roots():
            g._root_append(g._nodes[nid])
        for e in self.edge_cells():
            s, t = g._nodes[e.src.id], g._nodes[e.tgt.id]
            f = Edge(e.id, s, t, e.label, e.mark)
            g._edges[e.id] = f
            last = g._etail
            f.prev = last
            if last is None:
                g._ehead = f
            else:
                last.next = f
            g._etail = f
            g.num_edges += 1
        # per-node lists keep their own order, which may differ from the
        # global edge order after deletions and rollbacks
        for n in self.node_cells():
            m = g._nodes[n.id]
            e = n.ohead
            while e is not None:
                f = g._edges[e.id]
                last = m.otail
                f.oprev = last
                if last is None:
                    m.ohead = f
                else:
                    last.onext = f
                m.otail = f
                m.outdeg += 1
                e = e.onext
            e = n.ihead
            while e is not None:
                f = g._edges[e.id]
                last = m.itail
                f.iprev = last
                if last is None:
                    m.ihead = f
                else:
                    last.inext = f
                m.itail = f
                m.indeg += 1
                e = e.inext
        return g

    def check_invariants(self) -> None:
        """Full-scan consistency check, used by tests."""
        seen = set()
        n = self._nhead
        prev = None
        count = 0
        while n is not None:
            assert n.alive and self._nodes[n.id] is n
            assert n.prev is prev
            assert not n.matched, f"matched flag left on node {n.id}"
            seen.add(n.id)
            prev = n
            n = n.next
            count += 1
        assert prev is self._ntail
        assert count == self.num_nodes
        roots = []
        n = self._rhead
        prev = None
        while n is not None:
            assert n.rprev is prev and n.root and n.alive
            roots.append(n.id)
            prev = n
            n = n.rnext
        assert prev is self._rtail
        assert set(roots) == {i for i in seen if self._nodes[i].root}
        assert len(roots) == self.num_roots
        count = 0
        e = self._ehead
        prev = None
        while e is not None:
            assert e.alive and self._edges[e.id] is e
            assert e.prev is prev
            assert not e.matched, f"matched flag left on edge {e.id}"
            assert e.src.id in seen and e.tgt.id in seen
            prev = e
            e = e.next
            count += 1
        assert prev is self._etail
        assert count == self.num_edges
        for nid in seen:
            v = self._nodes[nid]
            outs = list(self.out_edges(nid))
            ins = list(self.in_edges(nid))
            assert len(outs) == v.outdeg and len(ins) == v.indeg
            assert all(self._edges[i].src is v for i in outs)
            assert all(self._edges[i].tgt is v for i in ins)
