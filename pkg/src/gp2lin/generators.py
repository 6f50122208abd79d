"""Benchmark graph classes.

Every generator returns an input graph: grey unrooted nodes, unmarked
edges, empty labels.  ``n`` is a node count; the reported benchmark size
is nodes plus edges.
"""

from __future__ import annotations

import math
import random
from typing import Callable, Dict, List, Optional, Tuple

from .host import EMPTY, GREY, NONE, HostGraph

GRAPH_CLASSES = (
    "discrete",
    "grid",
    "grid-chain",
    "binary-tree",
    "star",
    "cycle",
    "sun",
    "linked-list",
)

BOUNDED_DEGREE = tuple(c for c in GRAPH_CLASSES if c != "star")

EdgeList = List[Tuple[int, int]]


class GeneratorError(ValueError):
    pass


def _discrete(n: int) -> Tuple[int, EdgeList]:
    return n, []


def _cycle(n: int) -> Tuple[int, EdgeList]:
    return n, [(i, (i + 1) % n) for i in range(n)]


def _linked_list(n: int) -> Tuple[int, EdgeList]:
    return n, [(i, i + 1) for i in range(n - 1)]


def _star(n: int) -> Tuple[int, EdgeList]:
    # odd spokes point away from the centre, even spokes towards it
    return n, [(0, i) if i % 2 else (i, 0) for i in range(1, n)]


def _grid(n: int) -> Tuple[int, EdgeList]:
    k = math.isqrt(n - 1) + 1 if n > 1 else 1
    edges = []
    for r in range(k):
        for c in range(k):
            v = r * k + c
            if c + 1 < k:
                edges.append((v, v + 1))
            if r + 1 < k:
                edges.append((v, v + k))
    return k * k, edges


def _binary_tree(n: int) -> Tuple[int, EdgeList]:
    return n, [(i, c) for i in range(n) for c in (2 * i + 1, 2 * i + 2) if c < n]


def _sun(n: int) -> Tuple[int, EdgeList]:
    if n < 4:
        raise GeneratorError("sun needs at least 4 nodes")
    m = n // 2
    edges = [(i, (i + 1) % m) for i in range(m)]
    edges += [(m + i, i) for i in range(m)]
    return 2 * m, edges


_GRID3 = [(0, 1), (1, 2), (3, 4), (4, 5), (6, 7), (7, 8),
          (0, 3), (3, 6), (1, 4), (4, 7), (2, 5), (5, 8)]


def _grid_chain(n: int) -> Tuple[int, EdgeList]:
    # 3x3 grids; the bottom-right corner of one is the top-left of the next
    g = max(1, -(-(n - 1) // 8))
    edges = []
    for j in range(g):
        base = 8 * j
        edges += [(base + a, base + b) for a, b in _GRID3]
    return 1 + 8 * g, edges


_BUILDERS: Dict[str, Callable[[int], Tuple[int, EdgeList]]] = {
    "discrete": _discrete,
    "grid": _grid,
    "grid-chain": _grid_chain,
    "binary-tree": _binary_tree,
    "star": _star,
    "cycle": _cycle,
    "sun": _sun,
    "linked-list": _linked_list,
}


def from_edges(num_nodes: int, edges: EdgeList) -> HostGraph:
    g = HostGraph()
    for _ in range(num_nodes):
        g.add_node(EMPTY, GREY)
    for s, t in edges:
        g.add_edge(s, t)
    return g


def class_shape(cls: str, n: int) -> Tuple[int, EdgeList]:
    """Node count and edge list of ``cls`` at target size ``n``."""
    if cls not in _BUILDERS:
        raise GeneratorError(f"unknown graph class {cls!r}")
    if n < 1:
        raise GeneratorError("n must be at least 1")
    return _BUILDERS[cls](n)


def generate(cls: str, n: int, seed: Optional[int] = None) -> HostGraph:
    """Build the class graph with about ``n`` nodes.

    The classes are deterministic; ``seed`` is accepted for interface
    uniformity and ignored.
    """
    return from_edges(*class_shape(cls, n))


def random_graph(rng: random.Random, max_items: int = 40, loops: bool = True,
                 labels: bool = False) -> HostGraph:
    """Uniformly sized random input graph with at most ``max_items`` items."""
    total = rng.randint(0, max_items)
    nodes = rng.randint(1, total) if total else 0
    g = HostGraph()
    for _ in range(nodes):
        g.add_node((rng.randint(0, 2),) if labels else EMPTY, GREY)
    for _ in range(total - nodes):
        s, t = rng.randrange(nodes), rng.randrange(nodes)
        if s == t and not loops:
            continue
        g.add_edge(s, t, (rng.randint(0, 2),) if labels else EMPTY)
    return g


def random_dag(rng: random.Random, max_nodes: int = 15, p: float = 0.3) -> HostGraph:
    n = rng.randint(1, max_nodes)
    order = list(range(n))
    rng.shuffle(order)
    edges = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return from_edges(n, edges)


def input_graph_violations(g: HostGraph) -> List[str]:
    """Reasons ``g`` is not an input graph; empty when it is one."""
    out = []
    for v in g.nodes():
        if g.node_mark(v) != GREY:
            out.append(f"node {v} is not grey")
        if g.is_root(v):
            out.append(f"node {v} is rooted")
    for e in g.edges():
        if g.edge_mark(e) != NONE:
            out.append(f"edge {e} is marked")
    return out


def is_input_graph(g: HostGraph) -> bool:
    return not input_graph_violations(g)
