import pytest
from hypothesis import given, settings, strategies as st

from gp2lin.host import (
    BLUE, DASHED, GREEN, GREY, NONE, RED, CheckpointError, DanglingError, HostGraph,
    StaleCursorError, UnknownItemError,
)
from gp2lin.textio import print_host


def walk(first, nxt, start=None):
    out = []
    item = first() if start is None else first(start)
    while item is not None:
        out.append(item)
        item = nxt(item)
    return out


def test_add_node_defaults():
    g = HostGraph()
    v = g.add_node((), GREY)
    assert g.indegree(v) == 0 and g.outdegree(v) == 0
    assert g.node_mark(v) == GREY and not g.is_root(v)


def test_label_round_trip():
    g = HostGraph()
    v = g.add_node((3,), GREY)
    assert g.node_label(v) == (3,)


def test_rooted_node_in_root_list():
    g = HostGraph()
    g.add_node()
    v = g.add_node((), GREEN, True)
    assert list(g.roots()) == [v]
    assert [u for u in g.nodes() if g.is_root(u)] == [v]


def test_loop_counts_once_each_way():
    g = HostGraph()
    v = g.add_node()
    g.add_edge(v, v)
    assert g.indegree(v) == 1 and g.outdegree(v) == 1


def test_parallel_edges_kept():
    g = HostGraph()
    u, v = g.add_node(), g.add_node()
    g.add_edge(u, v)
    g.add_edge(u, v)
    assert g.outdegree(u) == 2 and g.num_edges == 2


def test_add_edge_dead_source():
    g = HostGraph()
    u, v = g.add_node(), g.add_node()
    g.delete_node(u)
    with pytest.raises(UnknownItemError):
        g.add_edge(u, v)


def test_set_root_involution():
    g = HostGraph()
    v = g.add_node()
    g.set_root(v, True)
    g.set_root(v, False)
    assert list(g.roots()) == [] and g.num_roots == 0


def test_delete_edge_then_node():
    g = HostGraph()
    u, v = g.add_node(), g.add_node()
    e = g.add_edge(u, v)
    size = g.size
    g.delete_edge(e)
    g.delete_node(v)
    assert g.size == size - 2


def test_delete_node_with_loop_is_dangling():
    g = HostGraph()
    v = g.add_node()
    g.add_edge(v, v)
    with pytest.raises(DanglingError):
        g.delete_node(v)


def test_dead_ids_rejected():
    g = HostGraph()
    v = g.add_node()
    g.delete_node(v)
    for op in (g.node_label, g.indegree, g.delete_node):
        with pytest.raises(UnknownItemError):
            op(v)
    with pytest.raises(UnknownItemError):
        g.delete_edge(7)


def test_invalid_marks():
    g = HostGraph()
    with pytest.raises(ValueError):
        g.add_node((), DASHED)
    v = g.add_node()
    with pytest.raises(ValueError):
        g.add_edge(v, v, (), GREY)


def test_empty_graph_iteration():
    g = HostGraph()
    assert g.first_node() is None
    assert g.first_root() is None


def test_insertion_order():
    g = HostGraph()
    ids = [g.add_node((i,)) for i in range(3)]
    assert walk(g.first_node, g.next_node) == ids


def test_star_out_list_probe_count():
    g = HostGraph()
    c = g.add_node()
    n = 9
    for _ in range(n):
        g.add_edge(c, g.add_node())
    before = g.probes
    assert len(walk(g.first_out_edge, g.next_out_edge, c)) == n
    assert g.probes - before == n + 1


def test_stale_cursor():
    g = HostGraph()
    u = g.add_node()
    g.add_node()
    g.delete_node(u)
    with pytest.raises(StaleCursorError):
        g.next_node(u)


def test_grid_interior_degrees():
    from gp2lin.generators import generate

    g = generate("grid", 9)
    assert g.indegree(4) == 2 and g.outdegree(4) == 2


def test_degree_counters_after_delete():
    g = HostGraph()
    u, v = g.add_node(), g.add_node()
    e = g.add_edge(u, v)
    g.delete_edge(e)
    assert g.outdegree(u) == 0 and g.indegree(v) == 0


def test_checkpoint_add_rollback():
    g = HostGraph()
    g.add_node((1,), GREY)
    before = print_host(g)
    tok = g.checkpoint()
    g.add_node()
    g.rollback(tok)
    assert print_host(g) == before


def test_empty_checkpoint_logs_nothing():
    g = HostGraph()
    g.add_node()
    tok = g.checkpoint()
    assert g.undo_depth == 0
    g.rollback(tok)
    assert g.undo_depth == 0


def test_checkpoint_out_of_order():
    g = HostGraph()
    outer = g.checkpoint()
    g.checkpoint()
    with pytest.raises(CheckpointError):
        g.rollback(outer)
    with pytest.raises(CheckpointError):
        g.commit(outer)


def test_commit_keeps_changes():
    g = HostGraph()
    tok = g.checkpoint()
    v = g.add_node()
    g.commit(tok)
    assert g.has_node(v) and g.undo_depth == 0


def test_copy_is_independent():
    g = HostGraph()
    u = g.add_node((), GREY, True)
    g.add_edge(u, u)
    h = g.copy()
    assert print_host(h) == print_host(g)
    h.set_node_mark(u, RED)
    assert g.node_mark(u) == GREY
    h.check_invariants()


# random edit scripts against a plain-dict model

_ops = st.lists(st.tuples(st.integers(0, 9), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6)),
                max_size=200)


def _apply_script(g: HostGraph, script, model=None):
    node_marks = (NONE, RED, GREEN, BLUE, GREY)
    edge_marks = (NONE, RED, GREEN, BLUE, DASHED)
    for op, a, b in script:
        nodes = list(g.nodes())
        edges = list(g.edges())
        if op in (0, 1) or not nodes:
            v = g.add_node((a % 3,), node_marks[a % 5], b % 4 == 0)
            if model is not None:
                model["nodes"][v] = [(a % 3,), node_marks[a % 5], b % 4 == 0]
        elif op in (2, 3):
            s, t = nodes[a % len(nodes)], nodes[b % len(nodes)]
            e = g.add_edge(s, t, (), edge_marks[b % 5])
            if model is not None:
                model["edges"][e] = [s, t, (), edge_marks[b % 5]]
        elif op == 4 and edges:
            e = edges[a % len(edges)]
            g.delete_edge(e)
            if model is not None:
                del model["edges"][e]
        elif op == 5:
            v = nodes[a % len(nodes)]
            if g.indegree(v) == 0 and g.outdegree(v) == 0:
                g.delete_node(v)
                if model is not None:
                    del model["nodes"][v]
        elif op == 6:
            v = nodes[a % len(nodes)]
            g.set_root(v, b % 2 == 0)
            if model is not None:
                model["nodes"][v][2] = b % 2 == 0
        elif op == 7:
            v = nodes[a % len(nodes)]
            g.set_node_mark(v, node_marks[b % 5])
            if model is not None:
                model["nodes"][v][1] = node_marks[b % 5]
        elif op == 8:
            v = nodes[a % len(nodes)]
            g.relabel_node(v, (b % 7, "s"))
            if model is not None:
                model["nodes"][v][0] = (b % 7, "s")
        elif op == 9 and edges:
            e = edges[a % len(edges)]
            g.set_edge_mark(e, edge_marks[b % 5])
            g.relabel_edge(e, (b % 4,))
            if model is not None:
                model["edges"][e][3] = edge_marks[b % 5]
                model["edges"][e][2] = (b % 4,)


@settings(max_examples=150, deadline=None)
@given(_ops)
def test_matches_model_after_random_script(script):
    g = HostGraph()
    model = {"nodes": {}, "edges": {}}
    _apply_script(g, script, model)
    g.check_invariants()
    assert list(g.nodes()) == sorted(model["nodes"])
    assert list(g.edges()) == sorted(model["edges"])
    assert {v for v in g.roots()} == {v for v, a in model["nodes"].items() if a[2]}
    for v, (label, mark, root) in model["nodes"].items():
        assert (g.node_label(v), g.node_mark(v), g.is_root(v)) == (label, mark, root)
        assert g.indegree(v) == sum(1 for e in model["edges"].values() if e[1] == v)
        assert g.outdegree(v) == sum(1 for e in model["edges"].values() if e[0] == v)
    for e, (s, t, label, mark) in model["edges"].items():
        assert (g.source(e), g.target(e), g.edge_label(e), g.edge_mark(e)) == (s, t, label, mark)


@settings(max_examples=150, deadline=None)
@given(_ops, _ops)
def test_rollback_restores_serialisation(setup, edits):
    g = HostGraph()
    _apply_script(g, setup)
    before = print_host(g)
    orders = [list(g.out_edges(v)) + list(g.in_edges(v)) for v in g.nodes()]
    roots = list(g.roots())
    tok = g.checkpoint()
    _apply_script(g, edits)
    g.rollback(tok)
    g.check_invariants()
    assert print_host(g) == before
    assert [list(g.out_edges(v)) + list(g.in_edges(v)) for v in g.nodes()] == orders
    assert list(g.roots()) == roots


@settings(max_examples=60, deadline=None)
@given(_ops, _ops, _ops)
def test_nested_rollback(setup, outer_edits, inner_edits):
    g = HostGraph()
    _apply_script(g, setup)
    base = print_host(g)
    t1 = g.checkpoint()
    _apply_script(g, outer_edits)
    middle = print_host(g)
    t2 = g.checkpoint()
    _apply_script(g, inner_edits)
    g.rollback(t2)
    assert print_host(g) == middle
    g.rollback(t1)
    assert print_host(g) == base


@settings(max_examples=80, deadline=None)
@given(_ops)
def test_list_walk_costs_length_plus_one(script):
    g = HostGraph()
    _apply_script(g, script)
    before = g.probes
    nodes = walk(g.first_node, g.next_node)
    assert g.probes - before == len(nodes) + 1
    for v in nodes:
        before = g.probes
        k = len(walk(g.first_in_edge, g.next_in_edge, v))
        assert k == g.indegree(v) and g.probes - before == k + 1
