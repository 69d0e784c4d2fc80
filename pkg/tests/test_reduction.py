import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from acyclab.core import topological_order
from acyclab.distance import min_feedback_edges
from acyclab.reduction import (COLORS, A, B, GadgetId, Layout, S, Shape, Simulator, SourceGraph, X, Y,
                               all_small_graphs, assignment_distance, assignment_witness, completeness_witness,
                               gap_params, optimal_assignment, parse_gadget, reduce, simulate_query,
                               three_color_audit)

SMALL = Shape(1, 2)
K3 = SourceGraph(3, [(0, 1), (0, 2), (1, 2)], 3)
K4 = SourceGraph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)], 3)
P3 = SourceGraph(3, [(0, 1), (1, 2)], 3)


def random_source(rng, n_max=10, Delta=3):
    n = rng.randint(1, n_max)
    deg = [0] * n
    edges = []
    for u, v in rng.sample([(u, v) for u in range(n) for v in range(u + 1, n)], k=min(n * (n - 1) // 2, 2 * n)):
        if deg[u] < Delta and deg[v] < Delta:
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return SourceGraph(n, edges, Delta)


def plain_assignment_oracle(H, t):
    """Direct 4^n enumeration of the assignment cost."""
    best = None
    for c in product((1, 2, 3, None), repeat=H.n):
        cost = 2 * H.n + sum(x is None for x in c)
        cost += t * sum(c[u] is not None and c[u] == c[v] for u, v in H.edges)
        best = cost if best is None else min(best, cost)
    return best


def selection_arcs(H, lay):
    return [(lay.index(Y(v, i)), lay.index(X(v, i))) for v in range(H.n) for i in COLORS]


# ---------------------------------------------------------------- source graphs and ids

def test_source_graph_canonical_and_guards(tmp_path):
    H = SourceGraph(3, [(2, 0), (1, 0)], 2)
    assert H.edges == [(0, 1), (0, 2)]
    assert [H.f(0, i) for i in (1, 2)] == [1, 2] and H.f(1, 2) is None
    for bad in ([(0, 0)], [(0, 1), (1, 0)], [(0, 5)]):
        with pytest.raises(ValueError):
            SourceGraph(3, bad, 2)
    with pytest.raises(ValueError):
        SourceGraph(3, [(0, 1), (0, 2)], 1)
    H.write(tmp_path / "h.edges")
    back = SourceGraph.read(tmp_path / "h.edges")
    assert back.edges == H.edges and back.Delta == 2


def test_gadget_label_roundtrip():
    for g in (Y(0, 1), X(3, 2), A((0, 2), 3, 1), B((1, 4), 1, 2), S(5, 3, 1, 7)):
        assert parse_gadget(str(g)) == g
    with pytest.raises(ValueError):
        parse_gadget("Q 1 2")


@pytest.mark.parametrize("H", [K3, K4, P3, SourceGraph(1, [], 3)])
@pytest.mark.parametrize("t,r", [(1, 2), (2, 3)])
def test_layout_is_a_bijection(H, t, r):
    lay = Layout(H, t, r)
    assert lay.size == 6 * H.n + 6 * t * H.m + 6 * r * H.n
    labels = [lay.label(k) for k in range(lay.size)]
    assert len(set(labels)) == lay.size
    assert all(lay.index(g) == k for k, g in enumerate(labels))
    # block order Y | X | A | B | S
    kinds = [g.kind for g in labels]
    assert kinds == sorted(kinds, key="YXABS".index)


def test_layout_rejects_invalid_ids():
    lay = Layout(K3, 1, 2)
    for g in (Y(3, 1), X(0, 4), A((0, 1), 1, 2), A((1, 0), 1, 1), S(0, 2, 2, 1), S(0, 1, 2, 3)):
        with pytest.raises(ValueError):
            lay.index(g)
    with pytest.raises(ValueError):
        lay.label(lay.size)


# ---------------------------------------------------------------- construction

def test_k3_size_and_degrees():
    g, lay = reduce(K3, SMALL)
    assert g.n == 72
    assert g.max_outdegree() <= 1 * 3 + 2 * 2
    for k in range(g.n):
        if lay.label(k).kind != "X":
            assert len(g.adj[k]) == 1


def test_x_outdegree_and_order():
    H = SourceGraph(4, [(0, 1), (0, 2), (0, 3)], 3)
    g, lay = reduce(H, SMALL)
    ans = [lay.label(w) for w in g.adj[lay.index(X(0, 2))]]
    assert len(ans) == 7
    assert ans == [S(0, 2, 1, 1), S(0, 2, 1, 2), S(0, 2, 3, 1), S(0, 2, 3, 2),
                   A((0, 1), 2, 1), A((0, 2), 2, 1), A((0, 3), 2, 1)]
    assert [lay.label(w) for w in g.adj[lay.index(X(2, 2))]][-1] == B((0, 2), 2, 1)


def test_arcs_follow_the_gadget_rules():
    g, lay = reduce(K3, Shape(2, 2))
    for k in range(g.n):
        src = lay.label(k)
        for w in g.adj[k]:
            dst = lay.label(w)
            if src.kind == "Y":
                assert dst == X(src.key, src.i)
            elif src.kind == "A":
                assert dst == Y(src.key[1], src.i)
            elif src.kind == "B":
                assert dst == Y(src.key[0], src.i)
            elif src.kind == "S":
                assert dst == Y(src.key, src.j)


def test_reduce_rejects_degree_violation():
    with pytest.raises(ValueError):
        reduce(SourceGraph(4, [(0, 1), (0, 2), (0, 3)], 2), SMALL)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_every_cycle_uses_a_selection_arc(seed):
    H = random_source(random.Random(seed), n_max=6)
    g, lay = reduce(H, SMALL)
    assert topological_order(g.without(selection_arcs(H, lay))) is not None


# ---------------------------------------------------------------- simulation

def test_simulation_examples():
    sim = Simulator(K3.f, 3, 3, 1, 2)
    assert simulate_query(K3, SMALL, Y(1, 2), sim) == ([X(1, 2)], 0)
    g, lay = reduce(K3, SMALL)
    for k in range(g.n):
        ans, _ = simulate_query(K3, SMALL, lay.label(k), sim)
        assert [lay.index(w) for w in ans] == g.adj[k]
    with pytest.raises(ValueError):
        sim.query(Y(9, 1))


def test_simulation_matches_materialized_on_random_graphs():
    rng = random.Random(11)
    for _ in range(100):
        H = random_source(rng)
        p = Shape(rng.randint(1, 2), rng.randint(2, 3))
        g, lay = reduce(H, p)
        sim = Simulator(H.f, H.n, H.Delta, p.t, p.r)
        order = list(range(g.n))
        rng.shuffle(order)
        for k in order:
            fresh = Simulator(H.f, H.n, H.Delta, p.t, p.r)
            ans, used = fresh.query(lay.label(k))
            assert [lay.index(w) for w in ans] == g.adj[k]
            assert used <= H.Delta if lay.label(k).kind == "X" else used == 0
            assert sim.query(lay.label(k))[0] == ans
        assert sim.oracle.count <= H.Delta * H.n


# ---------------------------------------------------------------- completeness and assignments

@pytest.mark.parametrize("H,c", [(K3, [1, 2, 3]), (SourceGraph(1, [], 3), [2]), (P3, [1, 2, 1])])
def test_completeness_witness_examples(H, c):
    F = completeness_witness(H, c, SMALL)
    assert len(F) == 2 * H.n
    g, _ = reduce(H, SMALL)
    assert topological_order(g.without(F)) is not None


def test_completeness_rejects_improper():
    with pytest.raises(ValueError):
        completeness_witness(K3, [1, 1, 2], SMALL)
    with pytest.raises(ValueError):
        completeness_witness(P3, [1, 2, 4], SMALL)


@pytest.mark.parametrize("H,t,expected", [(K3, 1, 6), (K4, 1, 9), (K4, 2, 9), (SourceGraph(1, [], 3), 1, 2)])
def test_assignment_distance_examples(H, t, expected):
    assert assignment_distance(H, t) == expected == plain_assignment_oracle(H, t)


def test_assignment_distance_matches_plain_enumeration():
    rng = random.Random(5)
    for _ in range(60):
        H = random_source(rng, n_max=7)
        t = rng.randint(1, 3)
        assert assignment_distance(H, t) == plain_assignment_oracle(H, t)
    with pytest.raises(ValueError):
        assignment_distance(SourceGraph(13, [], 3), 1)


def test_assignment_witness_realises_the_cost():
    for H in (K3, K4, P3):
        for t in (1, 2):
            c = optimal_assignment(H, t)
            F = assignment_witness(H, c, Shape(t, 2))
            assert len(F) == assignment_distance(H, t)


def test_three_color_audit_examples():
    assert three_color_audit(K3) == (True, 0)
    assert three_color_audit(K4) == (False, 1)
    assert three_color_audit(SourceGraph(4, [], 3)) == (True, 0)
    with pytest.raises(ValueError):
        three_color_audit(SourceGraph(16, [], 3))


def test_assignment_bound_tracks_colorability():
    rng = random.Random(8)
    for _ in range(80):
        H = random_source(rng, n_max=8)
        colorable, _ = three_color_audit(H)
        dist = assignment_distance(H, 1)
        assert dist >= 2 * H.n
        assert (dist == 2 * H.n) == colorable


def test_assignment_distance_equals_generic_solver_on_tiny_graphs():
    graphs = all_small_graphs(3, 3)
    assert len(graphs) == 1 + 2 + 8
    for H in graphs:
        g, _ = reduce(H, SMALL)
        assert min_feedback_edges(g).size == assignment_distance(H, 1)


# ---------------------------------------------------------------- gap constants

def test_gap_examples():
    p = gap_params(3, 0.1, 1)
    assert (p.r, p.d, p.eps1, p.eps2) == (60, 123, Fraction(1, 22509), Fraction(41, 922500))
    assert float(p.eps2) == pytest.approx(4.4444e-5, rel=1e-4)
    p = gap_params(1, 1, 1)
    assert (p.r, p.d, p.eps1) == (2, 5, Fraction(1, 45))
    with pytest.raises(ValueError):
        gap_params(3, 0.1, 1, r=2)
    with pytest.raises(ValueError):
        gap_params(3, 0, 1)


@given(st.integers(1, 6), st.fractions(min_value=Fraction(1, 1000), max_value=1), st.integers(1, 5))
@settings(max_examples=100, deadline=None)
def test_gap_invariants(Delta, delta, t):
    p = gap_params(Delta, delta, t)
    assert p.delta / 2 * (1 + p.r) > t * Delta
    assert 0 < p.eps1 < p.eps2 < 1
    assert p.d == t * Delta + 2 * p.r
