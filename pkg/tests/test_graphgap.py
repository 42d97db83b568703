import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cotype_lab.graphgap import (
    RegularGraph,
    load_graph,
    load_partition,
    relative_spectral_gap,
    search_gap,
    spectral_gap,
)
from cotype_lab.measures import Partition
from cotype_lab.spaces import LpSpace, TreeSpace


def _enumerated(graph, X, blocks=None):
    N = graph.N
    d2 = lambda u, v: float(np.sum((X[u] - X[v]) ** 2))  # noqa: E731
    rhs = sum(d2(u, v) for u, v in graph.edges) / len(graph.edges)
    if blocks is None:
        lhs = sum(d2(u, v) for u, v in itertools.product(range(N), repeat=2)) / N**2
    else:
        lhs = sum(sum(d2(u, v) for u in b for v in b) / len(b) for b in blocks) / N
    return lhs, rhs


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_complete_graph_gap(rng, N):
    sp = LpSpace(1, 2)
    for _ in range(10):
        X = rng.normal(size=(N, 1))
        r = spectral_gap(RegularGraph.complete(N), sp, X)
        assert abs(r.gamma_hat - (N - 1) / N) <= 1e-12
        lhs, rhs = _enumerated(RegularGraph.complete(N), X)
        assert r.lhs == pytest.approx(lhs, rel=1e-13) and r.rhs == pytest.approx(rhs, rel=1e-13)


def test_three_cycle_example():
    r = spectral_gap(RegularGraph.cycle(3), LpSpace(1, 2), [[0.0], [0.0], [1.0]])
    assert r.lhs == 4 / 9 and r.rhs == 2 / 3 and r.gamma_hat == 2 / 3
    assert "lower bound" in r.note


def test_constant_configuration_is_degenerate():
    r = spectral_gap(RegularGraph.cycle(5), LpSpace(2, 2), np.ones((5, 2)))
    assert r.gamma_hat == 0 and r.degenerate


def test_square_two_blocks():
    g = RegularGraph.cycle(4)
    P = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    r = relative_spectral_gap(g, Partition(4, ((0, 1), (2, 3))), LpSpace(2, 2), P)
    lhs, rhs = _enumerated(g, P, ((0, 1), (2, 3)))
    assert (r.lhs, r.rhs) == (lhs, rhs) == (0.5, 1.0)
    assert r.rho_hat == 0.5


@given(st.integers(3, 7), st.integers(0, 2**31))
def test_trivial_partition_equals_gap(N, seed):
    rng = np.random.default_rng(seed)
    g = RegularGraph.cycle(N)
    X = rng.normal(size=(N, 2))
    sp = LpSpace(2, 2)
    a = spectral_gap(g, sp, X)
    b = relative_spectral_gap(g, Partition.trivial(N), sp, X)
    assert b.lhs == pytest.approx(a.lhs, rel=1e-13) and b.gamma_hat == pytest.approx(a.gamma_hat, rel=1e-13)
    s = relative_spectral_gap(g, Partition.singletons(N), sp, X)
    assert s.lhs == 0 and s.rho_hat == 0


@given(st.integers(0, 2**31), st.floats(0.01, 100))
def test_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    g = RegularGraph.cycle(6)
    X = rng.normal(size=(6, 3))
    sp = LpSpace(3, 2)
    a = spectral_gap(g, sp, X).gamma_hat
    assert spectral_gap(g, sp, c * X).gamma_hat == pytest.approx(a, rel=1e-12)


@pytest.mark.parametrize("d, N", [(3, 8), (4, 10)])
def test_random_regular_graphs(d, N):
    G = nx.random_regular_graph(d, N, seed=1)
    g = RegularGraph(N, tuple(G.edges()))
    assert g.degree == d
    X = np.random.default_rng(0).normal(size=(N, 2))
    lhs, rhs = _enumerated(g, X)
    r = spectral_gap(g, LpSpace(2, 2), X)
    assert r.lhs == pytest.approx(lhs) and r.rhs == pytest.approx(rhs)


def test_gap_in_tree_backend(rng):
    T = TreeSpace.star([1.0, 2.0, 0.5])
    r = spectral_gap(RegularGraph.complete(4), T, T.random_points(rng, 4))
    assert r.gamma_hat == pytest.approx(3 / 4)


@pytest.mark.parametrize(
    "N, edges",
    [
        (4, ((0, 1), (1, 2), (2, 3))),  # path: irregular
        (6, ((0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3))),  # disconnected
        (3, ((0, 0),)),
        (3, ((0, 1), (0, 1))),
        (3, ((0, 5),)),
    ],
)
def test_graph_validation(N, edges):
    with pytest.raises(ValueError):
        RegularGraph(N, edges)


def test_size_mismatch():
    with pytest.raises(ValueError):
        spectral_gap(RegularGraph.cycle(4), LpSpace(1, 2), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        relative_spectral_gap(RegularGraph.cycle(4), Partition.trivial(3), LpSpace(1, 2), np.zeros((4, 1)))


def test_search_gap_is_reproducible():
    g = RegularGraph.cycle(6)
    a, Xa = search_gap(g, LpSpace(1, 2), 30, seed=3)
    b, Xb = search_gap(g, LpSpace(1, 2), 30, seed=3)
    assert a.gamma_hat == b.gamma_hat and np.array_equal(Xa, Xb)
    # over real configurations the supremum is d/λ_2 with λ_2 = 2(1 − cos(2π/N))
    assert a.gamma_hat <= 2 / (2 * (1 - np.cos(2 * np.pi / 6))) + 1e-12


def test_graph_and_partition_files(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("4 2\n0 1\n1 2\n2 3\n3 0\n", encoding="utf-8")
    assert load_graph(p).degree == 2
    p.write_text("4 3\n0 1\n1 2\n2 3\n3 0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="degree"):
        load_graph(p)
    q = tmp_path / "part.txt"
    q.write_text("a a b b\n", encoding="utf-8")
    assert load_partition(q).blocks == ((0, 1), (2, 3))
