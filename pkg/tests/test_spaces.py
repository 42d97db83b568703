import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cotype_lab.spaces import (
    DisjointUnion,
    FiniteSpace,
    LpSpace,
    MetricError,
    PythagoreanProduct,
    SnowflakeSpace,
    TreeSpace,
    UnsupportedOperation,
    WassersteinSpace,
    build_space,
    cat0_quadruple_check,
    load_finite_matrix,
    midpoint,
    verify_metric_axioms,
)

from conftest import tree_from_prufer


# ---------------------------------------------------------------- ℓ_p


def test_lp_distance_examples():
    assert LpSpace(2, 3).distance([0, 0], [1, 1]) == pytest.approx(2 ** (1 / 3), rel=1e-15)
    assert LpSpace(3, math.inf).distance([0, 0, 0], [1, -4, 2]) == 4.0
    assert LpSpace(2, 1).distance([0, 0], [1, -1]) == 2.0


def test_complex_lp_treats_pairs_as_moduli():
    sp = LpSpace(4, 3, block=2)
    # entries (3+4i, 0) against the origin
    assert sp.distance([3, 4, 0, 0], [0, 0, 0, 0]) == pytest.approx(5.0, rel=1e-15)


def test_lp_rejects_bad_width():
    with pytest.raises(ValueError):
        LpSpace(3, 2).distance([0, 0], [1, 1])


def test_lp_midpoint_is_average():
    np.testing.assert_array_equal(midpoint(LpSpace(2, 2), [0, 2], [2, 4]), [1, 3])


# ---------------------------------------------------------------- finite


def test_finite_rejects_triangle_violation_with_triple():
    D = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(MetricError) as exc:
        FiniteSpace(D)
    assert exc.value.triple == (0, 1, 2)


@pytest.mark.parametrize(
    "D",
    [
        [[0, 1], [2, 0]],  # asymmetric
        [[1, 1], [1, 0]],  # nonzero diagonal
        [[0, 0], [0, 0]],  # distinct points at distance 0
        [[0, np.inf], [np.inf, 0]],
    ],
)
def test_finite_rejects_non_metrics(D):
    with pytest.raises(MetricError):
        FiniteSpace(D)


def test_finite_distances_and_axioms():
    D = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    sp = FiniteSpace(D)
    assert sp.distance([0], [2]) == 2
    assert sp.diameter() == 2
    rep = verify_metric_axioms(sp)
    assert rep.ok and rep.triples == 27


def test_finite_has_no_midpoints():
    with pytest.raises(UnsupportedOperation):
        midpoint(FiniteSpace([[0, 1], [1, 0]]), [0], [1])


def test_load_finite_matrix(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("3\n0,1,2\n1,0,1\n2,1,0\n", encoding="utf-8")
    assert FiniteSpace(load_finite_matrix(p)).size == 3
    p.write_text("3\n0,1,2\n1,0\n2,1,0\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":3:"):
        load_finite_matrix(p)


# ---------------------------------------------------------------- trees


def _tree_oracle(T: TreeSpace, x, y) -> float:
    """Shortest path in the tree subdivided at the two points."""
    G = nx.Graph()
    for e in range(T.n_edges):
        G.add_edge(int(T.eu[e]), int(T.ev[e]), weight=float(T.elen[e]))
    for name, (e, o) in (("x", x), ("y", y)):
        e = int(e)
        G.add_edge(name, int(T.eu[e]), weight=float(o))
        G.add_edge(name, int(T.ev[e]), weight=float(T.elen[e] - o))
    if int(x[0]) == int(y[0]):
        G.add_edge("x", "y", weight=abs(float(x[1] - y[1])))
    return nx.shortest_path_length(G, "x", "y", weight="weight")


def test_tree_basic_distance():
    T = TreeSpace([("a", "b", 1.0), ("b", "c", 2.0)])
    assert T.distance(T.vertex("a"), T.vertex("c")) == 3.0
    np.testing.assert_allclose(T.midpoints(T.vertex("a")[None], T.vertex("c")[None]), [[1.0, 0.5]])


@pytest.mark.parametrize(
    "edges",
    [
        [("a", "b", 1.0), ("b", "a", 1.0)],  # not a tree
        [("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)],
        [("a", "b", 1.0), ("c", "d", 1.0), ("d", "e", 1.0), ("e", "c", 1.0)],
        [("a", "b", 0.0)],
        [("a", "a", 1.0)],
    ],
)
def test_tree_rejects_bad_edge_lists(edges):
    with pytest.raises(MetricError):
        TreeSpace(edges)


def test_tree_rejects_offsets_outside_edge():
    T = TreeSpace.path([1.0, 1.0])
    with pytest.raises(ValueError):
        T.distance([0, 1.5], [1, 0])
    with pytest.raises(ValueError):
        T.distance([2, 0.0], [1, 0])


@given(st.lists(st.integers(0, 6), min_size=0, max_size=6), st.integers(0, 2**31))
def test_tree_distance_matches_graph_oracle(code, seed):
    rng = np.random.default_rng(seed)
    T = TreeSpace(tree_from_prufer(code, rng.uniform(0.1, 2.0, size=len(code) + 1)))
    X = T.random_points(rng, 6)
    Y = T.random_points(rng, 6)
    got = T.distances(X, Y)
    want = [_tree_oracle(T, x, y) for x, y in zip(X, Y)]
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


@given(st.lists(st.integers(0, 7), min_size=0, max_size=6), st.integers(0, 2**31), st.floats(0, 1))
def test_tree_interpolation_is_geodesic(code, seed, t):
    rng = np.random.default_rng(seed)
    T = TreeSpace(tree_from_prufer(code, rng.uniform(0.1, 2.0, size=len(code) + 1)))
    X = T.random_points(rng, 5)
    Y = T.random_points(rng, 5)
    Z = T.interpolate(X, Y, t)
    d = T.distances(X, Y)
    np.testing.assert_allclose(T.distances(X, Z), t * d, atol=1e-12)
    np.testing.assert_allclose(T.distances(Z, Y), (1 - t) * d, atol=1e-12)


@given(st.lists(st.integers(0, 7), min_size=0, max_size=6), st.integers(0, 2**31))
def test_trees_up_to_eight_vertices_are_npc(code, seed):
    rng = np.random.default_rng(seed)
    T = TreeSpace(tree_from_prufer(code, rng.uniform(0.1, 2.0, size=len(code) + 1)))
    pts = T.random_points(rng, 3 * 10)
    for x, y, z in pts.reshape(10, 3, 2):
        assert cat0_quadruple_check(T, x, y, z, tol=1e-10).nonpositive_curvature


def test_hilbert_quadruple_is_equality(rng):
    sp = LpSpace(3, 2)
    x, y, z = rng.normal(size=(3, 3))
    r = cat0_quadruple_check(sp, x, y, z)
    assert abs(r.slack) <= 1e-12


def test_l1_fails_npc():
    sp = LpSpace(2, 1)
    r = cat0_quadruple_check(sp, [1, 0], [0, 1], [1, 1])
    assert not r.nonpositive_curvature


# ---------------------------------------------------------------- derived spaces


def test_snowflake_powers_distances(rng):
    base = LpSpace(2, 2)
    sp = SnowflakeSpace(base, 0.5)
    X, Y = rng.normal(size=(2, 10, 2))
    np.testing.assert_allclose(sp.distances(X, Y), np.sqrt(base.distances(X, Y)), rtol=1e-15)
    assert verify_metric_axioms(sp, 500, seed=1).ok
    with pytest.raises(ValueError):
        SnowflakeSpace(base, 1.5)


def test_disjoint_union_cross_distance():
    a = FiniteSpace([[0, 1], [1, 0]])
    b = FiniteSpace([[0, 3], [3, 0]])
    U = DisjointUnion([a, b])
    assert U.distance([0, 0], [0, 1]) == 1
    assert U.distance([1, 0], [1, 1]) == 3
    assert U.distance([0, 1], [1, 0]) == 3
    assert verify_metric_axioms(U).ok


def test_pythagorean_product(rng):
    T = TreeSpace.path([1.0])
    sp = PythagoreanProduct([LpSpace(2, 1), T])
    x = np.array([0.0, 0.0, 0.0, 0.0])
    y = np.array([1.0, 2.0, 0.0, 1.0])
    assert sp.distance(x, y) == pytest.approx(math.sqrt(9 + 1))
    sp2 = PythagoreanProduct([LpSpace(1, 2), T])
    np.testing.assert_allclose(midpoint(sp2, [0, 0, 0], [2, 0, 1]), [1, 0, 0.5])


# ---------------------------------------------------------------- Wasserstein


def _brute_transport(a, b, C):
    """Minimum over basic feasible solutions of the transportation polytope."""
    r, c = len(a), len(b)
    cells = [(i, j) for i in range(r) for j in range(c)]
    # row sums and all but the last column sum (that one is implied)
    rhs = np.concatenate([a, b[:-1]])
    best = math.inf
    for S in itertools.combinations(range(r * c), r + c - 1):
        M = np.zeros((r + c - 1, r + c - 1))
        for col, k in enumerate(S):
            i, j = cells[k]
            M[i, col] = 1
            if j < c - 1:
                M[r + j, col] = 1
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, rhs)
        if np.all(x >= -1e-12):
            best = min(best, sum(x[t] * C[cells[k]] for t, k in enumerate(S)))
    return best


@pytest.mark.parametrize("seed", range(6))
def test_wasserstein_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(5, 2))
    D = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    W = WassersteinSpace(FiniteSpace(D), p=2.0)
    sa = rng.choice(5, size=rng.integers(2, 5), replace=False)
    sb = rng.choice(5, size=rng.integers(2, 5), replace=False)
    a = np.zeros(5)
    b = np.zeros(5)
    a[sa] = rng.dirichlet(np.ones(len(sa)))
    b[sb] = rng.dirichlet(np.ones(len(sb)))
    a /= a.sum()
    b /= b.sum()
    want = _brute_transport(a[sa], b[sb], D[np.ix_(sa, sb)] ** 2)
    assert W.transport_cost(a, b) == pytest.approx(want, rel=1e-7, abs=1e-10)


def test_wasserstein_diracs_recover_base():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    W = WassersteinSpace(FiniteSpace(D), p=2)
    assert W.distance(W.dirac(0), W.dirac(2)) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        W.distance([0.5, 0.6, 0], W.dirac(0))


def test_wasserstein_axioms_sampled():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    assert verify_metric_axioms(WassersteinSpace(FiniteSpace(D), p=1), 60, seed=3).ok


# ---------------------------------------------------------------- spec strings


def test_build_space_grammar(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("2\n0,1\n1,0\n", encoding="utf-8")
    t = tmp_path / "t.txt"
    t.write_text("a b 1\nb c 2\n", encoding="utf-8")
    assert isinstance(build_space("l2:3"), LpSpace) and build_space("l2:3").width == 3
    assert build_space("linf:2").p == math.inf
    assert build_space("c3:2").width == 4
    assert isinstance(build_space(f"finite:{m}"), FiniteSpace)
    assert isinstance(build_space(f"tree:{t}"), TreeSpace)
    s = build_space("snow:0.5:l1:3")
    assert isinstance(s, SnowflakeSpace) and s.theta == 0.5
    assert isinstance(build_space(f"wass:2:{m}"), WassersteinSpace)
    u = build_space(f"union:finite:{m},finite:{m}")
    assert isinstance(u, DisjointUnion) and len(u.clusters) == 2
    p = build_space("pyth:[l2:2],[snow:0.5:l1:1]")
    assert isinstance(p, PythagoreanProduct) and p.width == 3
    with pytest.raises(ValueError):
        build_space("banana")
