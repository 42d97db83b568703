import itertools
import math

import networkx as nx
import numpy as np
import pytest

from cotype_lab.cotype import BudgetExceeded
from cotype_lab.embeddings import (
    FiniteEmbedding,
    build_obstruction_function,
    cayley_bfs,
    certificate_value,
    grid_distortion_bound_value,
    grid_distortion_lower_bound,
    grid_space,
    make_trivial_embedding,
    moduli_envelope,
    obstruction_sweep,
    obstruction_union_space,
    p_alpha_bounds,
    psi_embedding,
    torus_metric,
    torus_space,
    verify_obstruction_identities,
    verify_torus_metric_bfs,
)
from cotype_lab.spaces import FiniteSpace, LpSpace


def test_grid_space_is_linf():
    G = grid_space(3, 2)
    assert G.size == 9
    i = G.labels.index((1, 1))
    j = G.labels.index((3, 2))
    assert G.D[i, j] == 2
    assert G.diameter() == 2
    with pytest.raises(BudgetExceeded):
        grid_space(10, 4)


def test_torus_metric_examples():
    assert torus_metric(3, 2, [0, 0], [5, 3]) == 3
    assert torus_metric(3, 2, [0, 0], [5, 1]) == 1
    with pytest.raises(ValueError):
        torus_metric(3, 2, [0, 6], [0, 0])


@pytest.mark.parametrize("m, n", [(1, 2), (2, 2), (3, 2), (2, 3)])
def test_torus_metric_matches_networkx(m, n):
    L = 2 * m
    G = nx.Graph()
    pts = list(itertools.product(range(L), repeat=n))
    gens = [g for g in itertools.product((-1, 0, 1), repeat=n) if any(g)]
    for x in pts:
        for g in gens:
            G.add_edge(x, tuple((a + b) % L for a, b in zip(x, g)))
    sp = torus_space(m, n)
    lengths = dict(nx.all_pairs_shortest_path_length(G))
    for a, x in enumerate(sp.labels):
        for b, y in enumerate(sp.labels):
            assert sp.D[a, b] == lengths[x][y]


@pytest.mark.parametrize("m, n", [(1, 3), (2, 2), (3, 3), (5, 5)])
def test_bfs_agreement(m, n):
    assert verify_torus_metric_bfs(m, n, sources=2, seed=1).passed


def test_cayley_bfs_distances():
    d = cayley_bfs(2, 1, 0)
    np.testing.assert_array_equal(d, [0, 1, 2, 1])


# ---------------------------------------------------------------- distortion


def _brute_distortion(D, img):
    N = len(D)
    r = [img[i, j] / D[i, j] for i in range(N) for j in range(i + 1, N)]
    if min(r) == 0:
        return math.inf
    return max(r) / min(r)


def test_distortion_matches_enumeration(rng):
    pts = rng.normal(size=(7, 2))
    D = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    table = rng.normal(size=(7, 3))
    emb = FiniteEmbedding(FiniteSpace(D), LpSpace(3, 2), table)
    img = np.linalg.norm(table[:, None] - table[None], axis=2)
    assert emb.distortion() == pytest.approx(_brute_distortion(D, img), rel=1e-12)
    assert emb.scaled(3.0).distortion() == pytest.approx(emb.distortion(), rel=1e-12)
    assert emb.expansion * emb.contraction == pytest.approx(emb.distortion(), rel=1e-12)


def test_non_injective_and_trivial_cases():
    D = np.array([[0, 1], [1, 0]], dtype=float)
    assert FiniteEmbedding(FiniteSpace(D), LpSpace(1, 2), [[0.0], [0.0]]).distortion() == math.inf
    assert FiniteEmbedding(FiniteSpace([[0.0]]), LpSpace(1, 2), [[0.0]]).distortion() == 1.0


@pytest.mark.parametrize("m, n, q", [(2, 4, 2.0), (3, 3, 3.0), (4, 2, 2.0)])
def test_trivial_embeddings(m, n, q):
    assert abs(make_trivial_embedding("Id", m, n, q).distortion() - n ** (1 / q)) <= 1e-12
    assert make_trivial_embedding("Forget", m, n, q).distortion() == grid_space(m, n).diameter()


def test_unknown_trivial_embedding():
    with pytest.raises(ValueError):
        make_trivial_embedding("Other", 2, 2, 2.0)


@pytest.mark.parametrize("m", range(1, 21))
def test_psi_distortion_at_most_two(m):
    psi = psi_embedding(m)
    assert psi.distortion() <= 2.0
    assert len(set(psi.refs)) == len(psi.refs)


def test_psi_small_cases():
    assert psi_embedding(2).distortion() == 1.0
    assert psi_embedding(3).refs == [0, 1, 2]
    # the ℓ_∞ product of cycle embeddings has the cycle's distortion
    p = psi_embedding(4, n=2)
    assert p.embedding.distortion() == pytest.approx(p.cycle_distortion)


@pytest.mark.parametrize("m, n, q", [(2, 4, 2.0), (3, 3, 3.0)])
def test_grid_lower_bound(m, n, q):
    psi = psi_embedding(m).cycle_distortion
    gb = grid_distortion_lower_bound(m, n, q, psi, 2.0)
    nq = n ** (1 / q)
    assert abs(gb.bound - nq * m / (psi * (4 * nq + 2 * m))) <= 1e-12
    assert gb.bound == grid_distortion_bound_value(m, n, q, psi, 2.0)
    assert gb.bound <= make_trivial_embedding("Id", m, n, q).distortion()
    assert gb.bound <= make_trivial_embedding("Forget", m, n, q).distortion()


def test_p_alpha_interval():
    r = p_alpha_bounds(2, 16, 4.0)
    assert r.upper == 2.0 and r.lower <= r.upper
    r = p_alpha_bounds(3, 10**6, 2.0)
    assert r.upper == pytest.approx(math.log(10**6) / math.log(2))
    assert r.lower <= r.upper
    with pytest.raises(ValueError):
        p_alpha_bounds(2, 4, 1.5)


# ---------------------------------------------------------------- obstruction


@pytest.mark.parametrize("p, n, m, mode", [(3.0, 4, 2, "full"), (3.0, 9, 3, "sampled"), (2.0, 2, 5, "full")])
def test_obstruction_identities(p, n, m, mode):
    f = build_obstruction_function(p, n, m)
    c = verify_obstruction_identities(f, samples=4096, seed=2)
    assert c.mode == mode
    assert c.passed(1e-12)
    assert c.shift_distance == pytest.approx(2 * m * n ** (-1 / p))
    assert c.step_distance <= math.pi


def test_obstruction_to_torus_values():
    f = build_obstruction_function(3.0, 2, 2)
    T = f.to_torus()
    assert T.size == 16
    np.testing.assert_allclose(T([1, 0]), f([1, 0]))


def test_union_space_clusters():
    U = obstruction_union_space((1, 2), p=3.0)
    assert len(U.clusters) == 2
    # antipodal in every coordinate: diameter 2m
    np.testing.assert_allclose(U.diams, [2.0, 4.0], rtol=1e-12)
    # one-coordinate antipode: 2m·n^{-1/p} with n = m²
    assert U.distance([1, 0], [1, 2]) == pytest.approx(2 * 2 * 4 ** (-1 / 3))


def test_envelope_semantics():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    emb = FiniteEmbedding(FiniteSpace(D), LpSpace(1, 2), [[0.0], [3.0], [4.0]])
    env = moduli_envelope(emb)
    assert env.omega_at(2.0) == 4.0
    assert env.omega_at(1.0) == 1.0
    assert env.Omega_at(1.0) == 3.0
    assert env.omega_at(5.0) == math.inf


def test_sweep_monotone():
    pts, slope = obstruction_sweep(2.0, 3.0)
    vals = [p.value for p in pts]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert slope == pytest.approx(1 / 2 - 1 / 3)
    assert vals[0] == certificate_value(2.0, 3.0, 1, 1.0) == 2.0
    assert all(p.holds for p in pts if p.holds is not None)
