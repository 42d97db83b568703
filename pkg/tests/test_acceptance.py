"""Acceptance criteria: one recorded PASS/FAIL line per criterion, with its tolerance."""

import itertools
import math
import time

import numpy as np
import pytest

from cotype_lab.cotype import (
    check_equivalence_chain,
    decompose_main_proof,
    make_torus_function,
    random_family,
    subset_coefficient,
    verify_main_inequality,
)
from cotype_lab.embeddings import (
    build_obstruction_function,
    grid_space,
    grid_distortion_lower_bound,
    make_trivial_embedding,
    obstruction_sweep,
    psi_embedding,
    verify_obstruction_identities,
    verify_torus_metric_bfs,
)
from cotype_lab.graphgap import RegularGraph, spectral_gap
from cotype_lab.martingales import (
    build_cube_martingale,
    check_monotonicity,
    check_pisier,
    check_translation_identity_all,
    torus_cube_indices,
)
from cotype_lab.measures import LinearMean, TreeMean2, endgame_scan, estimate_beta, sample_rng, two_point_bound_check
from cotype_lab.spaces import LpSpace, TreeSpace


def random_tree(seed: int, vertices: int = 8) -> TreeSpace:
    rng = sample_rng(seed, 10**6)
    edges = [(str(int(rng.integers(0, v))), str(v), float(rng.uniform(0.2, 2.0))) for v in range(1, vertices)]
    return TreeSpace(edges)


def test_c1_hilbert_pisier_equality(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for k in range(200):
        rng = sample_rng(1, k)
        n, d = int(rng.integers(1, 9)), int(rng.integers(1, 5))
        sp = LpSpace(d, 2)
        mart = build_cube_martingale(sp, LinearMean(), rng.normal(size=(2**n, d)))
        r = check_pisier(mart, rng.normal(size=d), 2.0, 1.0)
        rel = abs(r.slack) / r.rhs
        worst = max(worst, rel)
        ok &= abs(r.slack) <= 1e-9 * r.rhs
    dt = time.perf_counter() - t0
    ok &= dt < 10
    acceptance("C1", ok, f"200 martingales, max |slack|/RHS = {worst:.2e} (tol 1e-9), limit 10 s", dt)
    assert ok


def test_c2_theorem_constant(acceptance):
    t0 = time.perf_counter()
    fails = {"l2": 0, "tree": 0, "l3": 0}
    suites = [
        ("l2", 100, lambda k: LpSpace(3, 2), 2.0, 1.0, 1e-9),
        ("tree", 50, lambda k: random_tree(k), 2.0, 1.0, 1e-6),
        ("l3", 50, lambda k: LpSpace(3, 3), 3.0, 2.0, 1e-9),
    ]
    for name, count, make_space, q, beta, rel in suites:
        for k in range(count):
            n, m = (2, 3, 4)[k % 3], (2, 4)[(k // 3) % 2]
            f = make_torus_function(n, m, make_space(k), seed=1000 + k)
            r = verify_main_inequality(f, q, beta, rel=rel)
            fails[name] += r.lhs > r.bound * r.rhs_sign + rel * r.rhs_sign
    dt = time.perf_counter() - t0
    ok = sum(fails.values()) == 0 and dt < 60
    acceptance("C2", ok, f"failures {fails} (l2 100, tree 50 tol 1e-6, l3 50), limit 60 s", dt)
    assert ok


def test_c3_proof_decomposition(acceptance):
    t0 = time.perf_counter()
    bad = 0
    fams = [(LpSpace(3, 2), random_family(LpSpace(3, 2), 2, 1, 20, seed=3))]
    fams += [(T, random_family(T, 2, 1, 1, seed=k)) for k, T in enumerate(random_tree(50 + k) for k in range(10))]
    total = 0
    for sp, fam in fams:
        for f in fam:
            r = decompose_main_proof(f, 2.0, 1.0)
            total += 1
            bad += not all(r.checks[c]["pass"] for c in ("triangle_split", "first_term", "second_term"))
    dt = time.perf_counter() - t0
    ok = bad == 0 and total == 30 and dt < 30
    acceptance("C3", ok, f"{total} functions on Z_4^2, {bad} with a failed sub-inequality (rel 1e-9), limit 30 s", dt)
    assert ok


def _monotonicity_violations(f, bmap, tol):
    idx = torus_cube_indices(f)
    refs = f.values
    bad = checked = 0
    for x in range(f.size):
        mart = build_cube_martingale(f.space, bmap, f.values[idx[x]])
        for z in refs:
            checked += 1
            bad += not check_monotonicity(mart, z, 2.0, tol=tol).passed
    return bad, checked


def test_c4_monotonicity_and_translation(acceptance):
    t0 = time.perf_counter()
    rows = []
    for label, spaces, bmap, tol in (
        ("l2", [LpSpace(3, 2)] * 3, LinearMean(), 1e-12),
        ("tree", [random_tree(70 + k) for k in range(2)], TreeMean2(), 1e-6),
    ):
        for k, sp in enumerate(spaces):
            f = make_torus_function(3, 2, sp, seed=200 + k)
            mb, mc = _monotonicity_violations(f, bmap, tol)
            tr = check_translation_identity_all(f, bmap, tol=tol)
            rows.append((label, mb, mc, tr.violations, tr.checked))
    dt = time.perf_counter() - t0
    mono = sum(r[1] for r in rows)
    trans = sum(r[3] for r in rows)
    ok = mono == 0 and trans == 0
    acceptance(
        "C4", ok,
        f"n=3 m=2: monotonicity {mono}/{sum(r[2] for r in rows)}, translation {trans}/{sum(r[4] for r in rows)} violations "
        "(l2 1e-12, tree 1e-6)", dt,
    )
    assert ok


def test_c5_beta_estimates(acceptance):
    t0 = time.perf_counter()
    b2 = estimate_beta(LpSpace(3, 2), LinearMean(), 2.0, samples=500, seed=5)
    bt = max(estimate_beta(random_tree(90 + k), TreeMean2(), 2.0, samples=500, seed=6 + k).beta_hat for k in range(2))
    b3 = estimate_beta(LpSpace(3, 3), LinearMean(), 3.0, samples=500, seed=7)
    dt = time.perf_counter() - t0
    ok = abs(b2.beta_hat - 1) <= 1e-9 and bt <= 1 + 1e-6 and b3.beta_hat <= 2 + 1e-6 and b2.used >= 500 and dt < 30
    acceptance(
        "C5", ok,
        f"l2 {b2.beta_hat:.12f} in 1±1e-9, tree {bt:.9f} <= 1+1e-6, l3 {b3.beta_hat:.6f} <= 2+1e-6, 500 samples each, limit 30 s",
        dt,
    )
    assert ok


def test_c6_grid_distortions(acceptance):
    t0 = time.perf_counter()
    ok = True
    parts = []
    for m, n, q in ((2, 4, 2.0), (3, 3, 3.0)):
        did = make_trivial_embedding("Id", m, n, q).distortion()
        dfo = make_trivial_embedding("Forget", m, n, q).distortion()
        beta = 2.0  # 2·K_q for an ℓ_q target
        psi = psi_embedding(m).cycle_distortion
        gb = grid_distortion_lower_bound(m, n, q, psi, beta)
        nq = n ** (1 / q)
        closed = nq * m / (psi * (4 * nq + beta * m))
        ok &= abs(did - nq) <= 1e-12
        ok &= dfo == grid_space(m, n).diameter()
        ok &= abs(gb.bound - closed) <= 1e-12 and gb.bound <= min(did, dfo)
        parts.append(f"({m},{n},{q:g}) Id {did:.6f} Forget {dfo:g} bound {gb.bound:.6f}")
    dt = time.perf_counter() - t0
    acceptance("C6", ok, "; ".join(parts) + " (tol 1e-12)", dt)
    assert ok


def test_c7_psi_and_bfs(acceptance):
    t0 = time.perf_counter()
    worst = max(psi_embedding(m).cycle_distortion for m in range(2, 21))
    cases = [(m, n) for m in range(1, 9) for n in range(1, 9) if (2 * m) ** n <= 10**5]
    bfs_ok = all(verify_torus_metric_bfs(m, n, sources=2, seed=m * 10 + n).passed for m, n in cases)
    dt = time.perf_counter() - t0
    ok = worst <= 2 and bfs_ok
    acceptance("C7", ok, f"max psi distortion m=2..20 = {worst:.6f} <= 2; BFS agrees on {len(cases)} tori up to 1e5 points", dt)
    assert ok


def test_c8_equivalence(acceptance):
    t0 = time.perf_counter()
    coeffs = {}
    for n in range(1, 11):
        brute = sum(2 ** len(A) for r in range(n + 1) for A in itertools.combinations(range(n), r) if 0 in A)
        coeffs[n] = brute
    coeff_ok = all(coeffs[n] == subset_coefficient(n) for n in coeffs)
    sp = LpSpace(3, 2)
    rep = check_equivalence_chain(sp, 2.0, 2, 1, random_family(sp, 2, 1, 50, seed=8))
    dt = time.perf_counter() - t0
    ok = coeff_ok and rep.passed
    failed = {k: v["failed"] for k, v in rep.per_function.items()}
    acceptance("C8", ok, f"coefficients {list(coeffs.values())}; per-function failures {failed}; chains pass {rep.passed}", dt)
    assert ok


def test_c9_endgame_and_two_point(acceptance):
    t0 = time.perf_counter()
    e15 = endgame_scan(1.5, 1.0)
    e2 = endgame_scan(2.0, 1.0)
    backends = [
        ("l2", LpSpace(3, 2), LinearMean(), 2.0),
        ("l3", LpSpace(3, 3), LinearMean(), 3.0),
        ("tree", random_tree(11), TreeMean2(), 2.0),
    ]
    tp = {name: two_point_bound_check(sp, bm, q, pairs=200, seed=9).passed for name, sp, bm, q in backends}
    dt = time.perf_counter() - t0
    witness_ok = e15.witness is not None and 0 < e15.witness <= 0.1
    ok = witness_ok and e2.max_abs_slack <= 1e-12 and all(tp.values())
    acceptance("C9", ok, f"q=1.5 witness s={e15.witness}; q=2 max |slack| {e2.max_abs_slack:.1e} (tol 1e-12); two-point {tp}", dt)
    assert ok


def test_c10_spectral_gaps(acceptance):
    t0 = time.perf_counter()
    errs = []
    for N in range(3, 7):
        g = RegularGraph.complete(N)
        for k in range(20):
            X = sample_rng(N, k).normal(size=(N, 1))
            errs.append(abs(spectral_gap(g, LpSpace(1, 2), X).gamma_hat - (N - 1) / N))
    tri = spectral_gap(RegularGraph.cycle(3), LpSpace(1, 2), [[0.0], [0.0], [1.0]])
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-12 and tri.gamma_hat == 2 / 3
    acceptance("C10", ok, f"K_N N=3..6 max error {max(errs):.1e} (tol 1e-12); 3-cycle {tri.gamma_hat!r}", dt)
    assert ok


def test_c11_obstruction(acceptance):
    t0 = time.perf_counter()
    checks = {(p, n, m): verify_obstruction_identities(build_obstruction_function(p, n, m)) for p, n, m in ((3.0, 4, 2), (3.0, 9, 3))}
    pts, slope = obstruction_sweep(q=2.0, p=3.0, ns=(1, 4, 9, 16))
    vals = [c.value for c in pts]
    monotone = all(b > a for a, b in zip(vals, vals[1:]))
    dt = time.perf_counter() - t0
    ok = all(c.passed(1e-12) for c in checks.values()) and monotone
    desc = ", ".join(f"{k[1:]} {c.mode} err {max(c.max_shift_error, c.max_step_error):.1e}" for k, c in checks.items())
    acceptance("C11", ok, f"{desc} (tol 1e-12); sweep {[round(v, 6) for v in vals]} slope {slope:.4f}", dt)
    assert ok
