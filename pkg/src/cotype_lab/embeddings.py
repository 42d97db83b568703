"""Grids, discrete tori and bi-Lipschitz distortion."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cotype import BudgetExceeded, TorusFunction
from .measures import sample_rng
from .spaces import DisjointUnion, FiniteSpace, LpSpace, MetricSpace

MAX_GRID_POINTS = 4096
MAX_PAIR_COUNT = 2 * 10**7
MAX_BFS_POINTS = 10**6


def _mixed_radix(base: int, n: int) -> np.ndarray:
    N = base**n
    return (np.arange(N, dtype=np.int64)[:, None] // base ** np.arange(n, dtype=np.int64)) % base


def _linf_matrix(C: np.ndarray) -> np.ndarray:
    if C.shape[1] == 0:
        return np.zeros((C.shape[0], C.shape[0]))
    return np.max(np.abs(C[:, None, :] - C[None, :, :]), axis=2).astype(np.float64)


def grid_space(m: int, n: int) -> FiniteSpace:
    """``[m]_∞^n = {1,…,m}^n`` under the max-coordinate metric."""
    if m < 1 or n < 1:
        raise ValueError("need m, n >= 1")
    if m**n > MAX_GRID_POINTS:
        raise BudgetExceeded(f"grid has {m**n} points, cap is {MAX_GRID_POINTS}")
    C = _mixed_radix(m, n) + 1
    return FiniteSpace(_linf_matrix(C), labels=[tuple(int(v) for v in c) for c in C], coords=C, check=False)


def cycle_distance(a, b, L: int):
    d = np.abs(np.asarray(a) - np.asarray(b)) % L
    return np.minimum(d, L - d)


def torus_metric(m: int, n: int, x, y) -> int:
    """Max over coordinates of the cycle distance on ``Z_{2m}``."""
    L = 2 * m
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != (n,) or y.shape != (n,):
        raise ValueError(f"points must have {n} coordinates")
    if np.any((x < 0) | (x >= L) | (y < 0) | (y >= L)):
        raise ValueError(f"coordinates must lie in 0..{L - 1}")
    return int(np.max(cycle_distance(x, y, L))) if n else 0


def torus_space(m: int, n: int) -> FiniteSpace:
    L = 2 * m
    if L**n > MAX_GRID_POINTS:
        raise BudgetExceeded(f"torus has {L**n} points, cap is {MAX_GRID_POINTS}")
    C = _mixed_radix(L, n)
    D = np.max(cycle_distance(C[:, None, :], C[None, :, :], L), axis=2).astype(np.float64)
    return FiniteSpace(D, labels=[tuple(int(v) for v in c) for c in C], coords=C, check=False)


def cayley_bfs(m: int, n: int, source: int = 0) -> np.ndarray:
    """Graph distances from ``source`` in the Cayley graph of ``Z_{2m}^n`` with
    generators ``{−1,0,1}^n``, by level-synchronous BFS."""
    L = 2 * m
    N = L**n
    if N > MAX_BFS_POINTS:
        raise BudgetExceeded(f"torus has {N} points, cap is {MAX_BFS_POINTS}")
    # the generator set is the unit box, so one BFS step is a dilation by ±1
    # along each axis in turn
    shape = (L,) * n
    seen = np.zeros(N, dtype=bool)
    seen[source] = True
    seen = seen.reshape(shape)
    dist = np.full(shape, -1, dtype=np.int64)
    dist.flat[source] = 0
    frontier = seen.copy()
    level = 0
    while True:
        reach = frontier
        for ax in range(n):
            reach = reach | np.roll(reach, 1, axis=ax) | np.roll(reach, -1, axis=ax)
        frontier = reach & ~seen
        if not frontier.any():
            break
        level += 1
        dist[frontier] = level
        seen |= frontier
    return dist.ravel()


@dataclass
class BfsAgreement:
    sources: int
    points: int
    mismatches: int

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def verify_torus_metric_bfs(m: int, n: int, sources: int = 3, seed: int = 0) -> BfsAgreement:
    L = 2 * m
    N = L**n
    coords = _mixed_radix(L, n)
    rng = sample_rng(seed, 0)
    picks = [0] + [int(s) for s in rng.integers(0, N, size=max(0, sources - 1))]
    bad = 0
    for s in picks:
        bfs = cayley_bfs(m, n, s)
        direct = np.max(cycle_distance(coords, coords[s], L), axis=1) if n else np.zeros(1, dtype=np.int64)
        bad += int(np.count_nonzero(bfs != direct))
    return BfsAgreement(len(picks), N, bad)


# --------------------------------------------------------------------------
# finite embeddings
# --------------------------------------------------------------------------


class FiniteEmbedding:
    """A map from a finite space (given by its distance matrix) into a codomain."""

    def __init__(self, domain: FiniteSpace, codomain: MetricSpace, table, name: str = ""):
        self.domain = domain
        self.codomain = codomain
        T = codomain.as_batch(table)
        if T.shape[0] != domain.size:
            raise ValueError("one image point per domain point required")
        self.table = T
        self.name = name
        self._cache = None

    def scaled(self, c: float) -> FiniteEmbedding:
        if not isinstance(self.codomain, LpSpace):
            raise ValueError("scaling needs a normed codomain")
        return FiniteEmbedding(self.domain, self.codomain, c * self.table, self.name)

    def pair_distances(self) -> tuple[np.ndarray, np.ndarray]:
        """Domain and image distances over all unordered distinct pairs."""
        N = self.domain.size
        if N * (N - 1) // 2 > MAX_PAIR_COUNT:
            raise BudgetExceeded(f"{N} points give too many pairs")
        i, j = np.triu_indices(N, k=1)
        dom = self.domain.D[i, j]
        img = np.empty(i.size)
        step = 1 << 16
        for s in range(0, i.size, step):
            img[s : s + step] = self.codomain.distances(self.table[i[s : s + step]], self.table[j[s : s + step]])
        return dom, img

    def _stats(self):
        if self._cache is None:
            dom, img = self.pair_distances()
            if dom.size == 0:
                self._cache = (1.0, 1.0, 1.0)
            elif np.any(img == 0):
                self._cache = (float(np.max(img / dom)), math.inf, math.inf)
            else:
                r = img / dom
                hi, lo = float(r.max()), float(r.min())
                # hi/lo equals expansion·contraction and stays exact when all ratios agree
                self._cache = (hi, 1.0 / lo, hi / lo)
        return self._cache

    @property
    def expansion(self) -> float:
        return self._stats()[0]

    @property
    def contraction(self) -> float:
        return self._stats()[1]

    def distortion(self) -> float:
        return self._stats()[2]


def distortion(emb: FiniteEmbedding) -> float:
    return emb.distortion()


def make_trivial_embedding(kind: str, m: int, n: int, q: float) -> FiniteEmbedding:
    """``Id``: the grid inside ``ℓ_q^n``.  ``Forget``: grid points to scaled
    simplex vertices ``2^{−1/q} e_j`` in ``ℓ_q^{m^n}`` (pairwise image distance 1)."""
    G = grid_space(m, n)
    key = kind.lower()
    if key == "id":
        if not math.isfinite(q):
            raise ValueError("Id embedding needs a finite q")
        return FiniteEmbedding(G, LpSpace(n, q), G.coords.astype(np.float64), "Id")
    if key == "forget":
        N = G.size
        scale = 1.0 if math.isinf(q) else 2.0 ** (-1.0 / q)
        return FiniteEmbedding(G, LpSpace(N, q), scale * np.eye(N), "Forget")
    raise ValueError(f"unknown trivial embedding {kind!r}")


def cycle_refs(m: int, extra: bool) -> list[int]:
    refs = [0, m // 2]
    if extra:
        refs.append((m + 1) // 2)
    return list(dict.fromkeys(refs))


def _cycle_image(m: int, refs) -> np.ndarray:
    s = np.arange(2 * m)
    return np.stack([cycle_distance(s, r, 2 * m) for r in refs], axis=1).astype(np.float64)


def _cycle_distortion(m: int, refs) -> float:
    cyc = torus_space(m, 1)
    return FiniteEmbedding(cyc, LpSpace(len(refs), math.inf), _cycle_image(m, refs)).distortion()


@dataclass
class PsiEmbedding:
    m: int
    n: int
    refs: list
    cycle_distortion: float
    embedding: FiniteEmbedding | None = field(repr=False, default=None)

    def image(self, x) -> np.ndarray:
        """ψ(x) in ``{0,…,m}^{kn}`` with k = len(refs)."""
        x = np.asarray(x, dtype=np.int64)
        return np.concatenate([cycle_distance(xi, np.array(self.refs), 2 * self.m) for xi in x]).astype(np.float64)

    def distortion(self) -> float:
        return self.embedding.distortion() if self.embedding is not None else self.cycle_distortion


def psi_embedding(m: int, n: int = 1, target: float = 2.0) -> PsiEmbedding:
    """Coordinatewise cycle embedding ``s ↦ (d(s, 0), d(s, ⌊m/2⌋))`` of
    ``Z_{2m}^n`` into ``ℓ_∞``; a third reference ``⌈m/2⌉`` is added when the
    single-cycle distortion exceeds ``target``.  The product uses the max
    over coordinates on both sides, so its distortion equals the cycle's."""
    if m < 1:
        raise ValueError("m must be >= 1")
    refs = cycle_refs(m, False)
    dist = _cycle_distortion(m, refs)
    if dist > target:
        refs = cycle_refs(m, True)
        dist = _cycle_distortion(m, refs)
    emb = None
    if (2 * m) ** n <= MAX_GRID_POINTS:
        T = torus_space(m, n)
        table = np.stack([np.concatenate([cycle_distance(c, np.array(refs), 2 * m) for c in x]) for x in T.coords])
        emb = FiniteEmbedding(T, LpSpace(len(refs) * n, math.inf), table.astype(np.float64), "psi")
    return PsiEmbedding(m, n, refs, dist, emb)


@dataclass
class GridBound:
    m: int
    n: int
    q: float
    psi_dist: float
    beta: float
    bound: float
    asymptote: float


def grid_distortion_bound_value(m: int, n: int, q: float, psi_dist: float, beta: float) -> float:
    nq = n ** (1.0 / q)
    return nq * m / (psi_dist * (4 * nq + beta * m))


def grid_distortion_lower_bound(m: int, n: int, q: float, psi_dist: float, beta: float) -> GridBound:
    """Explicit-constant lower bound ``n^{1/q} m / (ψ·(4n^{1/q} + βm))`` and
    the asymptotic answer ``min{n^{1/q}, m}``."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if psi_dist < 1 or beta <= 0:
        raise ValueError("need psi_dist >= 1 and beta > 0")
    return GridBound(m, n, q, psi_dist, beta, grid_distortion_bound_value(m, n, q, psi_dist, beta), min(n ** (1.0 / q), m))


@dataclass
class PAlpha:
    m: int
    n: int
    alpha: float
    upper: float
    lower: float
    bound_at_lower: float


def p_alpha_bounds(m: int, n: int, alpha: float, beta: float = 2.0, psi_dist: float | None = None, p_max: float = 64.0, steps: int = 4096) -> PAlpha:
    """Interval for ``p_α([m]_∞^n)``.

    Upper: ``log n / log α`` (from ``dist(Id) = n^{1/p}``), clamped to ``p ≥ 2``.
    Lower: the smallest p on a grid of ``[2, p_max]`` at which the explicit
    lower bound falls below α.
    """
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    upper = max(2.0, math.log(n) / math.log(alpha)) if n > 1 else 2.0
    if psi_dist is None:
        psi_dist = psi_embedding(max(m, 1)).cycle_distortion
    lower = math.inf
    val = math.nan
    for p in np.linspace(2.0, p_max, steps):
        v = grid_distortion_bound_value(m, n, float(p), psi_dist, beta)
        if v < alpha:
            lower, val = float(p), v
            break
    return PAlpha(m, n, alpha, upper, lower, val)


# --------------------------------------------------------------------------
# the exponential-spiral obstruction function
# --------------------------------------------------------------------------


class ObstructionFunction:
    """``x ↦ (n^{−1/p} m e^{iπ x_j/m})_{j≤n}`` on ``Z_{2m}^n``, valued in complex
    ``ℓ_p^n`` (stored as 2n real coordinates, modulus per pair)."""

    def __init__(self, p: float, n: int, m: int):
        if not (1 <= p < math.inf):
            raise ValueError("p must be finite and >= 1")
        self.p, self.n, self.m = float(p), int(n), int(m)
        self.L = 2 * self.m
        self.space = LpSpace(2 * self.n, self.p, block=2)
        self.scale = self.n ** (-1.0 / self.p) * self.m

    def __call__(self, x) -> np.ndarray:
        X = np.atleast_2d(np.asarray(x, dtype=np.int64))
        ang = np.pi * X / self.m
        out = np.empty((X.shape[0], 2 * self.n))
        out[:, 0::2] = self.scale * np.cos(ang)
        out[:, 1::2] = self.scale * np.sin(ang)
        return out if np.ndim(x) > 1 else out[0]

    @property
    def shift_distance(self) -> float:
        return 2 * self.m * self.n ** (-1.0 / self.p)

    @property
    def step_distance(self) -> float:
        return self.m * abs(np.exp(1j * np.pi / self.m) - 1)

    def to_torus(self) -> TorusFunction:
        coords = _mixed_radix(self.L, self.n)
        return TorusFunction(self.n, self.m, self.space, self(coords))


def build_obstruction_function(p: float, n: int, m: int) -> ObstructionFunction:
    return ObstructionFunction(p, n, m)


@dataclass
class ObstructionCheck:
    shift_distance: float
    step_distance: float
    max_shift_error: float
    max_step_error: float
    step_within_pi: bool
    mode: str
    evaluations: int

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_shift_error <= tol and self.max_step_error <= tol and self.step_within_pi


def verify_obstruction_identities(
    f: ObstructionFunction, samples: int = 4096, seed: int = 0, full_budget: int = 5 * 10**6
) -> ObstructionCheck:
    """Both distance identities: shift by ``m e_j`` and sign steps.

    Each coordinate's complex increment is checked exhaustively on ``Z_{2m}``.
    Full vectors are then checked over the whole torus when it fits in
    ``full_budget`` evaluations, otherwise on seeded random samples.
    """
    sp = f.space
    L, n, m = f.L, f.n, f.m
    s_ref, e_ref = f.shift_distance, f.step_distance
    t = np.arange(L)
    z = np.exp(1j * np.pi * t / m)
    per_shift = np.max(np.abs(f.scale * np.abs(np.exp(1j * np.pi * (t + m) / m) - z) - 2 * f.scale))
    per_step = max(
        np.max(np.abs(np.abs(np.exp(1j * np.pi * (t + e) / m) - z) - abs(np.exp(1j * np.pi / m) - 1))) for e in (-1, 1)
    )
    err_s = float(per_shift)
    err_e = float(per_step) * f.scale
    evals = 0
    total = L**n * (n + 2**n)
    if total <= full_budget:
        mode = "full"
        X = _mixed_radix(L, n)
        V = f(X)
        for j in range(n):
            Y = X.copy()
            Y[:, j] = (Y[:, j] + m) % L
            d = sp.distances(f(Y), V)
            err_s = max(err_s, float(np.max(np.abs(d - s_ref))))
            evals += d.size
        for e in itertools.product((-1, 1), repeat=n):
            d = sp.distances(f((X + np.array(e)) % L), V)
            err_e = max(err_e, float(np.max(np.abs(d - e_ref))))
            evals += d.size
    else:
        mode = "sampled"
        rng = sample_rng(seed, 0)
        X = rng.integers(0, L, size=(samples, n))
        V = f(X)
        j = rng.integers(0, n, size=samples)
        Y = X.copy()
        Y[np.arange(samples), j] = (Y[np.arange(samples), j] + m) % L
        d = sp.distances(f(Y), V)
        err_s = max(err_s, float(np.max(np.abs(d - s_ref))))
        E = rng.choice(np.array([-1, 1]), size=(samples, n))
        d = sp.distances(f((X + E) % L), V)
        err_e = max(err_e, float(np.max(np.abs(d - e_ref))))
        evals = 2 * samples
    return ObstructionCheck(s_ref, e_ref, err_s, err_e, e_ref <= math.pi, mode, evals)


def obstruction_union_space(ms=(1, 2), p: float = 3.0) -> DisjointUnion:
    """Clusters ``(m²)^{−1/p}·m·{e^{πik/m}}^{m²}`` in complex ``ℓ_p^{m²}`` joined
    by the max-diameter rule (for p = 3 the scale is ``m^{1/3}``); only small
    m fit in memory."""
    clusters = []
    for m in ms:
        f = ObstructionFunction(p, m * m, m)
        if (2 * m) ** (m * m) > MAX_GRID_POINTS:
            raise BudgetExceeded(f"cluster for m={m} is too large")
        X = _mixed_radix(2 * m, m * m)
        pts = f(X)
        D = np.stack([f.space.distances(np.repeat(pts[i : i + 1], len(pts), axis=0), pts) for i in range(len(pts))])
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
        clusters.append(FiniteSpace(D, check=False))
    return DisjointUnion(clusters)


# --------------------------------------------------------------------------
# coarse moduli
# --------------------------------------------------------------------------


@dataclass
class ModuliEnvelope:
    t: np.ndarray
    omega: np.ndarray
    Omega: np.ndarray
    _dom: np.ndarray = field(repr=False)
    _img: np.ndarray = field(repr=False)

    def omega_at(self, t: float) -> float:
        """Smallest image distance over pairs at domain distance ≥ t."""
        sel = self._dom >= t
        return float(self._img[sel].min()) if sel.any() else math.inf

    def Omega_at(self, t: float) -> float:
        """Largest image distance over pairs at domain distance ≤ t."""
        sel = self._dom <= t
        return float(self._img[sel].max()) if sel.any() else 0.0


def moduli_envelope(emb: FiniteEmbedding) -> ModuliEnvelope:
    dom, img = emb.pair_distances()
    t = np.unique(dom)
    order = np.argsort(dom, kind="stable")
    d_sorted, i_sorted = dom[order], img[order]
    # suffix minima for ω̂, prefix maxima for Ω̂
    suf = np.minimum.accumulate(i_sorted[::-1])[::-1]
    pre = np.maximum.accumulate(i_sorted)
    first = np.searchsorted(d_sorted, t, side="left")
    last = np.searchsorted(d_sorted, t, side="right") - 1
    return ModuliEnvelope(t, suf[first], pre[last], dom, img)


@dataclass
class CertificatePoint:
    n: int
    m: int
    value: float
    omega: float | None = None
    Omega_pi: float | None = None
    holds: bool | None = None


def certificate_value(q: float, p: float, n: int, gamma: float) -> float:
    """``2Γ^{−1} n^{1/q − 1/p}``."""
    return 2.0 / gamma * n ** (1.0 / q - 1.0 / p)


def obstruction_sweep(q: float = 2.0, p: float = 3.0, ns=(1, 4, 9, 16), gamma: float = 1.0, C: float = 1.0, envelope_budget: int = 256):
    """Certificate values across n with ``m = round(n^{1/q})``.

    When the spiral's point set S ⊂ complex ``ℓ_p^n`` is small enough, the
    envelope of the identity map ``(S, ℓ_p) → ℓ_q`` is computed as well and
    ``ω̂(value) ≤ C·Ω̂(π)`` is evaluated.  Returns the points and the
    least-squares slope of log value against log n.
    """
    pts = []
    for n in ns:
        m = max(1, int(round(n ** (1.0 / q))))
        val = certificate_value(q, p, n, gamma)
        cp = CertificatePoint(n, m, val)
        if (2 * m) ** n <= envelope_budget:
            f = ObstructionFunction(p, n, m)
            S = f(_mixed_radix(2 * m, n))
            D = np.stack([f.space.distances(np.repeat(S[i : i + 1], len(S), axis=0), S) for i in range(len(S))])
            D = 0.5 * (D + D.T)
            np.fill_diagonal(D, 0.0)
            emb = FiniteEmbedding(FiniteSpace(D, check=False), LpSpace(2 * n, q, block=2), S, "spiral")
            env = moduli_envelope(emb)
            cp.omega = env.omega_at(val)
            cp.Omega_pi = env.Omega_at(math.pi)
            cp.holds = cp.omega <= C * cp.Omega_pi
        pts.append(cp)
    x = np.log(np.array([c.n for c in pts], dtype=float))
    y = np.log(np.array([c.value for c in pts]))
    slope = float(np.polyfit(x, y, 1)[0]) if len(pts) > 1 and np.ptp(x) > 0 else math.nan
    return pts, slope
