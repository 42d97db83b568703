"""Finitely supported measures, barycenter maps and the q-barycentric constant."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._tol import tol_for
from .spaces import (
    LpSpace,
    MetricSpace,
    PythagoreanProduct,
    SnowflakeSpace,
    TreeSpace,
    UnsupportedOperation,
)

WEIGHT_TOL = 1e-12


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Per-sample stream: Philox counter generator keyed by (seed, index).

    Splitting by sample index (rather than drawing sequentially from one
    stream) makes every sample reproducible on its own, so any partition of
    the sample range over workers yields the same numbers.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


class FinitelySupportedMeasure:
    """Atoms ``points[k]`` with positive ``weights[k]`` summing to 1."""

    def __init__(self, points, weights):
        P = np.array(points, dtype=np.float64)
        if P.ndim == 1:
            P = P[:, None]
        w = np.array(weights, dtype=np.float64).ravel()
        if P.shape[0] != w.shape[0] or w.size == 0:
            raise ValueError("need one weight per atom and at least one atom")
        if np.any(~(w > 0)):
            raise ValueError("weights must be strictly positive")
        if abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {np.sum(w)!r}, not 1")
        P.setflags(write=False)
        w.setflags(write=False)
        self.points = P
        self.weights = w

    @classmethod
    def normalized(cls, points, weights) -> FinitelySupportedMeasure:
        w = np.asarray(weights, dtype=np.float64)
        return cls(points, w / np.sum(w)).merged()

    @classmethod
    def dirac(cls, x) -> FinitelySupportedMeasure:
        return cls(np.atleast_2d(np.asarray(x, dtype=np.float64)), [1.0])

    @classmethod
    def uniform(cls, points) -> FinitelySupportedMeasure:
        P = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return cls(P, np.full(P.shape[0], 1.0 / P.shape[0]))

    def __len__(self):
        return self.weights.size

    def merged(self) -> FinitelySupportedMeasure:
        """Combine exactly repeated atoms, keeping first-occurrence order."""
        keys: dict[bytes, int] = {}
        pts, ws = [], []
        for p, w in zip(self.points, self.weights):
            k = p.tobytes()
            if k in keys:
                ws[keys[k]] += w
            else:
                keys[k] = len(pts)
                pts.append(p)
                ws.append(float(w))
        if len(pts) == len(self):
            return self
        out = object.__new__(FinitelySupportedMeasure)
        P = np.array(pts)
        W = np.array(ws)
        P.setflags(write=False)
        W.setflags(write=False)
        out.points, out.weights = P, W
        return out

    def moment(self, space: MetricSpace, x, q: float) -> float:
        """``∫ d(x, y)^q dμ(y)``."""
        X = np.repeat(space.as_batch(x), len(self), axis=0)
        return float(np.dot(self.weights, space.distances(X, self.points) ** q))


# --------------------------------------------------------------------------
# one-dimensional convex minimization
# --------------------------------------------------------------------------


def lower_weighted_median(c: np.ndarray, w: np.ndarray) -> float:
    order = np.argsort(c, kind="stable")
    cum = np.cumsum(w[order])
    k = int(np.searchsorted(cum, 0.5 * cum[-1] * (1 - 1e-15)))
    return float(c[order][min(k, len(c) - 1)])


def minimize_1d(c, w, q: float) -> float:
    """Minimizer of ``s ↦ Σ w_k |s − c_k|^q`` over the reals (q ≥ 1)."""
    c = np.asarray(c, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    lo, hi = float(c.min()), float(c.max())
    if lo == hi:
        return lo
    if q == 1:
        return lower_weighted_median(c, w)
    if len(c) == 2 and w[0] == w[1]:
        return 0.5 * c[0] + 0.5 * c[1]
    if q == 2:
        return float(np.dot(w, c) / np.sum(w))

    def obj(s):
        return float(np.dot(w, np.abs(s - c) ** q))

    for _ in range(400):
        if hi - lo <= 1e-12:
            break
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if obj(a) <= obj(b):
            hi = b
        else:
            lo = a
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# barycenter maps
# --------------------------------------------------------------------------


def _is_coordinate(space: MetricSpace) -> bool:
    if isinstance(space, LpSpace):
        return True
    if isinstance(space, PythagoreanProduct):
        return all(_is_coordinate(f) for f in space.factors)
    return False


class BarycenterMap:
    """Strategy object.  ``__call__`` maps a measure to a point; ``pair_means``
    evaluates the equal-weight two-point case row-wise on batches and agrees
    bit-for-bit with ``__call__``."""

    name = "abstract"
    tie_break = "lowest-index"

    def check(self, space: MetricSpace) -> None:
        pass

    def __call__(self, space: MetricSpace, mu: FinitelySupportedMeasure) -> np.ndarray:
        self.check(space)
        mu = mu.merged()
        if len(mu) == 1:
            return np.array(mu.points[0])
        return self._compute(space, mu)

    def _compute(self, space, mu):
        raise NotImplementedError

    def pair_means(self, space: MetricSpace, A, B) -> np.ndarray:
        A = space.as_batch(A)
        B = space.as_batch(B)
        out = np.empty_like(A)
        for r in range(A.shape[0]):
            if np.array_equal(A[r], B[r]):
                out[r] = A[r]
            else:
                out[r] = self._compute(space, FinitelySupportedMeasure(np.stack([A[r], B[r]]), [0.5, 0.5]))
        return out

    def __repr__(self):
        return self.name


class LinearMean(BarycenterMap):
    """``Σ w_k y_k`` on coordinate backends."""

    name = "LinearMean"

    def check(self, space):
        if not _is_coordinate(space):
            raise UnsupportedOperation(f"LinearMean needs a coordinate backend, got {type(space).__name__}")

    def _compute(self, space, mu):
        # explicit left-to-right accumulation keeps results independent of BLAS
        acc = mu.weights[0] * mu.points[0]
        for k in range(1, len(mu)):
            acc = acc + mu.weights[k] * mu.points[k]
        return acc

    def pair_means(self, space, A, B):
        self.check(space)
        A = space.as_batch(A)
        B = space.as_batch(B)
        out = 0.5 * A + 0.5 * B
        same = np.all(A == B, axis=1)
        out[same] = A[same]
        return out


class FrechetQMean(BarycenterMap):
    """Minimizer of ``Σ w_k d(·, y_k)^q``.

    ℓ_p: coordinate-separable 1-D minimization (the exact Fréchet mean when
    q = p).  Trees: descent walk along edges.  Everything else: argmin over
    the support atoms.
    """

    def __init__(self, q: float = 2.0):
        if q < 1:
            raise ValueError("Fréchet mean exponent must be >= 1")
        self.q = float(q)
        self.name = f"FrechetQMean(q={self.q:g})"

    def _compute(self, space, mu):
        if isinstance(space, LpSpace) and space.block == 1:
            return np.array([minimize_1d(mu.points[:, j], mu.weights, self.q) for j in range(space.dim)])
        if isinstance(space, TreeSpace):
            return tree_frechet_mean(space, mu, self.q)
        return support_argmin(space, mu, self.q)

    def pair_means(self, space, A, B):
        if isinstance(space, LpSpace) and space.block == 1 and self.q > 1:
            A = space.as_batch(A)
            B = space.as_batch(B)
            out = 0.5 * A + 0.5 * B
            same = A == B
            out[same] = A[same]
            return out
        if isinstance(space, TreeSpace):
            return _tree_pair_means(space, A, B, self.q)
        return super().pair_means(space, A, B)


class TreeMean2(BarycenterMap):
    """Fréchet 2-mean on metric trees."""

    name = "TreeMean2"
    q = 2.0

    def check(self, space):
        if not isinstance(space, TreeSpace):
            raise UnsupportedOperation("TreeMean2 needs a TreeSpace")

    def _compute(self, space, mu):
        return tree_frechet_mean(space, mu, 2.0)

    def pair_means(self, space, A, B):
        self.check(space)
        return _tree_pair_means(space, A, B, 2.0)


def _tree_pair_means(space: TreeSpace, A, B, q: float) -> np.ndarray:
    A = space.as_batch(A)
    B = space.as_batch(B)
    if q == 1:
        return np.array(A)
    out = space.midpoints(A, B)
    same = np.all(A == B, axis=1)
    out[same] = A[same]
    return out


def support_argmin(space: MetricSpace, mu: FinitelySupportedMeasure, q: float) -> np.ndarray:
    K = len(mu)
    M = space.distance_matrix(mu.points) if K > 1 else np.zeros((1, 1))
    obj = (M**q) @ mu.weights
    return np.array(mu.points[int(np.argmin(obj))])


def tree_frechet_mean(space: TreeSpace, mu: FinitelySupportedMeasure, q: float) -> np.ndarray:
    """Fréchet q-mean on a metric tree.

    Two atoms use the closed form along their geodesic.  Otherwise start at
    the best vertex and walk: on each incident edge (in index order) the
    atoms have signed coordinates along the edge's line, so the restricted
    objective is a 1-D convex problem; follow the edge if it strictly
    improves, stop inside it if its minimizer is interior.
    """
    if len(mu) == 2:
        a, b = mu.points[0:1], mu.points[1:2]
        w1, w2 = mu.weights
        if q == 1:
            return np.array(mu.points[0] if w1 >= w2 else mu.points[1])
        if w1 == w2:
            t = 0.5
        else:
            t = 1.0 / (1.0 + (w1 / w2) ** (1.0 / (q - 1.0)))
        return space.interpolate(a, b, t)[0]

    Y = mu.points
    w = mu.weights
    dv = np.stack([space.vertex_distance_to_points(v, Y) for v in range(space.n_vertices)])
    vobj = (dv**q) @ w
    v = int(np.argmin(vobj))
    prev = -1
    for _ in range(space.n_vertices + 1):
        moved = False
        for far, e in sorted(space.adj[v], key=lambda t: t[1]):
            if far == prev:
                continue
            length = space.elen[e]
            c = _edge_coordinates(space, v, far, e, Y, dv[v])
            s = min(max(minimize_1d(c, w, q), 0.0), length)
            f0 = float(np.dot(w, np.abs(c) ** q))
            fs = float(np.dot(w, np.abs(s - c) ** q))
            if s > 0 and fs < f0:
                if s >= length:
                    prev, v = v, far
                    moved = True
                    break
                off = s if space.eu[e] == v else length - s
                return np.array([float(e), off])
        if not moved:
            break
    e = space.adj[v][0][1]
    return np.array([float(e), 0.0 if space.eu[e] == v else space.elen[e]])


def _edge_coordinates(space: TreeSpace, v: int, far: int, e: int, Y: np.ndarray, dvy: np.ndarray) -> np.ndarray:
    """Signed position of each atom on the line through edge e, origin at v."""
    ye = Y[:, 0].astype(np.int64)
    yo = Y[:, 1]
    on_edge = ye == e
    from_v = np.where(space.eu[e] == v, yo, space.elen[e] - yo)
    # beyond: geodesic from v to y leaves through far
    beyond = dvy >= space.elen[e] + space.vertex_distance_to_points(far, Y) - 1e-12 * np.maximum(1.0, dvy)
    c = np.where(beyond, dvy, -dvy)
    return np.where(on_edge, from_v, c)


def canonical_map(space: MetricSpace) -> BarycenterMap:
    if _is_coordinate(space):
        return LinearMean()
    if isinstance(space, TreeSpace):
        return TreeMean2()
    if isinstance(space, SnowflakeSpace):
        return canonical_map(space.base)
    return FrechetQMean(2.0)


def resolve_map(name: str | BarycenterMap | None, space: MetricSpace, q: float = 2.0) -> BarycenterMap:
    if isinstance(name, BarycenterMap):
        return name
    if name in (None, "", "canonical"):
        return canonical_map(space)
    key = name.lower()
    if key in ("linear", "linearmean"):
        return LinearMean()
    if key in ("tree", "treemean2"):
        return TreeMean2()
    if key in ("frechet", "frechetqmean"):
        return FrechetQMean(q)
    raise ValueError(f"unknown barycenter map {name!r}")


def barycenter(space: MetricSpace, bmap: BarycenterMap, mu: FinitelySupportedMeasure) -> np.ndarray:
    return bmap(space, mu)


# --------------------------------------------------------------------------
# partitions and conditional barycenters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    size: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        seen = [i for b in blocks for i in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        if sorted(seen) != list(range(self.size)):
            raise ValueError("blocks must be disjoint and cover the ground set")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def trivial(cls, K: int) -> Partition:
        return cls(K, (tuple(range(K)),))

    @classmethod
    def singletons(cls, K: int) -> Partition:
        return cls(K, tuple((i,) for i in range(K)))

    @classmethod
    def from_labels(cls, labels) -> Partition:
        labels = list(labels)
        order: dict = {}
        for i, lab in enumerate(labels):
            order.setdefault(lab, []).append(i)
        return cls(len(labels), tuple(tuple(v) for v in order.values()))

    def labels(self) -> np.ndarray:
        out = np.empty(self.size, dtype=np.int64)
        for j, b in enumerate(self.blocks):
            out[list(b)] = j
        return out


def conditional_barycenter(space, bmap, mu, Z, part: Partition) -> np.ndarray:
    """Blockwise barycenter of ``Z`` against ``mu`` (weights over Ω)."""
    mu = np.asarray(mu.weights if isinstance(mu, FinitelySupportedMeasure) else mu, dtype=np.float64)
    Z = space.as_batch(Z)
    if mu.shape[0] != part.size or Z.shape[0] != part.size:
        raise ValueError("measure, function and partition sizes differ")
    if np.any(~(mu > 0)):
        raise ValueError("conditional barycenters need a full-support measure")
    out = np.empty_like(Z)
    for b in part.blocks:
        idx = list(b)
        w = mu[idx]
        nu = FinitelySupportedMeasure(Z[idx], w / w.sum()) if len(idx) > 1 else FinitelySupportedMeasure(Z[idx], [1.0])
        out[idx] = bmap(space, nu)
    return out


# --------------------------------------------------------------------------
# q-barycentric inequality
# --------------------------------------------------------------------------


def barycentric_terms(space, bmap, mu, x, q):
    """``(∫d(x,y)^q, d(B,x)^q, ∫d(B,y)^q)`` for the measure mu."""
    B = bmap(space, mu)
    return mu.moment(space, x, q), space.distance(B, x) ** q, mu.moment(space, B, q)


def check_barycentric_inequality(space, bmap, mu, x, q: float, beta: float) -> float:
    if q < 1 or beta <= 0:
        raise ValueError("need q >= 1 and beta > 0")
    total, near, spread = barycentric_terms(space, bmap, mu, x, q)
    return total - near - spread / beta**q


@dataclass
class BetaEstimate:
    q: float
    beta_hat: float
    witness_measure: FinitelySupportedMeasure | None = field(repr=False)
    witness_point: np.ndarray | None = field(repr=False)
    samples: int = 0
    used: int = 0
    degenerate: int = 0


def sample_measure(space: MetricSpace, rng: np.random.Generator, max_atoms: int = 4) -> FinitelySupportedMeasure:
    k = int(rng.integers(2, max_atoms + 1))
    pts = space.random_points(rng, k)
    w = rng.uniform(0.05, 1.0, size=k)
    return FinitelySupportedMeasure(pts, w / w.sum())


def estimate_beta(space, bmap, q: float, samples: int = 500, seed: int = 0, max_atoms: int = 4) -> BetaEstimate:
    """Largest β over sampled (μ, x) needed for the q-barycentric inequality.

    Samples whose measure has fewer than two distinct atoms, or whose ratio is
    0/0 up to tolerance, carry no information and are counted as degenerate.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    best = 0.0
    wit_mu = wit_x = None
    used = degenerate = 0
    for i in range(samples):
        rng = sample_rng(seed, i)
        mu = sample_measure(space, rng, max_atoms).merged()
        x = space.random_points(rng, 1)[0]
        if len(mu) < 2:
            degenerate += 1
            continue
        total, near, spread = barycentric_terms(space, bmap, mu, x, q)
        den = total - near
        tol = tol_for(total, near, spread)
        if den <= 0 or den <= tol:
            if spread > tol:
                return BetaEstimate(q, float("inf"), mu, x, samples, used + 1, degenerate)
            degenerate += 1
            continue
        used += 1
        ratio = (spread / den) ** (1.0 / q)
        if ratio > best:
            best, wit_mu, wit_x = ratio, mu, x
    return BetaEstimate(q, best, wit_mu, wit_x, samples, used, degenerate)


# --------------------------------------------------------------------------
# two-point consequences
# --------------------------------------------------------------------------


@dataclass
class TwoPointReport:
    q: float
    pairs: int
    worst_slack: float
    passed: bool


def two_point_bound_check(space, bmap, q: float, pairs: int = 200, seed: int = 0, tol: float | None = None) -> TwoPointReport:
    """``d(B(½δ_a+½δ_b), a)^q ≤ d(a,b)^q / 2`` and symmetrically in b."""
    worst = np.inf
    ok = True
    for i in range(pairs):
        rng = sample_rng(seed, i)
        a, b = space.random_points(rng, 2)
        mid = bmap.pair_means(space, a[None], b[None])[0]
        dab = space.distance(a, b) ** q
        for end in (a, b):
            lhs = space.distance(mid, end) ** q
            slack = 0.5 * dab - lhs
            t = tol_for(lhs, dab) if tol is None else tol
            worst = min(worst, slack)
            ok &= slack >= -t
    return TwoPointReport(q, pairs, float(worst), bool(ok))


def endgame_slack(s, q: float, beta: float):
    """``(1+s)^q + (1−s)^q − 2 − 2s^q/β^q``; negative means the inequality fails."""
    s = np.asarray(s, dtype=np.float64)
    return (1 + s) ** q + (1 - s) ** q - 2 - 2 * s**q / beta**q


@dataclass
class EndgameScan:
    q: float
    beta: float
    s: np.ndarray = field(repr=False)
    slack: np.ndarray = field(repr=False)
    witness: float | None
    max_abs_slack: float


def endgame_scan(q: float, beta: float, s_max: float = 0.1, steps: int = 1000) -> EndgameScan:
    s = np.linspace(s_max / steps, s_max, steps)
    sl = endgame_slack(s, q, beta)
    bad = np.flatnonzero(sl < -1e-12)
    return EndgameScan(q, beta, s, sl, float(s[bad[0]]) if bad.size else None, float(np.max(np.abs(sl))))

