"""Dyadic martingales on the sign cube built from two-point barycenters.

Level ``i`` of a cube martingale is a ``(2^i, width)`` array indexed by the
sign prefix ``(ε_1, …, ε_i)`` encoded as a bitmask (bit ``j−1`` set iff
``ε_j = +1``).  The two children of mask ``b`` at level ``i+1`` are ``b``
(``ε_{i+1} = −1``) and ``b | 1 << i`` (``ε_{i+1} = +1``), so a whole level is
one batched call ``pair_means(next[:2^i], next[2^i:])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._tol import tol_for
from .measures import BarycenterMap
from .spaces import MetricSpace

MAX_CUBE_DIM = 20


def sign_vectors(n: int) -> np.ndarray:
    """``(2^n, n)`` array of ±1, row ``b`` is the sign vector of mask ``b``."""
    b = np.arange(2**n)[:, None]
    return np.where((b >> np.arange(n)) & 1, 1, -1).astype(np.int64)


def parent_masks(i: int) -> np.ndarray:
    """Level-(i−1) mask of every level-i mask."""
    return np.arange(2**i) % (2 ** (i - 1))


@dataclass
class CubeMartingale:
    n: int
    levels: list = field(repr=False)
    space: MetricSpace = field(repr=False)
    bmap: BarycenterMap

    @property
    def terminal(self) -> np.ndarray:
        return self.levels[self.n]

    def value(self, i: int, eps) -> np.ndarray:
        """``E_i`` at a full sign vector (only the first i signs matter)."""
        mask = sum(1 << j for j in range(i) if eps[j] > 0)
        return self.levels[i][mask]

    def expanded(self, i: int) -> np.ndarray:
        """Level i extended constantly to all ``2^n`` sign vectors."""
        return self.levels[i][np.arange(2**self.n) % (2**i)]


def _reduce_levels(space, bmap, top: np.ndarray) -> list:
    """``top`` has shape ``(..., 2^n, w)``; returns levels 0..n with the same leading shape."""
    lead = top.shape[:-2]
    n = int(np.log2(top.shape[-2]))
    w = top.shape[-1]
    levels = [None] * (n + 1)
    levels[n] = top
    cur = top
    for i in range(n - 1, -1, -1):
        half = 2**i
        A = cur[..., :half, :].reshape(-1, w)
        B = cur[..., half:, :].reshape(-1, w)
        cur = bmap.pair_means(space, A, B).reshape(*lead, half, w)
        levels[i] = cur
    return levels


def build_cube_martingale(space: MetricSpace, bmap: BarycenterMap, h) -> CubeMartingale:
    """``h`` is a ``(2^n, width)`` table in mask order or a callable on ±1 vectors."""
    if callable(h):
        raise TypeError("pass a callable through cube_table(space, n, h) first")
    H = space.as_batch(h)
    n = int(round(np.log2(H.shape[0])))
    if 2**n != H.shape[0]:
        raise ValueError("terminal table length must be a power of two")
    if n > MAX_CUBE_DIM:
        raise ValueError(f"cube dimension {n} exceeds the cap {MAX_CUBE_DIM}")
    bmap.check(space)
    return CubeMartingale(n, _reduce_levels(space, bmap, np.array(H)), space, bmap)


def cube_table(space: MetricSpace, n: int, h) -> np.ndarray:
    """Tabulate a callable on sign vectors in mask order."""
    return space.as_batch(np.stack([np.asarray(h(tuple(e)), dtype=np.float64) for e in sign_vectors(n)]))


@dataclass
class MartingaleCheck:
    max_deviation: float
    worst: tuple | None
    passed: bool


def verify_martingale_property(mart: CubeMartingale, tol: float = 0.0) -> MartingaleCheck:
    """Recompute every two-point barycenter; report max distance to the stored value."""
    worst_dev, worst = 0.0, None
    for i in range(mart.n):
        half = 2**i
        nxt = mart.levels[i + 1]
        again = mart.bmap.pair_means(mart.space, nxt[:half], nxt[half:])
        dev = mart.space.distances(again, mart.levels[i])
        # distance can round to 0 for slightly different encodings; count those too
        differs = np.any(again != mart.levels[i], axis=1)
        dev = np.where(differs & (dev == 0), np.finfo(float).tiny, dev)
        k = int(np.argmax(dev))
        if dev[k] > worst_dev:
            worst_dev, worst = float(dev[k]), (i, k)
    return MartingaleCheck(worst_dev, worst, worst_dev <= tol)


def level_moments(mart: CubeMartingale, x, q: float) -> np.ndarray:
    """``M_i = 2^{−n} Σ_ε d(E_i(ε), x)^q`` for i = 0..n."""
    x = mart.space.as_batch(x)
    out = np.empty(mart.n + 1)
    for i, L in enumerate(mart.levels):
        d = mart.space.distances(L, np.repeat(x, L.shape[0], axis=0))
        out[i] = np.mean(d**q)
    return out


@dataclass
class MonotonicityReport:
    moments: np.ndarray
    worst_step: float
    worst_index: int | None
    passed: bool


def check_monotonicity(mart: CubeMartingale, x, q: float, tol: float | None = None) -> MonotonicityReport:
    if q < 1:
        raise ValueError("q must be >= 1")
    M = level_moments(mart, x, q)
    if mart.n == 0:
        return MonotonicityReport(M, 0.0, None, True)
    steps = np.diff(M)
    k = int(np.argmin(steps))
    t = tol_for(*M) if tol is None else tol
    return MonotonicityReport(M, float(steps[k]), k, bool(np.all(steps >= -t)))


@dataclass
class PisierReport:
    lhs: float
    rhs: float
    slack: float
    increments: np.ndarray = field(repr=False)
    passed: bool = True


def increment_moments(mart: CubeMartingale, q: float) -> np.ndarray:
    """``2^{−n} Σ_ε d(E_i(ε), E_{i−1}(ε))^q`` for i = 1..n."""
    out = np.empty(mart.n)
    for i in range(1, mart.n + 1):
        cur = mart.levels[i]
        par = mart.levels[i - 1][parent_masks(i)]
        out[i - 1] = np.mean(mart.space.distances(cur, par) ** q)
    return out


def check_pisier(mart: CubeMartingale, x, q: float, beta: float, tol: float | None = None) -> PisierReport:
    if q <= 0 or beta <= 0:
        raise ValueError("need q > 0 and beta > 0")
    x = mart.space.as_batch(x)
    inc = increment_moments(mart, q)
    start = mart.space.distances(mart.levels[0], x)[0] ** q
    lhs = float(start + np.sum(inc) / beta**q)
    T = mart.terminal
    rhs = float(np.mean(mart.space.distances(T, np.repeat(x, T.shape[0], axis=0)) ** q))
    t = tol_for(lhs, rhs) if tol is None else tol
    return PisierReport(lhs, rhs, rhs - lhs, inc, rhs - lhs >= -t)


# --------------------------------------------------------------------------
# martingales of translated torus restrictions
# --------------------------------------------------------------------------


def torus_cube_indices(f) -> np.ndarray:
    """``idx[x, b]`` = torus index of ``x + ε(b)``: the table of ``f_x``."""
    S = sign_vectors(f.n)
    return np.stack([f.shift_index(s) for s in S], axis=1)


def torus_martingales(f, bmap: BarycenterMap) -> list:
    """Levels of ``E_i f_x`` for every torus point x at once: level i has shape ``(L^n, 2^i, w)``."""
    bmap.check(f.space)
    top = f.values[torus_cube_indices(f)]
    return _reduce_levels(f.space, bmap, top)


@dataclass
class TranslationReport:
    checked: int
    violations: int
    max_deviation: float
    worst: tuple | None
    passed: bool


def check_translation_identity(f, bmap: BarycenterMap, i: int, j: int, eps, x, tol: float = 0.0) -> TranslationReport:
    """``(E_i f_{x−2ε_j e_j})(ε) = (E_i f_x)(ε with ε_j flipped)`` for one instance."""
    n = f.n
    if not (1 <= i <= n and 1 <= j <= i):
        raise ValueError("need 1 <= j <= i <= n")
    eps = np.asarray(eps, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if eps.shape != (n,) or np.any(np.abs(eps) != 1):
        raise ValueError("eps must be a ±1 vector of length n")
    if x.shape != (n,) or np.any(x < 0) or np.any(x >= f.L):
        raise ValueError("x must be a torus point")
    shift = np.zeros(n, dtype=np.int64)
    shift[j - 1] = -2 * eps[j - 1]
    y = (x + shift) % f.L
    flipped = eps.copy()
    flipped[j - 1] *= -1
    S = sign_vectors(n)
    mx = build_cube_martingale(f.space, bmap, f.values[[f.index(tuple((x + s) % f.L)) for s in S]])
    my = build_cube_martingale(f.space, bmap, f.values[[f.index(tuple((y + s) % f.L)) for s in S]])
    a = my.value(i, eps)
    b = mx.value(i, flipped)
    dev = f.space.distance(a, b)
    if dev == 0 and not np.array_equal(a, b):
        dev = np.finfo(float).tiny
    return TranslationReport(1, int(dev > tol), float(dev), (i, j, tuple(eps), tuple(x)), dev <= tol)


def check_translation_identity_all(f, bmap: BarycenterMap, tol: float = 0.0, levels: list | None = None) -> TranslationReport:
    """Exhaustive version over every (i, j ≤ i, ε prefix, x)."""
    n = f.n
    if levels is None:
        levels = torus_martingales(f, bmap)
    checked = violations = 0
    worst_dev, worst = 0.0, None
    for i in range(1, n + 1):
        masks = np.arange(2**i)
        Ei = levels[i]
        for j in range(1, i + 1):
            plus = (masks >> (j - 1)) & 1
            for b in masks:
                e_j = 1 if plus[b] else -1
                shift = np.zeros(n, dtype=np.int64)
                shift[j - 1] = -2 * e_j
                yidx = f.shift_index(shift)
                lhs = Ei[yidx, b]
                rhs = Ei[:, b ^ (1 << (j - 1))]
                dev = f.space.distances(lhs, rhs)
                differs = np.any(lhs != rhs, axis=1)
                dev = np.where(differs & (dev == 0), np.finfo(float).tiny, dev)
                checked += dev.size
                violations += int(np.count_nonzero(dev > tol))
                k = int(np.argmax(dev))
                if dev[k] > worst_dev:
                    worst_dev, worst = float(dev[k]), (i, j, int(b), tuple(int(c) for c in f.coords[k]))
    return TranslationReport(checked, violations, worst_dev, worst, violations == 0)
