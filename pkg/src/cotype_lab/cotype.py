"""Torus functions and the metric cotype functionals.

A :class:`TorusFunction` stores ``f: Z_L^n → X`` (``L = 2m``) densely; the
value at ``x`` sits at row ``Σ x_i L^{i−1}``.  All functionals are full
enumerations over the torus, summed in fixed index order with compensated
summation so results do not depend on how the work is split.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._tol import leq, tol_for
from .martingales import torus_martingales, sign_vectors
from .measures import BarycenterMap, canonical_map, sample_rng
from .spaces import LpSpace, MetricSpace

MAX_TORUS_POINTS = 10**7
MAX_EVALUATIONS = 10**9
DECOMPOSE_MAX_N = 6
DECOMPOSE_MAX_M = 2
DECOMPOSE_MAX_FLOATS = 6 * 10**7


class BudgetExceeded(RuntimeError):
    """The requested enumeration is larger than the configured cap."""


def stable_power_sum(d: np.ndarray, q: float) -> float:
    return kernels.stable_sum(np.asarray(d, dtype=np.float64) ** q)


class TorusFunction:
    """``f: Z_L^n → space`` with ``L = 2m`` (or any even side for sublattices)."""

    def __init__(self, n: int, m: int, space: MetricSpace, values, side: int | None = None):
        if n < 0 or m < 1:
            raise ValueError("need n >= 0 and m >= 1")
        self.n = int(n)
        self.m = int(m)
        self.L = int(side) if side is not None else 2 * self.m
        self.space = space
        N = self.L**self.n
        if N > MAX_TORUS_POINTS:
            raise BudgetExceeded(f"torus has {N} points, cap is {MAX_TORUS_POINTS}")
        V = space.as_batch(values)
        if V.shape[0] != N:
            raise ValueError(f"expected {N} values for Z_{self.L}^{self.n}, got {V.shape[0]}")
        V = np.array(V)
        V.setflags(write=False)
        self.values = V
        self.size = N
        self.radix = self.L ** np.arange(self.n, dtype=np.int64)
        self.coords = (np.arange(N, dtype=np.int64)[:, None] // self.radix) % self.L

    def index(self, x) -> int:
        x = np.asarray(x, dtype=np.int64) % self.L
        return int(np.dot(x, self.radix))

    def __call__(self, x) -> np.ndarray:
        return self.values[self.index(x)]

    def shift_index(self, v) -> np.ndarray:
        """Row of ``x + v`` for every row x."""
        v = np.asarray(v, dtype=np.int64)
        return ((self.coords + v) % self.L) @ self.radix

    def with_values(self, values) -> TorusFunction:
        return TorusFunction(self.n, self.m, self.space, values, side=self.L)

    def translate(self, v) -> TorusFunction:
        return self.with_values(self.values[self.shift_index(v)])

    def permute(self, perm) -> TorusFunction:
        """``g(x) = f(x_σ)``, a coordinate permutation."""
        perm = np.asarray(perm, dtype=np.int64)
        idx = self.coords[:, perm] @ self.radix
        return self.with_values(self.values[idx])

    def restrict(self, A, w) -> TorusFunction:
        """``f_{A,w}(y) = f(y + w)`` on ``Z_L^A`` (w supported off A)."""
        A = list(A)
        w = np.asarray(w, dtype=np.int64)
        k = len(A)
        sub = (np.arange(self.L**k, dtype=np.int64)[:, None] // self.L ** np.arange(k)) % self.L
        full = np.tile(w, (sub.shape[0], 1))
        full[:, A] = sub
        return TorusFunction(k, self.m, self.space, self.values[full @ self.radix], side=self.L)

    def sublattice(self, eta) -> TorusFunction:
        """``φ_η(y) = f(2y + η)`` on ``Z_{L/2}^n``."""
        if self.L % 2:
            raise ValueError("sublattice needs an even side")
        half = self.L // 2
        eta = np.asarray(eta, dtype=np.int64)
        sub = (np.arange(half**self.n, dtype=np.int64)[:, None] // half ** np.arange(self.n)) % half
        idx = ((2 * sub + eta) % self.L) @ self.radix
        return TorusFunction(self.n, max(1, half // 2), self.space, self.values[idx], side=half)


def make_torus_function(n: int, m: int, space: MetricSpace, source="random", seed: int = 0) -> TorusFunction:
    """``source``: ``"random"``, a ``(L^n, width)`` table, a single point
    (constant function) or a callable on integer coordinate tuples."""
    L = 2 * m
    N = L**n
    if N > MAX_TORUS_POINTS:
        raise BudgetExceeded(f"torus has {N} points, cap is {MAX_TORUS_POINTS}")
    if isinstance(source, str):
        if source != "random":
            raise ValueError(f"unknown torus source {source!r}")
        values = space.random_points(sample_rng(seed, 0), N)
    elif callable(source):
        coords = (np.arange(N)[:, None] // L ** np.arange(n)) % L
        values = np.stack([np.asarray(source(tuple(int(c) for c in x)), dtype=np.float64) for x in coords])
    else:
        arr = np.asarray(source, dtype=np.float64)
        if arr.ndim == 1 and arr.shape[0] == space.width:
            values = np.tile(arr, (N, 1))
        else:
            values = arr
    return TorusFunction(n, m, space, values)


# --------------------------------------------------------------------------
# the functionals
# --------------------------------------------------------------------------


def linf_edges(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1, 0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)


def edge_set(n: int, edges: str) -> tuple[np.ndarray, float]:
    key = edges.lower()
    if key in ("signs", "sign", "pm1"):
        return sign_vectors(n), 2.0**-n
    if key in ("linf", "l_inf", "inf"):
        return linf_edges(n), 3.0**-n
    raise ValueError(f"unknown edge set {edges!r}")


def _check_budget(f: TorusFunction, per_point: int) -> None:
    if f.size * per_point > MAX_EVALUATIONS:
        raise BudgetExceeded(f"{f.size * per_point} distance evaluations exceed the cap {MAX_EVALUATIONS}")


def shift_power_sum(f: TorusFunction, v, q: float) -> float:
    """``Σ_x d(f(x+v), f(x))^q``."""
    return stable_power_sum(f.space.distances(f.values[f.shift_index(v)], f.values), q)


def cotype_lhs_power(f: TorusFunction, q: float, shift: int | None = None) -> float:
    s = f.m if shift is None else shift
    _check_budget(f, f.n)
    parts = []
    for i in range(f.n):
        v = np.zeros(f.n, dtype=np.int64)
        v[i] = s
        parts.append(f.space.distances(f.values[f.shift_index(v)], f.values))
    return stable_power_sum(np.concatenate(parts), q) if parts else 0.0


def cotype_lhs(f: TorusFunction, q: float) -> float:
    """``(Σ_i Σ_x d(f(x + m e_i), f(x))^q)^{1/q}``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return cotype_lhs_power(f, q) ** (1.0 / q)


def cotype_rhs_power(f: TorusFunction, q: float, edges: str = "signs") -> float:
    E, norm = edge_set(f.n, edges)
    _check_budget(f, E.shape[0])
    parts = [f.space.distances(f.values[f.shift_index(e)], f.values) for e in E if np.any(e)]
    total = stable_power_sum(np.concatenate(parts), q) if parts else 0.0
    return norm * total


def cotype_rhs(f: TorusFunction, q: float, edges: str = "signs") -> float:
    """Signs: ``(2^{−n} Σ_{ε∈{−1,1}^n} Σ_x d(f(x+ε),f(x))^q)^{1/q}``; Linf: ``3^{−n}`` over ``{−1,0,1}^n``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return cotype_rhs_power(f, q, edges) ** (1.0 / q)


def ratio(lhs: float, rhs: float) -> tuple[float, bool]:
    """``lhs/rhs`` with ``x/0 = ∞`` for x > 0 and ``0/0 = 0`` (flagged degenerate)."""
    if rhs > 0:
        return lhs / rhs, False
    if lhs > 0:
        return float("inf"), False
    return 0.0, True


def theorem_bound(n: int, m: int, q: float, beta: float) -> float:
    return 4.0 * n ** (1.0 / q) + beta * m


@dataclass
class CotypeReport:
    q: float
    beta: float
    n: int
    m: int
    lhs: float
    rhs_sign: float
    rhs_linf: float
    bound: float
    gamma_hat: float
    passed: bool
    t_approx: float | None = None
    t_shift: float | None = None
    t_flip: float | None = None
    t_inc: float | None = None
    checks: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.bound * self.rhs_sign - self.lhs


def verify_main_inequality(f: TorusFunction, q: float, beta: float, rel: float = 1e-9) -> CotypeReport:
    """``lhs ≤ (4n^{1/q} + βm)·rhs_sign`` (up to ``rel`` times the larger side)."""
    if not (1 <= q < math.inf):
        raise ValueError("cotype checks need a finite q >= 1")
    lhs = cotype_lhs(f, q)
    rs = cotype_rhs(f, q, "signs")
    rl = cotype_rhs(f, q, "linf")
    bound = theorem_bound(f.n, f.m, q, beta)
    g, degenerate = ratio(lhs, f.m * rs)
    flags = []
    if f.m % 2:
        flags.append("outside theorem hypothesis: m odd")
    if degenerate:
        flags.append("degenerate: constant on the sign-edge graph")
    ok = leq(lhs, bound * rs, rel=rel)
    return CotypeReport(q, beta, f.n, f.m, lhs, rs, rl, bound, g, ok, flags=flags)


# --------------------------------------------------------------------------
# the three-term split behind the theorem
# --------------------------------------------------------------------------


def decompose_main_proof(
    f: TorusFunction,
    q: float,
    beta: float,
    bmap: BarycenterMap | None = None,
    rel: float = 1e-9,
    max_n: int = DECOMPOSE_MAX_N,
    max_m: int = DECOMPOSE_MAX_M,
) -> CotypeReport:
    """Proof terms for ``f: Z_{4m}^n → X`` (the shift is ``2m``).

    Reports ``T_approx`` and ``T_shift`` together with the two intermediate
    terms ``T_flip`` (flipping ε_i inside E_i) and ``T_inc`` (martingale
    increments) through which the shift term is bounded.
    """
    if f.L % 4:
        raise ValueError("the proof split needs a torus side divisible by 4")
    n, m = f.n, f.L // 4
    if n > max_n or m > max_m:
        raise BudgetExceeded(f"decomposition capped at n <= {max_n}, m <= {max_m}")
    if f.size * 2**n * (n + 1) * f.space.width > DECOMPOSE_MAX_FLOATS:
        raise BudgetExceeded("martingale storage exceeds the cap")
    bmap = bmap or canonical_map(f.space)
    sp = f.space
    S = sign_vectors(n)
    levels = torus_martingales(f, bmap)
    full = np.arange(2**n)
    top = levels[n]
    approx, shift, flip, inc = [], [], [], []
    for i in range(1, n + 1):
        Ei = levels[i][:, full % 2**i]  # (N, 2^n, w) constant extension
        Eprev = levels[i - 1][:, full % 2 ** (i - 1)]
        approx.append(sp.distances(top.reshape(-1, sp.width), Ei.reshape(-1, sp.width)))
        v = np.zeros(n, dtype=np.int64)
        v[i - 1] = 2 * m
        moved = Ei[f.shift_index(v)]
        shift.append(sp.distances(moved.reshape(-1, sp.width), Ei.reshape(-1, sp.width)))
        flipped = Ei[:, full ^ (1 << (i - 1))]
        flip.append(sp.distances(flipped.reshape(-1, sp.width), Ei.reshape(-1, sp.width)))
        inc.append(sp.distances(Eprev.reshape(-1, sp.width), Ei.reshape(-1, sp.width)))

    def term(parts):
        return (2.0**-n * stable_power_sum(np.concatenate(parts), q)) ** (1.0 / q) if parts else 0.0

    t_approx, t_shift, t_flip, t_inc = term(approx), term(shift), term(flip), term(inc)
    lhs = cotype_lhs_power(f, q, shift=2 * m) ** (1.0 / q)
    parts = [sp.distances(f.values[f.shift_index(e)], f.values) for e in S]
    rs = (2.0**-n * stable_power_sum(np.concatenate(parts), q)) ** (1.0 / q) if parts else 0.0
    rl = cotype_rhs(f, q, "linf") if n else 0.0
    nq = n ** (1.0 / q)

    def chk(a, b):
        return {"lhs": a, "rhs": b, "pass": leq(a, b, rel=rel)}

    checks = {
        "triangle_split": chk(lhs, 2 * t_approx + t_shift),
        "first_term": chk(t_approx, 2 * nq * rs),
        "second_term": chk(t_shift, 2 * beta * m * rs),
        "shift_by_flips": chk(t_shift, m * t_flip),
        "flip_by_increments": chk(t_flip, 2 * t_inc),
        "increments_by_pisier": chk(t_inc, beta * rs),
        "theorem": chk(lhs, (4 * nq + 2 * beta * m) * rs),
    }
    bound = theorem_bound(n, 2 * m, q, beta)
    g, degenerate = ratio(lhs, 2 * m * rs)
    ok = all(checks[k]["pass"] for k in ("triangle_split", "first_term", "second_term"))
    flags = ["degenerate: constant on the sign-edge graph"] if degenerate else []
    return CotypeReport(
        q, beta, n, 2 * m, lhs, rs, rl, bound, g, ok,
        t_approx=t_approx, t_shift=t_shift, t_flip=t_flip, t_inc=t_inc, checks=checks, flags=flags,
    )


# --------------------------------------------------------------------------
# constant estimation
# --------------------------------------------------------------------------


@dataclass
class ConstantEstimate:
    c_hat: float
    witness: TorusFunction | None = field(repr=False)
    lhs: float = 0.0
    rhs: float = 0.0
    degenerate: bool = False
    evaluations: int = 0
    accepted: int = 0


class _RatioTracker:
    """Keeps ``Σ lhs^q`` and ``Σ rhs^q`` of a table and prices single-entry edits."""

    def __init__(self, f: TorusFunction, q: float, edges: str):
        self.f = f
        self.q = q
        self.space = f.space
        E, self.norm = edge_set(f.n, edges)
        E = E[np.any(E != 0, axis=1)]
        lv = []
        for i in range(f.n):
            v = np.zeros(f.n, dtype=np.int64)
            v[i] = f.m
            lv.append(v)
        self.lf = np.array([f.shift_index(v) for v in lv]).reshape(len(lv), -1)
        self.lb = np.array([f.shift_index(-v) for v in lv]).reshape(len(lv), -1)
        self.rf = np.array([f.shift_index(e) for e in E]).reshape(len(E), -1)
        self.rb = np.array([f.shift_index(-e) for e in E]).reshape(len(E), -1)
        self.values = np.array(f.values)
        self.recompute()

    def recompute(self):
        V, sp, q = self.values, self.space, self.q
        self.sl = stable_power_sum(np.concatenate([sp.distances(V[ix], V) for ix in self.lf]), q) if len(self.lf) else 0.0
        self.sr = stable_power_sum(np.concatenate([sp.distances(V[ix], V) for ix in self.rf]), q) if len(self.rf) else 0.0

    def _local(self, k: int, point: np.ndarray, fwd: np.ndarray, bwd: np.ndarray) -> float:
        if fwd.size == 0:
            return 0.0
        nb = np.concatenate([self.values[fwd[:, k]], self.values[bwd[:, k]]])
        P = np.repeat(point[None], nb.shape[0], axis=0)
        return float(np.sum(self.space.distances(P, nb) ** self.q))

    def propose(self, k: int, point: np.ndarray) -> tuple[float, float]:
        old = self.values[k]
        dl = self._local(k, point, self.lf, self.lb) - self._local(k, old, self.lf, self.lb)
        dr = self._local(k, point, self.rf, self.rb) - self._local(k, old, self.rf, self.rb)
        return max(self.sl + dl, 0.0), max(self.sr + dr, 0.0)

    def ratio_of(self, sl: float, sr: float) -> tuple[float, bool]:
        return ratio(sl ** (1 / self.q), self.f.m * (self.norm * sr) ** (1 / self.q))


def estimate_cotype_constant(
    space: MetricSpace,
    q: float,
    n: int,
    m: int,
    edges: str = "signs",
    budget: int = 2000,
    seed: int = 0,
    restarts: int = 20,
    initial: TorusFunction | None = None,
) -> ConstantEstimate:
    """Lower estimate of the cotype constant: maximize ``lhs/(m·rhs)``.

    Random restarts, each followed by single-entry hill climbing (replace one
    table entry with a fresh random point, keep it if the ratio improves).
    ``budget`` is the total number of proposals across restarts.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    N = (2 * m) ** n
    if N > MAX_TORUS_POINTS:
        raise BudgetExceeded(f"torus has {N} points")
    starts = []
    if initial is not None:
        starts.append(initial.values)
    n_random = restarts if (initial is None or budget > 0) else 0
    if initial is not None:
        n_random = max(0, n_random - 1)
    for r in range(n_random):
        starts.append(space.random_points(sample_rng(seed, 2 * r), N))
    if not starts:
        starts.append(space.random_points(sample_rng(seed, 0), N))
    per = budget // len(starts) if starts else 0
    extra = budget - per * len(starts)

    best = ConstantEstimate(-1.0, None, degenerate=True)
    evals = accepted = 0
    for r, V in enumerate(starts):
        f = TorusFunction(n, m, space, V)
        tr = _RatioTracker(f, q, edges)
        cur, deg = tr.ratio_of(tr.sl, tr.sr)
        evals += 1
        rng = sample_rng(seed, 2 * r + 1)
        steps = per + (1 if r < extra else 0)
        for _ in range(steps):
            if cur == math.inf:
                break
            k = int(rng.integers(0, N))
            p = space.random_points(rng, 1)[0]
            sl, sr = tr.propose(k, p)
            cand, _ = tr.ratio_of(sl, sr)
            evals += 1
            if cand > cur * (1 + 1e-12) + 1e-300:
                tr.values[k] = p
                tr.recompute()
                cur, deg = tr.ratio_of(tr.sl, tr.sr)
                accepted += 1
        if cur > best.c_hat or (best.witness is None):
            w = TorusFunction(n, m, space, tr.values)
            best = ConstantEstimate(
                cur, w, tr.sl ** (1 / q), (tr.norm * tr.sr) ** (1 / q), deg and cur == 0.0
            )
    best.evaluations = evals
    best.accepted = accepted
    best.c_hat = max(best.c_hat, 0.0)
    return best


# --------------------------------------------------------------------------
# equivalence of the two cotype definitions
# --------------------------------------------------------------------------


def subset_coefficient(n: int, i: int = 1) -> int:
    """``Σ_{A ⊆ [n], i ∈ A} 2^{|A|}`` by enumerating subsets."""
    total = 0
    for mask in range(2**n):
        if mask >> (i - 1) & 1:
            total += 2 ** bin(mask).count("1")
    return total


def subset_coefficient_binomial(n: int) -> int:
    """``Σ_{k=1}^n C(n−1, k−1) 2^k``."""
    return sum(math.comb(n - 1, k - 1) * 2**k for k in range(1, n + 1))


def displayed_coefficient(n: int) -> float:
    """The closed form ``3^{n−1}/2`` shown in the source derivation."""
    return 3 ** (n - 1) / 2


def linf_reduction_constant(q: float, n: int | None = None) -> float:
    """``(3^n / coefficient)^{1/q} = (3/2)^{1/q}`` from the enumerated coefficient."""
    if n is None:
        return 1.5 ** (1.0 / q)
    return (3.0**n / subset_coefficient(n)) ** (1.0 / q)


def _subsets(n: int):
    for k in range(n + 1):
        yield from itertools.combinations(range(n), k)


def _off_points(f: TorusFunction, A) -> np.ndarray:
    rest = [j for j in range(f.n) if j not in A]
    grid = np.array(list(itertools.product(range(f.L), repeat=len(rest))), dtype=np.int64)
    grid = grid.reshape(max(1, grid.shape[0]), len(rest))
    w = np.zeros((grid.shape[0], f.n), dtype=np.int64)
    w[:, rest] = grid
    return w


@dataclass
class _Tally:
    checked: int = 0
    failed: int = 0
    worst: float = math.inf  # smallest rhs - lhs

    def add(self, lhs: float, rhs: float, rel: float = 1e-9):
        self.checked += 1
        if rhs != math.inf:
            self.worst = min(self.worst, rhs - lhs)
        if not leq(lhs, rhs, rel=rel):
            self.failed += 1

    def as_dict(self):
        return {"checked": self.checked, "failed": self.failed, "worst_slack": self.worst}


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= tol_for(a, b)


@dataclass
class EquivalenceReport:
    q: float
    n: int
    m: int
    coefficient: int
    coefficient_formula: int
    coefficient_displayed: float
    reduction_constant: float
    c_signs_k: dict
    c_linf_m: float
    c_signs_2m: float
    per_function: dict
    first_chain: dict
    second_chain: dict
    second_chain_factor_one: bool
    degenerate: bool

    @property
    def passed(self) -> bool:
        ok = all(v["failed"] == 0 for v in self.per_function.values())
        return ok and self.first_chain["pass"] and self.second_chain["pass"]


def check_equivalence_chain(space: MetricSpace, q: float, n: int, m: int, family, rel: float = 1e-9) -> EquivalenceReport:
    """Both inequalities relating the ``{−1,0,1}^n`` and ``{−1,1}^n`` cotype constants.

    ``family`` holds functions on ``Z_{4m}^n``.  Their sublattice functions
    ``φ_η(y) = f(2y+η)`` on ``Z_{2m}^n`` feed the first inequality; the
    functions themselves feed the second.  Constants are per-family maxima:
    ``Ĉ^{Signs}_{m,k}`` over all restrictions ``φ_{A,w}`` with ``|A| = k``,
    ``Ĉ^{Linf}_m`` over the ``φ_η`` and ``Ĉ^{Signs}_{2m}`` over the family.
    """
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    for f in family:
        if f.n != n or f.L != 4 * m:
            raise ValueError("family functions must live on Z_{4m}^n")
    coef = subset_coefficient(n)
    for i in range(2, n + 1):
        if subset_coefficient(n, i) != coef:
            raise AssertionError("coefficient depends on i")  # pragma: no cover
    degenerate = False

    phis = [f.sublattice(eta) for f in family for eta in itertools.product((0, 1), repeat=n)]

    # restriction data for the first inequality
    restr = []  # per phi: list of (A, lhs_q, rhs_sum) with rhs_sum = Σ_δ Σ_y (no normalization)
    c_k = {k: 0.0 for k in range(1, n + 1)}
    for p in phis:
        rows = []
        for A in _subsets(n):
            for w in _off_points(p, A):
                g = p.restrict(A, w)
                lq = cotype_lhs_power(g, q) if A else 0.0
                rsum = cotype_rhs_power(g, q, "signs") * 2 ** len(A) if A else 0.0
                rows.append((A, lq, rsum))
                if A:
                    r, deg = ratio(lq ** (1 / q), m * (rsum / 2 ** len(A)) ** (1 / q))
                    degenerate |= deg
                    c_k[len(A)] = max(c_k[len(A)], r)
        restr.append(rows)
    c_star = max(c_k.values())

    t_ident_3n2n = _Tally()
    t_ident_support = _Tally()
    t_fixed = _Tally()
    t_first = _Tally()
    c_linf = 0.0
    phi_data = []
    for p, rows in zip(phis, restr):
        lq = cotype_lhs_power(p, q)
        lin_sum = cotype_rhs_power(p, q, "linf") * 3**n
        weighted = sum(2 ** len(A) * lqa for A, lqa, _ in rows)
        t_ident_3n2n.checked += 1
        t_ident_3n2n.failed += not _close(weighted, coef * lq)
        supp = sum(rs for _, _, rs in rows)
        t_ident_support.checked += 1
        t_ident_support.failed += not _close(supp, lin_sum)
        r, deg = ratio(lq ** (1 / q), m * (lin_sum / 3**n) ** (1 / q))
        degenerate |= deg
        c_linf = max(c_linf, r)
        phi_data.append((lq, lin_sum))
    for p, rows, (lq, lin_sum) in zip(phis, restr, phi_data):
        for A, lqa, rsa in rows:
            if A:
                t_fixed.add(lqa, c_k[len(A)] ** q / 2 ** len(A) * m**q * rsa if c_k[len(A)] < math.inf else math.inf, rel)
        # summed form: coef·lhs^q ≤ Ĉ*^q m^q Σ_{ε∈{−1,0,1}^n}
        t_first.add(coef * lq, c_star**q * m**q * lin_sum if c_star < math.inf else math.inf, rel)

    # second inequality, per f on Z_{4m}^n
    t_avg = _Tally()
    t_rewrite = _Tally()
    t_delta = _Tally()
    t_3n2n = _Tally()
    t_second = _Tally()
    c_signs_2m = 0.0
    S = sign_vectors(n)
    EL = linf_edges(n)
    partial = sum(math.comb(n, k) / 2 ** (n - k) for k in range(1, n + 1))
    for f in family:
        shift_sum = cotype_lhs_power(f, q, shift=2 * m)
        two_eps = sum(shift_power_sum(f, 2 * e, q) for e in EL)
        t_avg.add(shift_sum, c_linf**q * m**q / 3**n * two_eps if c_linf < math.inf else math.inf, rel)
        sign_sum = sum(shift_power_sum(f, d, q) for d in S)
        rewritten = 0.0
        for A in _subsets(n):
            mask = np.zeros(n, dtype=bool)
            mask[list(A)] = True
            acc = 0.0
            for d in S:
                dA = np.where(mask, d, 0)
                a = shift_power_sum(f, 2 * dA, q)
                acc += a
                b = shift_power_sum(f, np.where(mask, d, -d), q)
                c = shift_power_sum(f, d, q)
                t_delta.add(a, 2 ** (q - 1) * (b + c), rel)
            rewritten += acc / 2 ** (n - len(A))
        t_rewrite.checked += 1
        t_rewrite.failed += not _close(rewritten, two_eps)
        t_3n2n.add(two_eps, 2**q * partial * sign_sum, rel)
        t_3n2n.add(2**q * partial * sign_sum, 2**q * 3**n / 2**n * sign_sum, rel)
        lhs = shift_sum ** (1 / q)
        rs = (sign_sum / 2**n) ** (1 / q)
        r, deg = ratio(lhs, 2 * m * rs)
        degenerate |= deg
        c_signs_2m = max(c_signs_2m, r)
        t_second.add(lhs, 2 * c_linf * 2 * m * rs if c_linf < math.inf else math.inf, rel)

    red = linf_reduction_constant(q, n)
    first = {
        "lhs": c_linf,
        "rhs": 6 ** (1 / q) * c_star,
        "rederived_rhs": red * c_star,
        "pass": leq(c_linf, 6 ** (1 / q) * c_star, rel=rel),
        "rederived_pass": leq(c_linf, red * c_star, rel=rel),
    }
    second = {"lhs": c_signs_2m, "rhs": 2 * c_linf, "pass": leq(c_signs_2m, 2 * c_linf, rel=rel)}
    per = {
        "identity_3n_to_2n": t_ident_3n2n.as_dict(),
        "identity_sum_by_support": t_ident_support.as_dict(),
        "fixed_A_w": t_fixed.as_dict(),
        "first_summed": t_first.as_dict(),
        "averaged": t_avg.as_dict(),
        "identity_rewrite": t_rewrite.as_dict(),
        "delta_A": t_delta.as_dict(),
        "3n2n": t_3n2n.as_dict(),
        "second_per_function": t_second.as_dict(),
    }
    return EquivalenceReport(
        q, n, m, coef, subset_coefficient_binomial(n), displayed_coefficient(n), red,
        c_k, c_linf, c_signs_2m, per, first, second,
        leq(c_signs_2m, c_linf, rel=rel), degenerate,
    )


def random_family(space: MetricSpace, n: int, m: int, count: int, seed: int = 0, side: int | None = None) -> list:
    L = side or 4 * m
    out = []
    for k in range(count):
        V = space.random_points(sample_rng(seed, k), L**n)
        out.append(TorusFunction(n, L // 2, space, V, side=L))
    return out


# --------------------------------------------------------------------------
# quadratic inequalities and uniform convexity
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadraticInequality:
    """``Σ a_ij d(x_i,x_j)² ≤ Σ b_ij d(x_i,x_j)²``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64)
        B = np.array(self.B, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise ValueError("A and B must be square matrices of the same size")
        if np.any(A < 0) or np.any(B < 0):
            raise ValueError("quadratic inequality weights must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def size(self) -> int:
        return self.A.shape[0]


def npc_quadruple_inequality() -> QuadraticInequality:
    """Points ``(x, y, z, w)`` with w the midpoint of x, y:
    ``d(z,w)² + ¼d(x,y)² ≤ ½d(z,x)² + ½d(z,y)²``."""
    A = np.zeros((4, 4))
    B = np.zeros((4, 4))
    A[2, 3] = 1.0
    A[0, 1] = 0.25
    B[2, 0] = 0.5
    B[2, 1] = 0.5
    return QuadraticInequality(A, B)


def quadratic_inequality_check(ineq: QuadraticInequality, space: MetricSpace, points) -> float:
    P = space.as_batch(points)
    if P.shape[0] != ineq.size:
        raise ValueError(f"expected {ineq.size} points, got {P.shape[0]}")
    D2 = space.distance_matrix(P) ** 2
    return float(np.sum(ineq.B * D2) - np.sum(ineq.A * D2))


def uniform_convexity_check(x, y, q: float, K: float, p: float | None = None) -> float:
    """``‖x+y‖^q + ‖x−y‖^q − 2‖x‖^q − (2/K^q)‖y‖^q`` in ``ℓ_p`` (default p = q)."""
    if q < 2 or K < 1:
        raise ValueError("need q >= 2 and K >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise ValueError("x and y must have the same dimension")
    sp = LpSpace(x.shape[0], q if p is None else p)
    nx, ny, s, d = (float(sp.norm(v)[0]) for v in (x, y, x + y, x - y))
    return s**q + d**q - 2 * nx**q - 2 * ny**q / K**q
