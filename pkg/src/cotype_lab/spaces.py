"""Metric-space backends behind one distance oracle.

Every point, whatever the backend, is a 1-D float array of the space's fixed
``width``; a batch of points is a ``(k, width)`` array.  That keeps torus
functions, martingale levels and measures as plain numpy arrays:

========================  =========================================
backend                   point encoding
========================  =========================================
LpSpace                   coordinates
FiniteSpace               ``[index]``
TreeSpace                 ``[edge, offset]``  (offset in [0, length])
SnowflakeSpace            base encoding
DisjointUnion             ``[cluster, index]``
PythagoreanProduct        concatenated component encodings
WassersteinSpace          probability vector over the base points
========================  =========================================
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from . import kernels
from ._tol import tol_for


class UnsupportedOperation(NotImplementedError):
    """The backend (or backend/strategy pair) cannot perform the request."""


class MetricError(ValueError):
    """Input data does not define a metric."""

    def __init__(self, message: str, triple: tuple | None = None):
        super().__init__(message)
        self.triple = triple


class MetricSpace:
    """Base class.  Subclasses implement :meth:`distances` on batches."""

    width: int = 1
    finite: bool = False
    geodesic: bool = False

    def distances(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x, y) -> float:
        X = self.as_batch(x)
        Y = self.as_batch(y)
        if X.shape[0] != 1 or Y.shape[0] != 1:
            raise ValueError("distance() takes single points; use distances() for batches")
        return float(self.distances(X, Y)[0])

    def as_batch(self, pts) -> np.ndarray:
        arr = np.asarray(pts, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.width:
            raise ValueError(
                f"{type(self).__name__} expects points of width {self.width}, got shape {np.shape(pts)}"
            )
        return arr

    def midpoints(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        raise UnsupportedOperation(f"{type(self).__name__} has no geodesic midpoints")

    def random_points(self, rng: np.random.Generator, k: int) -> np.ndarray:
        raise NotImplementedError

    def enumerate_points(self) -> np.ndarray:
        raise UnsupportedOperation(f"{type(self).__name__} is not finite")

    def distance_matrix(self, pts: np.ndarray | None = None) -> np.ndarray:
        if pts is None:
            pts = self.enumerate_points()
        pts = self.as_batch(pts)
        k = pts.shape[0]
        out = np.zeros((k, k))
        for i in range(k):
            out[i] = self.distances(np.repeat(pts[i : i + 1], k, axis=0), pts)
        return out

    def diameter(self) -> float:
        return float(self.distance_matrix().max()) if self.finite else float("inf")


@dataclass(frozen=True, eq=False)
class LpSpace(MetricSpace):
    """``ℓ_p^dim``.  With ``block=2`` coordinates are read in pairs as complex
    numbers, i.e. the space is ``ℓ_p^{dim/2}(ℂ)``."""

    dim: int
    p: float = 2.0
    block: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not (self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.block not in (1, 2) or self.dim % self.block:
            raise ValueError("block must be 1 or 2 and divide the dimension")
        object.__setattr__(self, "p", float(self.p))

    @property
    def width(self):
        return self.dim

    geodesic = True

    def distances(self, X, Y):
        return kernels.lp_rows(self.as_batch(X), self.as_batch(Y), self.p, self.block)

    def norm(self, X) -> np.ndarray:
        X = self.as_batch(X)
        return self.distances(X, np.zeros_like(X))

    def midpoints(self, X, Y):
        return 0.5 * self.as_batch(X) + 0.5 * self.as_batch(Y)

    def random_points(self, rng, k):
        return rng.standard_normal((k, self.dim))


class FiniteSpace(MetricSpace):
    """Finite metric given by a symmetric distance matrix; points are indices."""

    finite = True

    def __init__(self, matrix, labels=None, coords=None, check: bool = True):
        D = np.array(matrix, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise MetricError("distance matrix must be square and nonempty")
        if check:
            _validate_matrix(D)
        D.setflags(write=False)
        self.D = D
        self.size = D.shape[0]
        self.labels = list(labels) if labels is not None else list(range(self.size))
        self.coords = coords

    def point(self, i: int) -> np.ndarray:
        if not 0 <= i < self.size:
            raise ValueError(f"index {i} out of range")
        return np.array([float(i)])

    def _idx(self, X):
        X = self.as_batch(X)
        idx = X[:, 0].astype(np.int64)
        if np.any(idx != X[:, 0]) or np.any(idx < 0) or np.any(idx >= self.size):
            raise ValueError("finite-space points must be integer indices in range")
        return idx

    def distances(self, X, Y):
        return self.D[self._idx(X), self._idx(Y)]

    def random_points(self, rng, k):
        return rng.integers(0, self.size, size=(k, 1)).astype(np.float64)

    def enumerate_points(self):
        return np.arange(self.size, dtype=np.float64)[:, None]

    def distance_matrix(self, pts=None):
        if pts is None:
            return np.array(self.D)
        idx = self._idx(pts)
        return self.D[np.ix_(idx, idx)]


def _validate_matrix(D: np.ndarray) -> None:
    if not np.all(np.isfinite(D)):
        raise MetricError("distance matrix has non-finite entries")
    if np.any(np.diag(D) != 0):
        raise MetricError("distance matrix must have zero diagonal")
    if not np.array_equal(D, D.T):
        i, j = np.argwhere(D != D.T)[0]
        raise MetricError(f"distance matrix not symmetric at ({i}, {j})", (int(i), int(j)))
    off = D[~np.eye(D.shape[0], dtype=bool)]
    if np.any(off <= 0):
        raise MetricError("distinct points must be at positive distance")
    N = D.shape[0]
    for j in range(N):
        # D[i,k] <= D[i,j] + D[j,k] for all i, k
        via = D[:, j : j + 1] + D[j : j + 1, :]
        bad = D - via
        tol = np.maximum(1e-12, 1e-9 * np.maximum(D, via))
        viol = np.argwhere(bad > tol)
        if viol.size:
            i, k = viol[0]
            raise MetricError(
                f"triangle inequality violated: d({i},{k})={D[i, k]} > d({i},{j})+d({j},{k})={via[i, k]}",
                (int(i), int(j), int(k)),
            )


class TreeSpace(MetricSpace):
    """Metric tree (1-dimensional simplicial complex of a weighted tree).

    Points are ``[edge_index, offset]`` where the offset is measured from the
    edge's first endpoint ``u``.
    """

    width = 2
    geodesic = True

    def __init__(self, edges):
        edges = [(str(u), str(v), float(length)) for u, v, length in edges]
        if not edges:
            raise MetricError("a tree needs at least one edge")
        names: list[str] = []
        index: dict[str, int] = {}
        for u, v, length in edges:
            if not length > 0 or not np.isfinite(length):
                raise MetricError(f"edge {u}-{v} must have positive finite length")
            if u == v:
                raise MetricError(f"self-loop at {u}")
            for name in (u, v):
                if name not in index:
                    index[name] = len(names)
                    names.append(name)
        N = len(names)
        if len(edges) != N - 1:
            raise MetricError(f"{len(edges)} edges on {N} vertices: not a tree (cycle or disconnected)")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(N)]
        eu = np.empty(len(edges), dtype=np.int64)
        ev = np.empty(len(edges), dtype=np.int64)
        elen = np.empty(len(edges))
        for e, (u, v, length) in enumerate(edges):
            a, b = index[u], index[v]
            eu[e], ev[e], elen[e] = a, b, length
            adj[a].append((b, e))
            adj[b].append((a, e))
        D = np.full((N, N), np.inf)
        nxt = np.full((N, N), -1, dtype=np.int64)
        edge_of = np.full((N, N), -1, dtype=np.int64)
        for a, b_e in enumerate(adj):
            for b, e in b_e:
                edge_of[a, b] = e
        for s in range(N):
            D[s, s] = 0.0
            nxt[s, s] = s
            queue = deque([s])
            while queue:
                a = queue.popleft()
                for b, e in adj[a]:
                    if D[s, b] == np.inf:
                        D[s, b] = D[s, a] + elen[e]
                        # first hop from s toward b
                        nxt[s, b] = b if a == s else nxt[s, a]
                        queue.append(b)
        if np.any(np.isinf(D)):
            raise MetricError("tree is disconnected")
        self.names = names
        self.index = index
        self.adj = adj
        self.eu, self.ev, self.elen = eu, ev, elen
        self.D, self.nxt, self.edge_of = D, nxt, edge_of
        self.n_vertices = N
        self.n_edges = len(edges)

    @classmethod
    def path(cls, lengths) -> TreeSpace:
        return cls([(f"v{i}", f"v{i + 1}", length) for i, length in enumerate(lengths)])

    @classmethod
    def star(cls, lengths) -> TreeSpace:
        return cls([("c", f"l{i}", length) for i, length in enumerate(lengths)])

    def vertex(self, name) -> np.ndarray:
        v = self.index[str(name)] if str(name) in self.index else int(name)
        e = self.adj[v][0][1]
        return np.array([float(e), 0.0 if self.eu[e] == v else self.elen[e]])

    def vertices(self) -> np.ndarray:
        return np.stack([self.vertex(self.names[v]) for v in range(self.n_vertices)])

    def point(self, edge: int, offset: float) -> np.ndarray:
        if not 0 <= edge < self.n_edges or not 0 <= offset <= self.elen[edge]:
            raise ValueError("tree point outside its edge")
        return np.array([float(edge), float(offset)])

    def as_batch(self, pts):
        X = super().as_batch(pts)
        e = X[:, 0]
        if np.any(e != np.floor(e)) or np.any(e < 0) or np.any(e >= self.n_edges):
            raise ValueError("tree point has an invalid edge index")
        if np.any(X[:, 1] < 0) or np.any(X[:, 1] > self.elen[e.astype(np.int64)]):
            raise ValueError("tree offset outside [0, edge length]")
        return X

    def distances(self, X, Y):
        return kernels.tree_rows(self.as_batch(X), self.as_batch(Y), self.eu, self.ev, self.elen, self.D)

    def interpolate(self, X, Y, t: float) -> np.ndarray:
        """Point at fraction ``t`` of the way along the geodesic from X to Y (row-wise)."""
        return kernels.tree_interp(
            self.as_batch(X), self.as_batch(Y), t, self.eu, self.ev, self.elen, self.D, self.nxt, self.edge_of
        )

    def midpoints(self, X, Y):
        return self.interpolate(X, Y, 0.5)

    def random_points(self, rng, k):
        e = rng.integers(0, self.n_edges, size=k)
        return np.column_stack([e.astype(np.float64), rng.uniform(0.0, 1.0, size=k) * self.elen[e]])

    def vertex_distance_to_points(self, v: int, X: np.ndarray) -> np.ndarray:
        X = self.as_batch(X)
        e = X[:, 0].astype(np.int64)
        o = X[:, 1]
        return np.minimum(o + self.D[v, self.eu[e]], self.elen[e] - o + self.D[v, self.ev[e]])


@dataclass(frozen=True, eq=False)
class SnowflakeSpace(MetricSpace):
    """``(X, d^θ)`` for ``θ ∈ (0, 1]``."""

    base: MetricSpace
    theta: float

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError("snowflake exponent must lie in (0, 1]")

    @property
    def width(self):
        return self.base.width

    @property
    def finite(self):
        return self.base.finite

    def distances(self, X, Y):
        return self.base.distances(X, Y) ** self.theta

    def random_points(self, rng, k):
        return self.base.random_points(rng, k)

    def enumerate_points(self):
        return self.base.enumerate_points()


class DisjointUnion(MetricSpace):
    """Disjoint union of bounded finite spaces; cross-cluster distance is the
    larger of the two cluster diameters.  Points are ``[cluster, index]``."""

    width = 2
    finite = True

    def __init__(self, clusters):
        clusters = list(clusters)
        if not clusters:
            raise ValueError("need at least one cluster")
        for c in clusters:
            if not isinstance(c, FiniteSpace):
                raise ValueError("disjoint-union clusters must be FiniteSpace instances")
        self.clusters = clusters
        self.diams = np.array([c.diameter() for c in clusters])

    def _split(self, X):
        X = self.as_batch(X)
        c = X[:, 0].astype(np.int64)
        if np.any(c != X[:, 0]) or np.any(c < 0) or np.any(c >= len(self.clusters)):
            raise ValueError("invalid cluster index")
        return X, c

    def distances(self, X, Y):
        X, cx = self._split(X)
        Y, cy = self._split(Y)
        out = np.maximum(self.diams[cx], self.diams[cy])
        for ci, cl in enumerate(self.clusters):
            mask = (cx == ci) & (cy == ci)
            if mask.any():
                out[mask] = cl.distances(X[mask, 1:], Y[mask, 1:])
        return out

    def random_points(self, rng, k):
        c = rng.integers(0, len(self.clusters), size=k)
        idx = np.array([rng.integers(0, self.clusters[ci].size) for ci in c])
        return np.column_stack([c, idx]).astype(np.float64)

    def enumerate_points(self):
        return np.array(
            [[ci, i] for ci, cl in enumerate(self.clusters) for i in range(cl.size)], dtype=np.float64
        )


class PythagoreanProduct(MetricSpace):
    """ℓ_2-product: ``d((x_i), (y_i)) = sqrt(Σ d_i(x_i, y_i)^2)``."""

    def __init__(self, factors):
        self.factors = list(factors)
        if not self.factors:
            raise ValueError("need at least one factor")
        self.widths = [f.width for f in self.factors]
        self.offsets = np.concatenate([[0], np.cumsum(self.widths)])
        self.width = int(self.offsets[-1])
        self.geodesic = all(f.geodesic for f in self.factors)
        self.finite = all(f.finite for f in self.factors)

    def parts(self, X):
        X = self.as_batch(X)
        return [X[:, self.offsets[i] : self.offsets[i + 1]] for i in range(len(self.factors))]

    def distances(self, X, Y):
        acc = 0.0
        for f, a, b in zip(self.factors, self.parts(X), self.parts(Y)):
            acc = acc + f.distances(a, b) ** 2
        return np.sqrt(acc)

    def midpoints(self, X, Y):
        if not self.geodesic:
            raise UnsupportedOperation("product has a non-geodesic factor")
        return np.hstack([f.midpoints(a, b) for f, a, b in zip(self.factors, self.parts(X), self.parts(Y))])

    def random_points(self, rng, k):
        return np.hstack([f.random_points(rng, k) for f in self.factors])

    def enumerate_points(self):
        grids = [f.enumerate_points() for f in self.factors]
        rows = [np.hstack(combo) for combo in itertools.product(*grids)]
        return np.array(rows)


class WassersteinSpace(MetricSpace):
    """Finite-support Wasserstein-p space over a finite base space.

    Points are probability vectors over the base points; distances come from
    an exact linear-programming transport solve on the support pairs.
    """

    def __init__(self, base: FiniteSpace, p: float = 2.0):
        if not isinstance(base, FiniteSpace):
            raise ValueError("Wasserstein base must be a FiniteSpace")
        if p < 1:
            raise ValueError("Wasserstein exponent must be >= 1")
        self.base = base
        self.p = float(p)
        self.width = base.size

    def as_batch(self, pts):
        X = super().as_batch(pts)
        if np.any(X < 0) or np.any(np.abs(X.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("Wasserstein points must be probability vectors")
        return X

    def dirac(self, i: int) -> np.ndarray:
        v = np.zeros(self.width)
        v[i] = 1.0
        return v

    def transport_cost(self, a: np.ndarray, b: np.ndarray) -> float:
        """Optimal cost ``min Σ π_ij d_ij^p`` over couplings of a and b."""
        sa = np.flatnonzero(a > 0)
        sb = np.flatnonzero(b > 0)
        C = self.base.D[np.ix_(sa, sb)] ** self.p
        r, c = len(sa), len(sb)
        if r == 1 or c == 1:
            plan = np.outer(a[sa], b[sb])
            return float(np.sum(plan * C))
        A_eq = np.zeros((r + c, r * c))
        for i in range(r):
            A_eq[i, i * c : (i + 1) * c] = 1.0
        for j in range(c):
            A_eq[r + j, j::c] = 1.0
        b_eq = np.concatenate([a[sa], b[sb]])
        res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        if res.status != 0:
            raise RuntimeError(f"transport LP failed: {res.message}")
        return float(max(res.fun, 0.0))

    def distances(self, X, Y):
        X = self.as_batch(X)
        Y = self.as_batch(Y)
        out = np.empty(X.shape[0])
        for r in range(X.shape[0]):
            if np.array_equal(X[r], Y[r]):
                out[r] = 0.0
            else:
                out[r] = self.transport_cost(X[r], Y[r]) ** (1.0 / self.p)
        return out

    def random_points(self, rng, k):
        support = max(1, min(self.width, 3))
        out = np.zeros((k, self.width))
        for r in range(k):
            idx = rng.choice(self.width, size=support, replace=False)
            out[r, idx] = rng.dirichlet(np.ones(support))
        out /= out.sum(axis=1, keepdims=True)
        return out


# --------------------------------------------------------------------------
# construction, checks
# --------------------------------------------------------------------------


def load_finite_matrix(path) -> np.ndarray:
    """CSV: first line N, then N rows of N comma-separated decimals."""
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    N = int(lines[0])
    if len(lines) != N + 1:
        raise ValueError(f"{path}: expected {N} matrix rows, found {len(lines) - 1}")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        vals = [float(tok) for tok in ln.split(",")]
        if len(vals) != N:
            raise ValueError(f"{path}:{lineno}: expected {N} entries, found {len(vals)}")
        rows.append(vals)
    return np.array(rows)


def load_tree_edges(path) -> list[tuple[str, str, float]]:
    """Lines ``u v length``."""
    edges = []
    for lineno, ln in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'u v length'")
        edges.append((parts[0], parts[1], float(parts[2])))
    return edges


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "[":
            depth += 1
            if depth == 1:
                continue
        elif ch == "]":
            depth -= 1
            if depth == 0:
                continue
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return [p.strip() for p in out if p.strip()]


def build_space(spec) -> MetricSpace:
    """Build a space from a spec string or pass an existing space through.

    Grammar: ``l<p>:<dim>`` (``linf`` allowed), ``c<p>:<n>`` (complex ℓ_p^n),
    ``finite:<file>``, ``tree:<file>``, ``snow:<θ>:<spec>``,
    ``wass:<p>:<file>``, ``union:<spec>,<spec>``, ``pyth:<spec>,<spec>``.
    Nested union/product arguments may be wrapped in ``[...]``.
    """
    if isinstance(spec, MetricSpace):
        return spec
    if not isinstance(spec, str):
        raise TypeError("space spec must be a string or a MetricSpace")
    s = spec.strip()
    head, _, rest = s.partition(":")
    if head == "finite":
        return FiniteSpace(load_finite_matrix(rest))
    if head == "tree":
        return TreeSpace(load_tree_edges(rest))
    if head == "snow":
        theta, _, inner = rest.partition(":")
        return SnowflakeSpace(build_space(inner), float(theta))
    if head == "wass":
        p, _, path = rest.partition(":")
        return WassersteinSpace(FiniteSpace(load_finite_matrix(path)), float(p))
    if head == "union":
        return DisjointUnion([build_space(p) for p in _split_top(rest)])
    if head == "pyth":
        return PythagoreanProduct([build_space(p) for p in _split_top(rest)])
    if head[:1] in ("l", "c") and rest:
        ptxt = head[1:]
        p = np.inf if ptxt == "inf" else float(ptxt)
        dim = int(rest)
        if head[0] == "c":
            return LpSpace(2 * dim, p, block=2)
        return LpSpace(dim, p)
    raise ValueError(f"unrecognised space spec {spec!r}")


def midpoint(space: MetricSpace, x, y) -> np.ndarray:
    return space.midpoints(space.as_batch(x), space.as_batch(y))[0]


@dataclass
class AxiomReport:
    triples: int
    worst_triangle_slack: float
    symmetry_violation: float
    identity_violations: int
    triangle_violations: int
    worst_triple: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.triangle_violations == 0 and self.identity_violations == 0 and self.symmetry_violation == 0


def verify_metric_axioms(space: MetricSpace, sample="exhaustive", seed: int = 0) -> AxiomReport:
    """Triangle/symmetry/identity audit.

    ``sample`` is ``"exhaustive"`` (finite backends), an integer number of
    random triples, or an explicit batch of points (all ordered triples).
    """
    if isinstance(sample, str):
        if sample != "exhaustive":
            raise ValueError("sample must be 'exhaustive', an int or a point batch")
        pts = space.enumerate_points()
        M = space.distance_matrix(pts)
        return _audit_matrix(M, pts)
    if isinstance(sample, (int, np.integer)):
        rng = np.random.Generator(np.random.Philox(seed))
        X = space.random_points(rng, int(sample))
        Y = space.random_points(rng, int(sample))
        Z = space.random_points(rng, int(sample))
        dxy, dyz, dxz = space.distances(X, Y), space.distances(Y, Z), space.distances(X, Z)
        dyx = space.distances(Y, X)
        slack = dxy + dyz - dxz
        tol = np.maximum(1e-12, 1e-12 * np.maximum(dxz, dxy + dyz))
        bad = slack < -tol
        same = space.distances(X, X)
        worst = int(np.argmin(slack))
        return AxiomReport(
            triples=int(sample),
            worst_triangle_slack=float(slack.min()),
            symmetry_violation=float(np.max(np.abs(dxy - dyx))),
            identity_violations=int(np.count_nonzero(same != 0)),
            triangle_violations=int(bad.sum()),
            worst_triple=(X[worst], Y[worst], Z[worst]),
        )
    pts = space.as_batch(sample)
    return _audit_matrix(space.distance_matrix(pts), pts)


def _audit_matrix(M: np.ndarray, pts: np.ndarray) -> AxiomReport:
    k = M.shape[0]
    sym = float(np.max(np.abs(M - M.T))) if k else 0.0
    ident = int(np.count_nonzero(np.diag(M) != 0))
    # slack[i, j, l] = d(i,j) + d(j,l) - d(i,l)
    slack = M[:, :, None] + M[None, :, :] - M[:, None, :]
    scale = np.maximum(M[:, None, :], M[:, :, None] + M[None, :, :])
    bad = slack < -np.maximum(1e-12, 1e-12 * scale)
    worst_idx = np.unravel_index(int(np.argmin(slack)), slack.shape) if k else None
    return AxiomReport(
        triples=k**3,
        worst_triangle_slack=float(slack.min()) if k else 0.0,
        symmetry_violation=sym,
        identity_violations=ident,
        triangle_violations=int(bad.sum()),
        worst_triple=tuple(int(i) for i in worst_idx) if worst_idx is not None else None,
    )


@dataclass
class QuadrupleReport:
    slack: float
    tol: float
    midpoint: np.ndarray = field(repr=False)

    @property
    def nonpositive_curvature(self) -> bool:
        return self.slack <= self.tol

    @property
    def nonnegative_curvature(self) -> bool:
        return self.slack >= -self.tol


def cat0_quadruple_check(space: MetricSpace, x, y, z, tol: float | None = None) -> QuadrupleReport:
    """Signed slack of ``d(z,w)² + ¼d(x,y)² − ½d(z,x)² − ½d(z,y)²`` with w the midpoint of x, y."""
    w = midpoint(space, x, y)
    dzw = space.distance(z, w)
    dxy = space.distance(x, y)
    dzx = space.distance(z, x)
    dzy = space.distance(z, y)
    lhs = dzw**2 + 0.25 * dxy**2
    rhs = 0.5 * dzx**2 + 0.5 * dzy**2
    if tol is None:
        tol = tol_for(lhs, rhs)
    return QuadrupleReport(slack=lhs - rhs, tol=tol, midpoint=w)
