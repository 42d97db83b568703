"""Poincaré-type ratios of point configurations indexed by regular graphs.

For a configuration ``x : V → X`` the nonlinear spectral gap compares the
average squared distance over all ordered vertex pairs with the average over
edges.  A single configuration only ever gives a lower bound for the best
constant of a graph (which is a supremum over configurations), so every report
carries that caveat.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .measures import Partition, sample_rng
from .spaces import MetricSpace

ONE_SIDED = (
    "per-configuration ratio: a lower bound on the graph's constant for this space, "
    "never a certificate of expansion"
)


@dataclass(frozen=True)
class RegularGraph:
    N: int
    edges: tuple
    degree: int = field(init=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("graph needs at least one vertex")
        E = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.N and 0 <= v < self.N):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{self.N - 1}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            E.append(key)
        deg = np.zeros(self.N, dtype=np.int64)
        for u, v in E:
            deg[u] += 1
            deg[v] += 1
        if self.N > 1 and not E:
            raise ValueError("graph has no edges")
        if np.any(deg != deg[0]):
            bad = int(np.argmax(deg != deg[0]))
            raise ValueError(f"graph is not regular: vertex {bad} has degree {deg[bad]}, vertex 0 has {deg[0]}")
        object.__setattr__(self, "edges", tuple(E))
        object.__setattr__(self, "degree", int(deg[0]))
        if not self._connected():
            raise ValueError("graph is not connected")

    def _connected(self) -> bool:
        adj = [[] for _ in range(self.N)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        todo = deque([0])
        while todo:
            u = todo.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return len(seen) == self.N

    @classmethod
    def complete(cls, N: int) -> RegularGraph:
        return cls(N, tuple((u, v) for u in range(N) for v in range(u + 1, N)))

    @classmethod
    def cycle(cls, N: int) -> RegularGraph:
        if N < 3:
            raise ValueError("a cycle needs N >= 3")
        return cls(N, tuple((u, (u + 1) % N) for u in range(N)))

    @property
    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)


def load_graph(path) -> RegularGraph:
    """First line ``N d``, then one ``u v`` line per edge; the declared degree is checked."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}:1: expected 'N d'")
    N, d = int(head[0]), int(head[1])
    edges = []
    for k, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{k}: expected 'u v', got {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    g = RegularGraph(N, tuple(edges))
    if g.degree != d:
        raise ValueError(f"{path}: header says degree {d}, edges give {g.degree}")
    return g


def load_partition(path) -> Partition:
    """One line of whitespace- or comma-separated block labels, one label per vertex."""
    text = Path(path).read_text(encoding="utf-8").replace(",", " ")
    labels = text.split()
    if not labels:
        raise ValueError(f"{path}: empty partition file")
    return Partition.from_labels(labels)


@dataclass
class GapReport:
    lhs: float
    rhs: float
    gamma_hat: float
    degenerate: bool = False
    blocks: tuple | None = None
    note: str = ONE_SIDED

    @property
    def rho_hat(self) -> float:
        return self.gamma_hat


def _ratio(lhs: float, rhs: float) -> tuple[float, bool]:
    if rhs > 0:
        return lhs / rhs, False
    # a connected graph with equal points on every edge is constant
    return 0.0, True


def _squared_distance_matrix(space: MetricSpace, X: np.ndarray) -> np.ndarray:
    N = X.shape[0]
    iu, iv = np.triu_indices(N, k=1)
    D2 = np.zeros((N, N))
    if iu.size:
        d = space.distances(X[iu], X[iv])
        D2[iu, iv] = d * d
        D2[iv, iu] = d * d
    return D2


def _edge_average(graph: RegularGraph, space: MetricSpace, X: np.ndarray) -> float:
    E = graph.edge_array
    if E.shape[0] == 0:
        return 0.0
    d = space.distances(X[E[:, 0]], X[E[:, 1]])
    return kernels.stable_sum(d * d) / E.shape[0]


def _points(graph: RegularGraph, space: MetricSpace, points) -> np.ndarray:
    X = space.as_batch(points)
    if X.shape[0] != graph.N:
        raise ValueError(f"expected {graph.N} points, got {X.shape[0]}")
    return X


def spectral_gap(graph: RegularGraph, space: MetricSpace, points) -> GapReport:
    X = _points(graph, space, points)
    N = graph.N
    lhs = kernels.stable_sum(_squared_distance_matrix(space, X).ravel()) / (N * N)
    rhs = _edge_average(graph, space, X)
    g, deg = _ratio(lhs, rhs)
    return GapReport(lhs, rhs, g, deg)


def relative_spectral_gap(graph: RegularGraph, partition: Partition, space: MetricSpace, points) -> GapReport:
    """Partition-averaged left side; with the trivial partition it equals :func:`spectral_gap`."""
    X = _points(graph, space, points)
    if partition.size != graph.N:
        raise ValueError(f"partition covers {partition.size} vertices, graph has {graph.N}")
    D2 = _squared_distance_matrix(space, X)
    terms = [kernels.stable_sum(D2[np.ix_(b, b)].ravel()) / len(b) for b in partition.blocks]
    lhs = kernels.stable_sum(np.array(terms)) / graph.N
    rhs = _edge_average(graph, space, X)
    g, deg = _ratio(lhs, rhs)
    return GapReport(lhs, rhs, g, deg, blocks=partition.blocks)


def search_gap(graph: RegularGraph, space: MetricSpace, samples: int = 200, seed: int = 0,
               partition: Partition | None = None) -> tuple[GapReport, np.ndarray]:
    """Largest ratio over random configurations: one-sided evidence only."""
    best, arg = None, None
    for s in range(samples):
        X = space.random_points(sample_rng(seed, s), graph.N)
        r = spectral_gap(graph, space, X) if partition is None else relative_spectral_gap(graph, partition, space, X)
        if not r.degenerate and (best is None or r.gamma_hat > best.gamma_hat):
            best, arg = r, X
    if best is None:
        best = GapReport(0.0, 0.0, 0.0, True)
    return best, arg
