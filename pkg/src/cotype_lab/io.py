"""Readers and writers for the plain-text input formats.

All files are UTF-8 with LF line endings.  Blank lines and ``#`` comments are
ignored; errors name the file and line.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .cotype import QuadraticInequality, TorusFunction
from .embeddings import FiniteEmbedding
from .measures import FinitelySupportedMeasure
from .spaces import FiniteSpace, MetricSpace


def _lines(path) -> list[tuple[int, str]]:
    text = Path(path).read_text(encoding="utf-8")
    out = []
    for k, ln in enumerate(text.splitlines(), start=1):
        ln = ln.split("#", 1)[0].strip()
        if ln:
            out.append((k, ln))
    return out


def _floats(path, k: int, fields) -> list[float]:
    try:
        return [float(x) for x in fields]
    except ValueError as exc:
        raise ValueError(f"{path}:{k}: {exc}") from None


def _csv(ln: str) -> list[str]:
    return [x.strip() for x in ln.split(",") if x.strip()]


def load_measure(path, space: MetricSpace) -> FinitelySupportedMeasure:
    """Rows ``point, weight``; the point is its encoding (a finite-space index is a one-field encoding)."""
    pts, w = [], []
    for k, ln in _lines(path):
        vals = _floats(path, k, _csv(ln))
        if len(vals) != space.width + 1:
            raise ValueError(f"{path}:{k}: expected {space.width} point fields and a weight, got {len(vals)} fields")
        pts.append(vals[:-1])
        w.append(vals[-1])
    if not pts:
        raise ValueError(f"{path}: no atoms")
    return FinitelySupportedMeasure(space.as_batch(pts), np.array(w))


def save_measure(path, mu: FinitelySupportedMeasure) -> None:
    rows = [",".join(f"{v:.17g}" for v in (*p, w)) for p, w in zip(mu.points, mu.weights)]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_torus_function(path, space: MetricSpace) -> TorusFunction:
    """Header ``n m dim`` then ``(2m)^n`` coordinate lines in index order (first coordinate fastest)."""
    lines = _lines(path)
    if not lines:
        raise ValueError(f"{path}: empty torus-function file")
    k0, head = lines[0]
    parts = head.replace(",", " ").split()
    if len(parts) != 3:
        raise ValueError(f"{path}:{k0}: expected header 'n m dim'")
    try:
        n, m, dim = (int(x) for x in parts)
    except ValueError:
        raise ValueError(f"{path}:{k0}: header values must be integers") from None
    if dim != space.width:
        raise ValueError(f"{path}:{k0}: dim {dim} does not match the space's point width {space.width}")
    rows = []
    for k, ln in lines[1:]:
        vals = _floats(path, k, ln.replace(",", " ").split())
        if len(vals) != dim:
            raise ValueError(f"{path}:{k}: expected {dim} coordinates, got {len(vals)}")
        rows.append(vals)
    expect = (2 * m) ** n
    if len(rows) != expect:
        raise ValueError(f"{path}: expected {expect} value lines for n={n}, m={m}, got {len(rows)}")
    return TorusFunction(n, m, space, np.array(rows).reshape(expect, dim))


def save_torus_function(path, f: TorusFunction) -> None:
    out = [f"{f.n} {f.m} {f.space.width}"]
    out += [",".join(f"{v:.17g}" for v in row) for row in f.values]
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def load_quadratic_inequality(path) -> QuadraticInequality:
    """``n`` then n rows of A then n rows of B, comma separated."""
    lines = _lines(path)
    if not lines:
        raise ValueError(f"{path}: empty file")
    k0, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise ValueError(f"{path}:{k0}: first line must be the size n") from None
    if len(lines) != 1 + 2 * n:
        raise ValueError(f"{path}: expected {2 * n} matrix rows after the size line, got {len(lines) - 1}")
    rows = []
    for k, ln in lines[1:]:
        vals = _floats(path, k, _csv(ln))
        if len(vals) != n:
            raise ValueError(f"{path}:{k}: expected {n} entries, got {len(vals)}")
        rows.append(vals)
    return QuadraticInequality(np.array(rows[:n]), np.array(rows[n:]))


def load_embedding(path, domain: FiniteSpace, codomain: MetricSpace, name: str = "") -> FiniteEmbedding:
    """Rows ``domain_index, coordinates...``; every domain point must appear exactly once."""
    N = domain.size
    table = np.full((N, codomain.width), np.nan)
    seen = np.zeros(N, dtype=bool)
    for k, ln in _lines(path):
        fields = _csv(ln)
        try:
            i = int(fields[0])
        except ValueError:
            raise ValueError(f"{path}:{k}: domain index must be an integer") from None
        if not 0 <= i < N:
            raise ValueError(f"{path}:{k}: domain index {i} out of range 0..{N - 1}")
        if seen[i]:
            raise ValueError(f"{path}:{k}: domain index {i} listed twice")
        vals = _floats(path, k, fields[1:])
        if len(vals) != codomain.width:
            raise ValueError(f"{path}:{k}: expected {codomain.width} coordinates, got {len(vals)}")
        table[i] = vals
        seen[i] = True
    if not seen.all():
        raise ValueError(f"{path}: missing domain indices {np.flatnonzero(~seen)[:10].tolist()}")
    return FiniteEmbedding(domain, codomain, table, name or Path(path).stem)
