"""Command-line experiment runner.

Every run is one operation with a flat parameter set, taken from a
``key=value`` config file and/or ``--key value`` flags (flags win).  The
result is one report with the fixed schema::

    op, params, lhs, rhs, bound, ratio, slack, pass, seed, wall_ms

``slack`` is signed so that ``slack >= 0`` means the checked inequality holds.
Exit status is 0 on pass, 1 when an inequality fails and 2 on usage or IO
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cotype as ct
from . import embeddings as emb
from . import graphgap as gg
from . import io as fio
from . import martingales as mg
from . import measures as ms
from ._tol import tol_for
from .spaces import UnsupportedOperation, build_space, cat0_quadruple_check, verify_metric_axioms

REPORT_KEYS = ("op", "params", "lhs", "rhs", "bound", "ratio", "slack", "pass", "seed", "wall_ms")

OPS = (
    "verify-cotype", "decompose-proof", "estimate-constant", "equivalence", "estimate-beta",
    "pisier", "monotonicity", "translation-identity", "grid-distortion", "p-alpha",
    "obstruction", "spectral-gap", "relative-gap", "quadratic", "axioms", "cat0",
)

# key -> (kind, help); kinds: str, int, float, file, choice:<a>|<b>
KEYS = {
    "op": ("str", "operation name"),
    "space": ("str", "space spec, e.g. l2:4, tree:edges.txt, snow:0.5:l1:3"),
    "map": ("str", "barycenter map: canonical, linear, tree or frechet"),
    "q": ("float", "cotype / moment exponent"),
    "beta": ("float", "barycentric constant"),
    "p": ("float", "ℓ_p exponent of the obstruction spiral"),
    "alpha": ("float", "distortion threshold for p-alpha"),
    "gamma": ("float", "spectral-gap constant or obstruction Γ"),
    "n": ("int", "dimension"),
    "m": ("int", "scaling parameter"),
    "seed": ("int", "PRNG seed"),
    "samples": ("int", "number of sampled instances"),
    "budget": ("int", "search proposals"),
    "restarts": ("int", "search restarts"),
    "tol": ("float", "absolute tolerance override"),
    "rel": ("float", "relative tolerance override"),
    "edges": ("choice:signs|linf", "edge set of the cotype right side"),
    "function": ("file", "torus-function file"),
    "measure": ("file", "measure file"),
    "points": ("file", "point configuration file (one encoded point per line)"),
    "graph": ("graph", "graph file, or complete:<N> / cycle:<N>"),
    "partition": ("partition", "partition file, or trivial / singletons"),
    "ineq": ("ineq", "quadratic-inequality file, or npc"),
    "output": ("str", "report path ('-' for stdout)"),
    "format": ("choice:json|csv", "report format"),
}


class ConfigError(ValueError):
    """Bad configuration; always maps to exit status 2."""


@dataclass
class ExperimentConfig:
    op: str | None = None
    values: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)  # key -> "path:line" or "--flag"

    @property
    def seed(self) -> int:
        return int(self.values.get("seed", 0))

    @property
    def output(self) -> str:
        return self.values.get("output", "-")

    @property
    def format(self) -> str:
        return self.values.get("format", "json")


def _convert(key: str, raw: str, where: str):
    if key not in KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    kind = KEYS[key][0]
    raw = raw.strip()
    if raw == "":
        raise ConfigError(f"{where}: empty value for {key!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            v = float(raw)
            if math.isnan(v):
                raise ValueError("nan")
            return v
    except ValueError:
        raise ConfigError(f"{where}: malformed value for {key!r}: {raw!r}") from None
    if kind.startswith("choice:"):
        opts = kind[7:].split("|")
        if raw not in opts:
            raise ConfigError(f"{where}: {key} must be one of {opts}, got {raw!r}")
        return raw
    builtin = {"graph": ("complete:", "cycle:"), "partition": ("trivial", "singletons"), "ineq": ("npc",)}
    if kind == "file" or (kind in builtin and not raw.startswith(builtin[kind])):
        if not Path(raw).is_file():
            raise ConfigError(f"{where}: referenced file {raw!r} does not exist")
    return raw


def parse_config_text(text: str, name: str = "<config>", require_op: bool = True) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for k, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{name}:{k}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in cfg.values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        cfg.values[key] = _convert(key, raw, where)
        cfg.source[key] = where
    cfg.op = cfg.values.pop("op", None)
    if require_op and cfg.op is None:
        raise ConfigError(f"{name}: op required")
    return cfg


def load_config(path, require_op: bool = True) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config_text(text, str(path), require_op)


def apply_overrides(cfg: ExperimentConfig, flags: dict) -> ExperimentConfig:
    for key, raw in flags.items():
        if raw is None:
            continue
        if key == "op":
            cfg.op = raw
            continue
        cfg.values[key] = _convert(key, raw, f"--{key}")
        cfg.source[key] = f"--{key}"
    return cfg


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------


class _Params:
    """Parameter access with domain checks; records every value an op uses."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.used: dict = {}

    def get(self, key, default=None, check=None, what=""):
        if key in self.cfg.values:
            v = self.cfg.values[key]
        elif default is None:
            raise ConfigError(f"{self.cfg.op}: parameter {key!r} is required")
        else:
            v = default
        if check is not None and not check(v):
            where = self.cfg.source.get(key, "default")
            raise ConfigError(f"{where}: {key}={v!r} out of range ({what})")
        self.used[key] = v
        return v

    def opt(self, key):
        if key in self.cfg.values:
            self.used[key] = self.cfg.values[key]
            return self.cfg.values[key]
        return None

    def q(self, default=2.0):
        return self.get("q", default, lambda v: 1 <= v < math.inf, "need 1 <= q < inf")

    def beta(self, default=1.0):
        return self.get("beta", default, lambda v: v > 0, "need beta > 0")

    def n(self, default=2):
        return self.get("n", default, lambda v: v >= 1, "need n >= 1")

    def m(self, default=2):
        return self.get("m", default, lambda v: v >= 1, "need m >= 1")

    def samples(self, default=1):
        return self.get("samples", default, lambda v: v >= 1, "need samples >= 1")

    def space(self):
        spec = self.get("space")
        return build_space(spec)

    def bmap(self, space, q):
        return ms.resolve_map(self.get("map", "canonical"), space, q)


@dataclass
class Result:
    lhs: float
    rhs: float
    bound: float = math.nan
    ratio: float = math.nan
    slack: float = math.nan
    passed: bool = True


def _ratio(a: float, b: float) -> float:
    return ct.ratio(a, b)[0]


def _functions(P: _Params, space, n: int, m: int, side: int | None = None) -> list:
    path = P.opt("function")
    if path is not None:
        f = fio.load_torus_function(path, space)
        if f.n != n or (side is None and f.m != m):
            raise ConfigError(f"{path}: function has n={f.n}, m={f.m}; config says n={n}, m={m}")
        return [f]
    return ct.random_family(space, n, m, P.samples(), P.get("seed", 0), side=side or 2 * m)


def op_verify_cotype(P: _Params) -> Result:
    sp = P.space()
    q, beta, n, m = P.q(), P.beta(), P.n(), P.m()
    rel = P.get("rel", 1e-9)
    worst = None
    ok = True
    for f in _functions(P, sp, n, m):
        r = ct.verify_main_inequality(f, q, beta, rel)
        ok &= r.passed
        if worst is None or _ratio(r.lhs, r.rhs_sign) > _ratio(worst.lhs, worst.rhs_sign):
            worst = r
    return Result(worst.lhs, worst.rhs_sign, worst.bound, _ratio(worst.lhs, worst.rhs_sign), worst.slack, ok)


def op_decompose_proof(P: _Params) -> Result:
    sp = P.space()
    q, beta, n, m = P.q(), P.beta(), P.n(), P.get("m", 1, lambda v: v >= 1, "need m >= 1")
    rel = P.get("rel", 1e-9)
    bmap = P.bmap(sp, q)
    ok, worst = True, None
    for f in _functions(P, sp, n, m, side=4 * m):
        r = ct.decompose_main_proof(f, q, beta, bmap, rel)
        ok &= r.passed
        if worst is None or r.slack < worst.slack:
            worst = r
    return Result(worst.lhs, worst.rhs_sign, worst.bound, _ratio(worst.lhs, worst.rhs_sign), worst.slack, ok)


def op_estimate_constant(P: _Params) -> Result:
    sp = P.space()
    q, n, m = P.q(), P.n(), P.m()
    edges = P.get("edges", "signs")
    est = ct.estimate_cotype_constant(sp, q, n, m, edges, P.get("budget", 2000), P.get("seed", 0), P.get("restarts", 20))
    beta = P.opt("beta")
    if beta is not None and edges == "signs":
        bound = ct.theorem_bound(n, m, q, beta) / m
        return Result(est.lhs, est.rhs, bound, est.c_hat, bound - est.c_hat, est.c_hat <= bound + tol_for(bound))
    return Result(est.lhs, est.rhs, math.nan, est.c_hat, math.nan, True)


def op_equivalence(P: _Params) -> Result:
    sp = P.space()
    q, n, m = P.q(), P.n(), P.get("m", 1, lambda v: v >= 1, "need m >= 1")
    fam = ct.random_family(sp, n, m, P.samples(50), P.get("seed", 0))
    r = ct.check_equivalence_chain(sp, q, n, m, fam, P.get("rel", 1e-9))
    first = r.first_chain
    return Result(first["lhs"], first["rhs"], r.second_chain["rhs"], r.c_signs_2m, first["rhs"] - first["lhs"], r.passed)


def op_estimate_beta(P: _Params) -> Result:
    sp = P.space()
    q = P.q()
    path = P.opt("measure")
    if path is not None:
        return _fixed_measure_beta(P, sp, q, fio.load_measure(path, sp))
    est = ms.estimate_beta(sp, P.bmap(sp, q), q, P.samples(500), P.get("seed", 0))
    beta = P.opt("beta")
    if beta is None:
        return Result(est.beta_hat, math.nan, math.nan, est.beta_hat, math.nan, True)
    ok = est.beta_hat <= beta + P.get("tol", 1e-9)
    return Result(est.beta_hat, beta, beta, _ratio(est.beta_hat, beta), beta - est.beta_hat, ok)


def _fixed_measure_beta(P: _Params, sp, q, mu) -> Result:
    """One measure from a file against sampled base points x."""
    bmap = P.bmap(sp, q)
    beta = P.beta()
    seed = P.get("seed", 0)
    need, worst = 0.0, None
    for i in range(P.samples(500)):
        x = sp.random_points(ms.sample_rng(seed, i), 1)[0]
        total, near, spread = ms.barycentric_terms(sp, bmap, mu.merged(), x, q)
        den = total - near
        if den > tol_for(total, near):
            need = max(need, (spread / den) ** (1.0 / q))
        elif spread > tol_for(total, near, spread):
            need = math.inf
        lhs = near + spread / beta**q
        if worst is None or total - lhs < worst[1] - worst[0]:
            worst = (lhs, total)
    a, b = worst
    return Result(a, b, beta, need, b - a, b - a >= -tol_for(a, b))


def _random_martingales(P: _Params, sp, q):
    n = P.get("n", 3, lambda v: 0 <= v <= mg.MAX_CUBE_DIM, f"need 0 <= n <= {mg.MAX_CUBE_DIM}")
    bmap = P.bmap(sp, q)
    seed = P.get("seed", 0)
    for i in range(P.samples(100)):
        rng = ms.sample_rng(seed, i)
        H = sp.random_points(rng, 2**n)
        x = sp.random_points(rng, 1)[0]
        yield mg.build_cube_martingale(sp, bmap, H), x


def op_pisier(P: _Params) -> Result:
    sp = P.space()
    q, beta = P.q(), P.beta()
    ok, worst = True, None
    for mart, x in _random_martingales(P, sp, q):
        r = mg.check_pisier(mart, x, q, beta)
        ok &= r.passed
        if worst is None or _ratio(r.lhs, r.rhs) > _ratio(worst.lhs, worst.rhs):
            worst = r
    return Result(worst.lhs, worst.rhs, beta, _ratio(worst.lhs, worst.rhs), worst.slack, ok)


def op_monotonicity(P: _Params) -> Result:
    sp = P.space()
    q = P.q()
    ok, worst = True, None
    for mart, x in _random_martingales(P, sp, q):
        r = mg.check_monotonicity(mart, x, q)
        ok &= r.passed
        if r.worst_index is not None and (worst is None or r.worst_step < worst.worst_step):
            worst = r
    if worst is None:
        return Result(0.0, 0.0, math.nan, 0.0, 0.0, ok)
    k = worst.worst_index
    a, b = float(worst.moments[k]), float(worst.moments[k + 1])
    return Result(a, b, math.nan, _ratio(a, b), worst.worst_step, ok)


def op_translation_identity(P: _Params) -> Result:
    sp = P.space()
    q, n, m = P.q(), P.n(3), P.m()
    tol = P.get("tol", 1e-12)
    bmap = P.bmap(sp, q)
    ok, dev, checked, bad = True, 0.0, 0, 0
    for f in _functions(P, sp, n, m):
        r = mg.check_translation_identity_all(f, bmap, tol)
        ok &= r.passed
        dev = max(dev, r.max_deviation)
        checked += r.checked
        bad += r.violations
    return Result(dev, tol, tol, bad / checked if checked else 0.0, tol - dev, ok)


def op_grid_distortion(P: _Params) -> Result:
    m, n = P.m(), P.n()
    q = P.get("q", 2.0, lambda v: 2 <= v < math.inf, "need 2 <= q < inf")
    beta = P.get("beta", 2.0, lambda v: v > 0, "need beta > 0")
    psi = emb.psi_embedding(m).cycle_distortion
    gb = emb.grid_distortion_lower_bound(m, n, q, psi, beta)
    trivial = min(emb.make_trivial_embedding(k, m, n, q).distortion() for k in ("Id", "Forget"))
    return Result(gb.bound, trivial, gb.asymptote, _ratio(gb.bound, trivial), trivial - gb.bound, gb.bound <= trivial + tol_for(trivial))


def op_p_alpha(P: _Params) -> Result:
    m, n = P.m(), P.n()
    alpha = P.get("alpha", 2.0, lambda v: v >= 2, "need alpha >= 2")
    r = emb.p_alpha_bounds(m, n, alpha, P.get("beta", 2.0, lambda v: v > 0, "need beta > 0"))
    return Result(r.lower, r.upper, alpha, _ratio(r.lower, r.upper), r.upper - r.lower, r.lower <= r.upper)


def op_obstruction(P: _Params) -> Result:
    p = P.get("p", 3.0, lambda v: 1 <= v < math.inf, "need 1 <= p < inf")
    n, m = P.n(4), P.m()
    q = P.q()
    gamma = P.get("gamma", 1.0, lambda v: v > 0, "need gamma > 0")
    tol = P.get("tol", 1e-12)
    f = emb.build_obstruction_function(p, n, m)
    c = emb.verify_obstruction_identities(f, P.samples(4096), P.get("seed", 0))
    err = max(c.max_shift_error, c.max_step_error)
    cert = emb.certificate_value(q, p, n, gamma)
    return Result(err, tol, cert, c.step_distance / math.pi, tol - err, c.passed(tol))


def _graph(P: _Params) -> gg.RegularGraph:
    spec = P.get("graph")
    for name, make in (("complete:", gg.RegularGraph.complete), ("cycle:", gg.RegularGraph.cycle)):
        if spec.startswith(name):
            try:
                return make(int(spec[len(name):]))
            except ValueError as exc:
                raise ConfigError(f"graph={spec!r}: {exc}") from None
    return gg.load_graph(spec)


def _load_points(path, sp) -> np.ndarray:
    rows = []
    for k, ln in fio._lines(path):
        rows.append(fio._floats(path, k, ln.replace(",", " ").split()))
    try:
        return sp.as_batch(rows)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _gap(P: _Params, relative: bool) -> Result:
    sp = P.space()
    g = _graph(P)
    part = None
    if relative:
        spec = P.get("partition")
        if spec == "trivial":
            part = ms.Partition.trivial(g.N)
        elif spec == "singletons":
            part = ms.Partition.singletons(g.N)
        else:
            part = gg.load_partition(spec)
    path = P.opt("points")
    if path is not None:
        X = _load_points(path, sp)
        r = gg.spectral_gap(g, sp, X) if part is None else gg.relative_spectral_gap(g, part, sp, X)
    else:
        r, _ = gg.search_gap(g, sp, P.samples(), P.get("seed", 0), part)
    gamma = P.opt("gamma")
    if gamma is None:
        return Result(r.lhs, r.rhs, math.nan, r.gamma_hat, math.nan, True)
    slack = gamma * r.rhs - r.lhs
    return Result(r.lhs, r.rhs, gamma, r.gamma_hat, slack, slack >= -tol_for(r.lhs, gamma * r.rhs))


def op_spectral_gap(P: _Params) -> Result:
    return _gap(P, False)


def op_relative_gap(P: _Params) -> Result:
    return _gap(P, True)


def op_quadratic(P: _Params) -> Result:
    sp = P.space()
    spec = P.get("ineq", "npc")
    ineq = ct.npc_quadruple_inequality() if spec == "npc" else fio.load_quadratic_inequality(spec)
    seed = P.get("seed", 0)
    ok, worst = True, None
    for i in range(P.samples(200)):
        X = sp.random_points(ms.sample_rng(seed, i), ineq.size)
        if spec == "npc":
            X[3] = sp.midpoints(X[0:1], X[1:2])[0]
        D2 = sp.distance_matrix(X) ** 2
        a, b = float(np.sum(ineq.A * D2)), float(np.sum(ineq.B * D2))
        ok &= (b - a) >= -tol_for(a, b)
        if worst is None or b - a < worst[1] - worst[0]:
            worst = (a, b)
    a, b = worst
    return Result(a, b, math.nan, _ratio(a, b), b - a, ok)


def op_axioms(P: _Params) -> Result:
    sp = P.space()
    sample = "exhaustive" if sp.finite and "samples" not in P.cfg.values else P.samples(1000)
    r = verify_metric_axioms(sp, sample, P.get("seed", 0))
    bad = r.triangle_violations + r.identity_violations
    return Result(float(bad), float(r.triples), 0.0, _ratio(bad, r.triples), r.worst_triangle_slack, r.ok)


def op_cat0(P: _Params) -> Result:
    sp = P.space()
    seed = P.get("seed", 0)
    ok, worst = True, None
    for i in range(P.samples(200)):
        x, y, z = sp.random_points(ms.sample_rng(seed, i), 3)
        r = cat0_quadruple_check(sp, x, y, z)
        ok &= r.nonpositive_curvature
        if worst is None or r.slack > worst[0].slack:
            worst = (r, x, y, z)
    r, x, y, z = worst
    a = sp.distance(z, r.midpoint) ** 2 + 0.25 * sp.distance(x, y) ** 2
    b = 0.5 * sp.distance(z, x) ** 2 + 0.5 * sp.distance(z, y) ** 2
    return Result(a, b, math.nan, _ratio(a, b), -r.slack, ok)


DISPATCH = {
    "verify-cotype": op_verify_cotype,
    "decompose-proof": op_decompose_proof,
    "estimate-constant": op_estimate_constant,
    "equivalence": op_equivalence,
    "estimate-beta": op_estimate_beta,
    "pisier": op_pisier,
    "monotonicity": op_monotonicity,
    "translation-identity": op_translation_identity,
    "grid-distortion": op_grid_distortion,
    "p-alpha": op_p_alpha,
    "obstruction": op_obstruction,
    "spectral-gap": op_spectral_gap,
    "relative-gap": op_relative_gap,
    "quadratic": op_quadratic,
    "axioms": op_axioms,
    "cat0": op_cat0,
}


def run(cfg: ExperimentConfig) -> dict:
    if cfg.op is None:
        raise ConfigError("op required")
    if cfg.op not in DISPATCH:
        raise ConfigError(f"unknown op {cfg.op!r}; choose from {', '.join(OPS)}")
    P = _Params(cfg)
    P.get("seed", 0)
    t0 = time.perf_counter()
    res = DISPATCH[cfg.op](P)
    wall = (time.perf_counter() - t0) * 1000.0
    unused = sorted(set(cfg.values) - set(P.used) - {"output", "format"})
    if unused:
        raise ConfigError(f"{cfg.op}: parameters not used by this op: {', '.join(unused)}")
    params = {k: P.used[k] for k in sorted(P.used) if k != "seed"}
    return {
        "op": cfg.op,
        "params": params,
        "lhs": float(res.lhs),
        "rhs": float(res.rhs),
        "bound": float(res.bound),
        "ratio": float(res.ratio),
        "slack": float(res.slack),
        "pass": bool(res.passed),
        "seed": cfg.seed,
        "wall_ms": wall,
    }


# --------------------------------------------------------------------------
# report serialization
# --------------------------------------------------------------------------


def _num(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _json(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _num(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def format_report(report: dict, fmt: str = "json") -> str:
    if list(report) != list(REPORT_KEYS):
        raise ValueError("report keys do not match the schema")
    if fmt == "json":
        body = ",\n".join(f"  {json.dumps(k)}: {_json(report[k])}" for k in REPORT_KEYS)
        return "{\n" + body + "\n}\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_KEYS)
        row = []
        for k in REPORT_KEYS:
            v = report[k]
            if k == "params":
                row.append(_json(v))
            elif isinstance(v, bool):
                row.append("true" if v else "false")
            elif isinstance(v, float):
                row.append(_num(v))
            else:
                row.append(str(v))
        w.writerow(row)
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report(text: str, fmt: str = "json") -> dict:
    if fmt == "json":
        return json.loads(text)
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) != 2 or tuple(rows[0]) != REPORT_KEYS:
        raise ValueError("CSV report must be one header line and one data line")
    out = {}
    for k, v in zip(rows[0], rows[1]):
        if k == "params":
            out[k] = json.loads(v)
        elif k == "op":
            out[k] = v
        elif k == "pass":
            out[k] = v == "true"
        elif k == "seed":
            out[k] = int(v)
        else:
            out[k] = float(v)
    return out


def emit_report(report: dict, fmt: str = "json", path=None) -> None:
    text = format_report(report, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cotype-lab",
        description="Run one metric-cotype experiment and print a report.",
        epilog="operations: " + ", ".join(OPS),
    )
    ap.add_argument("op", nargs="?", help="operation (may also come from the config file)")
    ap.add_argument("-c", "--config", help="key=value config file")
    ap.add_argument("-o", "--output", help="report path ('-' for stdout)")
    ap.add_argument("-f", "--format", help="json or csv")
    for key, (_, text) in KEYS.items():
        if key in ("op", "output", "format"):
            continue
        ap.add_argument(f"--{key}", help=text)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        if args.config:
            cfg = load_config(args.config, require_op=args.op is None)
        else:
            cfg = ExperimentConfig()
        apply_overrides(cfg, flags)
        report = run(cfg)
        emit_report(report, cfg.format, cfg.output)
    except (ConfigError, ValueError, OSError, UnsupportedOperation, ct.BudgetExceeded) as exc:
        print(f"cotype-lab: error: {exc}", file=sys.stderr)
        return 2
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
