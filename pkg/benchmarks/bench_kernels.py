"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --rows 100000 --repeat 5

Kernel timings call both tables directly, so one process covers both
backends.  ``--end-to-end`` also runs one CLI experiment in two child
processes, with and without ``COTYPE_LAB_DISABLE_JIT=1``.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from cotype_lab import kernels
from cotype_lab.spaces import TreeSpace


def random_tree(rng: np.random.Generator, vertices: int) -> TreeSpace:
    edges = [(str(int(rng.integers(0, v))), str(v), float(rng.uniform(0.2, 2.0))) for v in range(1, vertices)]
    return TreeSpace(edges)


def cases(rows: int, seed: int):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(rows, 8))
    B = rng.normal(size=(rows, 8))
    T = random_tree(rng, 64)
    P = T.random_points(rng, rows)
    Q = T.random_points(rng, rows)
    targs = (T.eu, T.ev, T.elen, T.D)
    x = rng.normal(size=rows)
    return {
        "lp_rows p=3": ("lp_rows", (A, B, 3.0, 1)),
        "lp_rows complex p=3": ("lp_rows", (A, B, 3.0, 2)),
        "tree_rows": ("tree_rows", (P, Q, *targs)),
        "tree_interp t=0.5": ("tree_interp", (P, Q, 0.5, *targs, T.nxt, T.edge_of)),
        "stable_sum": ("stable_sum", (x,)),
    }


def best_of(fn, args, repeat: int) -> float:
    fn(*args)  # compile / warm caches
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def end_to_end(config: str) -> dict:
    out = {}
    for label, flag in (("jit", "0"), ("numpy", "1")):
        env = dict(os.environ, COTYPE_LAB_DISABLE_JIT=flag)
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-m", "cotype_lab.cli", "--config", config, "-o", os.devnull], env=env, check=False)
        out[label] = time.perf_counter() - t0
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--end-to-end", metavar="CONFIG", help="experiment config to time in both modes")
    args = ap.parse_args(argv)

    if not kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy kernels exist", file=sys.stderr)
        return 1
    print(f"rows={args.rows} repeat={args.repeat} (best wall time, seconds)")
    print(f"{'kernel':<22}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for label, (key, fargs) in cases(args.rows, args.seed).items():
        t_np = best_of(kernels.NUMPY_KERNELS[key], fargs, args.repeat)
        t_jit = best_of(kernels.JIT_KERNELS[key], fargs, args.repeat)
        print(f"{label:<22}{t_np:>12.5f}{t_jit:>12.5f}{t_np / t_jit:>9.1f}x")
    if args.end_to_end:
        t = end_to_end(args.end_to_end)
        print(f"end-to-end {args.end_to_end}: numpy {t['numpy']:.2f} s, numba {t['jit']:.2f} s (includes import and compile)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
