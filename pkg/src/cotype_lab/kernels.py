"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure numpy (or
plain Python) fallback with the same signature.  The module-level names are
bound to the JIT versions unless numba is missing or the environment variable
``COTYPE_LAB_DISABLE_JIT`` is set to a non-empty value other than ``0``.

``COTYPE_LAB_THREADS`` caps numba's worker pool.  The kernels themselves are
serial so results never depend on the worker count.
"""

import math
import os

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

JIT_DISABLED = os.environ.get("COTYPE_LAB_DISABLE_JIT", "") not in ("", "0")
USE_JIT = HAVE_NUMBA and not JIT_DISABLED

if HAVE_NUMBA and os.environ.get("COTYPE_LAB_THREADS"):
    try:
        numba.set_num_threads(
            max(1, min(int(os.environ["COTYPE_LAB_THREADS"]), numba.config.NUMBA_NUM_THREADS))
        )
    except ValueError:
        pass


# --------------------------------------------------------------------------
# numpy fallbacks
# --------------------------------------------------------------------------


def lp_rows_np(A, B, p, block):
    diff = np.asarray(A, dtype=np.float64) - np.asarray(B, dtype=np.float64)
    if block > 1:
        k = diff.shape[0]
        diff = np.sqrt(np.sum(diff.reshape(k, -1, block) ** 2, axis=2))
    else:
        diff = np.abs(diff)
    if np.isinf(p):
        return diff.max(axis=1) if diff.shape[1] else np.zeros(diff.shape[0])
    if p == 1.0:
        return diff.sum(axis=1)
    if p == 2.0:
        return np.sqrt(np.sum(diff * diff, axis=1))
    return np.sum(diff**p, axis=1) ** (1.0 / p)


def tree_rows_np(P, Q, eu, ev, elen, D):
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    e1 = P[:, 0].astype(np.int64)
    e2 = Q[:, 0].astype(np.int64)
    o1, o2 = P[:, 1], Q[:, 1]
    l1, l2 = elen[e1], elen[e2]
    a_opts = ((eu[e1], o1), (ev[e1], l1 - o1))
    b_opts = ((eu[e2], o2), (ev[e2], l2 - o2))
    best = np.full(P.shape[0], np.inf)
    for a, da in a_opts:
        for b, db in b_opts:
            best = np.minimum(best, da + D[a, b] + db)
    same = e1 == e2
    best[same] = np.abs(o1[same] - o2[same])
    return best


def _tree_interp_one(e1, o1, e2, o2, t, eu, ev, elen, D, nxt, edge_of):
    if e1 == e2:
        return e1, o1 + t * (o2 - o1)
    best = np.inf
    ba = bb = -1
    da_best = db_best = 0.0
    for a, da in ((eu[e1], o1), (ev[e1], elen[e1] - o1)):
        for b, db in ((eu[e2], o2), (ev[e2], elen[e2] - o2)):
            tot = da + D[a, b] + db
            if tot < best:
                best, ba, bb, da_best, db_best = tot, a, b, da, db
    s = t * best
    if s <= da_best:
        off = o1 - s if ba == eu[e1] else o1 + s
        return e1, min(max(off, 0.0), elen[e1])
    s -= da_best
    cur = ba
    while cur != bb:
        nx = nxt[cur, bb]
        e = edge_of[cur, nx]
        length = elen[e]
        if s <= length:
            off = s if eu[e] == cur else length - s
            return e, min(max(off, 0.0), length)
        s -= length
        cur = nx
    s = min(s, db_best)
    off = s if bb == eu[e2] else elen[e2] - s
    return e2, min(max(off, 0.0), elen[e2])


def tree_interp_np(P, Q, t, eu, ev, elen, D, nxt, edge_of):
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    out = np.empty_like(P)
    for r in range(P.shape[0]):
        e, o = _tree_interp_one(
            int(P[r, 0]), P[r, 1], int(Q[r, 0]), Q[r, 1], t, eu, ev, elen, D, nxt, edge_of
        )
        out[r, 0] = e
        out[r, 1] = o
    return out


def stable_sum_np(x):
    return math.fsum(np.asarray(x, dtype=np.float64).ravel().tolist())


# --------------------------------------------------------------------------
# numba versions
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def lp_rows_jit(A, B, p, block):
        k, w = A.shape
        out = np.empty(k)
        nb = w // block
        for r in range(k):
            acc = 0.0
            for j in range(nb):
                if block == 1:
                    c = abs(A[r, j] - B[r, j])
                else:
                    s = 0.0
                    for t in range(block):
                        d = A[r, j * block + t] - B[r, j * block + t]
                        s += d * d
                    c = math.sqrt(s)
                if math.isinf(p):
                    if c > acc:
                        acc = c
                elif p == 1.0:
                    acc += c
                elif p == 2.0:
                    acc += c * c
                else:
                    acc += c**p
            if math.isinf(p) or p == 1.0:
                out[r] = acc
            elif p == 2.0:
                out[r] = math.sqrt(acc)
            else:
                out[r] = acc ** (1.0 / p)
        return out

    @njit(cache=True)
    def tree_rows_jit(P, Q, eu, ev, elen, D):
        k = P.shape[0]
        out = np.empty(k)
        for r in range(k):
            e1 = int(P[r, 0])
            e2 = int(Q[r, 0])
            o1 = P[r, 1]
            o2 = Q[r, 1]
            if e1 == e2:
                out[r] = abs(o1 - o2)
                continue
            a0, a1 = eu[e1], ev[e1]
            b0, b1 = eu[e2], ev[e2]
            d0 = o1
            d1 = elen[e1] - o1
            f0 = o2
            f1 = elen[e2] - o2
            best = d0 + D[a0, b0] + f0
            c = d0 + D[a0, b1] + f1
            if c < best:
                best = c
            c = d1 + D[a1, b0] + f0
            if c < best:
                best = c
            c = d1 + D[a1, b1] + f1
            if c < best:
                best = c
            out[r] = best
        return out

    @njit(cache=True)
    def tree_interp_jit(P, Q, t, eu, ev, elen, D, nxt, edge_of):
        k = P.shape[0]
        out = np.empty_like(P)
        for r in range(k):
            e1 = int(P[r, 0])
            e2 = int(Q[r, 0])
            o1 = P[r, 1]
            o2 = Q[r, 1]
            if e1 == e2:
                out[r, 0] = e1
                out[r, 1] = o1 + t * (o2 - o1)
                continue
            best = np.inf
            ba = -1
            bb = -1
            da_best = 0.0
            db_best = 0.0
            for ia in range(2):
                a = eu[e1] if ia == 0 else ev[e1]
                da = o1 if ia == 0 else elen[e1] - o1
                for ib in range(2):
                    b = eu[e2] if ib == 0 else ev[e2]
                    db = o2 if ib == 0 else elen[e2] - o2
                    tot = da + D[a, b] + db
                    if tot < best:
                        best = tot
                        ba = a
                        bb = b
                        da_best = da
                        db_best = db
            s = t * best
            if s <= da_best:
                off = o1 - s if ba == eu[e1] else o1 + s
                out[r, 0] = e1
                out[r, 1] = min(max(off, 0.0), elen[e1])
                continue
            s -= da_best
            cur = ba
            done = False
            while cur != bb:
                nx = nxt[cur, bb]
                e = edge_of[cur, nx]
                length = elen[e]
                if s <= length:
                    off = s if eu[e] == cur else length - s
                    out[r, 0] = e
                    out[r, 1] = min(max(off, 0.0), length)
                    done = True
                    break
                s -= length
                cur = nx
            if not done:
                s = min(s, db_best)
                off = s if bb == eu[e2] else elen[e2] - s
                out[r, 0] = e2
                out[r, 1] = min(max(off, 0.0), elen[e2])
        return out

    @njit(cache=True)
    def stable_sum_jit(x):
        # Kahan-Babuska (Neumaier) compensated summation, fixed index order.
        s = 0.0
        c = 0.0
        for v in x.ravel():
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
        return s + c


NUMPY_KERNELS = {
    "lp_rows": lp_rows_np,
    "tree_rows": tree_rows_np,
    "tree_interp": tree_interp_np,
    "stable_sum": stable_sum_np,
}

if HAVE_NUMBA:
    JIT_KERNELS = {
        "lp_rows": lp_rows_jit,
        "tree_rows": tree_rows_jit,
        "tree_interp": tree_interp_jit,
        "stable_sum": lambda x: float(stable_sum_jit(np.ascontiguousarray(x, dtype=np.float64))),
    }
else:  # pragma: no cover
    JIT_KERNELS = dict(NUMPY_KERNELS)

_ACTIVE = JIT_KERNELS if USE_JIT else NUMPY_KERNELS


def lp_rows(A, B, p, block=1):
    """Row-wise ``ℓ_p`` distances (``block=2`` treats pairs of coordinates as complex entries)."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    return _ACTIVE["lp_rows"](A, B, float(p), int(block))


def tree_rows(P, Q, eu, ev, elen, D):
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    return _ACTIVE["tree_rows"](P, Q, eu, ev, elen, D)


def tree_interp(P, Q, t, eu, ev, elen, D, nxt, edge_of):
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    return _ACTIVE["tree_interp"](P, Q, float(t), eu, ev, elen, D, nxt, edge_of)


def stable_sum(x) -> float:
    """Compensated sum in fixed index order."""
    return float(_ACTIVE["stable_sum"](np.asarray(x, dtype=np.float64)))
