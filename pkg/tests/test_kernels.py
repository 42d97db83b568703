import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cotype_lab import kernels
from cotype_lab.spaces import TreeSpace

from conftest import tree_from_prufer

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")

NP, JIT = kernels.NUMPY_KERNELS, kernels.JIT_KERNELS


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
@pytest.mark.parametrize("block", [1, 2])
def test_lp_rows_backends_agree(rng, p, block):
    A = rng.normal(size=(50, 6))
    B = rng.normal(size=(50, 6))
    a = NP["lp_rows"](A, B, p, block)
    b = JIT["lp_rows"](A, B, p, block)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)


def test_lp_rows_matches_norm(rng):
    A = rng.normal(size=(20, 4))
    B = rng.normal(size=(20, 4))
    np.testing.assert_allclose(kernels.lp_rows(A, B, 3.0), np.linalg.norm(A - B, 3, axis=1), rtol=1e-14)
    Z = (A[:, 0::2] - B[:, 0::2]) + 1j * (A[:, 1::2] - B[:, 1::2])
    np.testing.assert_allclose(kernels.lp_rows(A, B, 3.0, 2), np.linalg.norm(Z, 3, axis=1), rtol=1e-14)


@given(st.lists(st.integers(0, 5), min_size=4, max_size=4), st.integers(0, 2**31))
def test_tree_kernels_agree(code, seed):
    rng = np.random.default_rng(seed)
    T = TreeSpace(tree_from_prufer(code, rng.uniform(0.1, 3.0, size=5)))
    P = T.random_points(rng, 30)
    Q = T.random_points(rng, 30)
    args = (T.eu, T.ev, T.elen, T.D)
    np.testing.assert_allclose(NP["tree_rows"](P, Q, *args), JIT["tree_rows"](P, Q, *args), rtol=1e-14, atol=1e-15)
    for t in (0.0, 0.3, 0.5, 1.0):
        a = NP["tree_interp"](P, Q, t, *args, T.nxt, T.edge_of)
        b = JIT["tree_interp"](P, Q, t, *args, T.nxt, T.edge_of)
        # both encodings must name the same point
        np.testing.assert_allclose(NP["tree_rows"](a, b, *args), 0.0, atol=1e-12)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), max_size=200))
def test_stable_sum_backends(xs):
    x = np.array(xs, dtype=float)
    exact = math.fsum(xs)
    assert NP["stable_sum"](x) == exact
    assert abs(JIT["stable_sum"](x) - exact) <= 1e-9 * max(1.0, float(np.sum(np.abs(x))))


def test_active_backend_flag():
    assert kernels.USE_JIT == (kernels.HAVE_NUMBA and not kernels.JIT_DISABLED)
    assert kernels._ACTIVE is (kernels.JIT_KERNELS if kernels.USE_JIT else kernels.NUMPY_KERNELS)
