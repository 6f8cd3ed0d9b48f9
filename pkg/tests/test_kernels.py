import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mcpmix import kernels
from mcpmix.kernels import _numba, _numpy

# reordered float sums differ in the last bits only
CLOSE = dict(rtol=1e-12, atol=1e-13)


@pytest.fixture
def conv_case(rng):
    x = rng.uniform(size=(2, 9, 7, 3))
    w = rng.normal(0, 0.3, (3, 3, 3, 5))
    b = rng.normal(0, 0.1, 5)
    return x, w, b


@pytest.mark.parametrize("stride", [1, 2])
def test_conv_backends_agree(conv_case, stride, rng):
    x, w, b = conv_case
    a = _numpy.conv2d_forward(x, w, b, stride)
    n = _numba.conv2d_forward(x, w, b, stride)
    assert a.shape == n.shape
    assert np.allclose(a, n, **CLOSE)
    g = rng.normal(size=a.shape)
    assert np.allclose(_numpy.conv2d_backward_input(g, w, x.shape, stride),
                       _numba.conv2d_backward_input(g, w, x.shape, stride), **CLOSE)
    for u, v in zip(_numpy.conv2d_backward_params(x, g, 3, stride),
                    _numba.conv2d_backward_params(x, g, 3, stride)):
        assert np.allclose(u, v, **CLOSE)


def test_conv_matches_loop_oracle(conv_case):
    x, w, b = conv_case
    out = _numpy.conv2d_forward(x, w, b, 1)
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    i, j, o = 4, 2, 3
    ref = b[o] + sum(xp[1, i + di, j + dj, c] * w[di, dj, c, o]
                     for di in range(3) for dj in range(3) for c in range(3))
    assert out[1, i, j, o] == pytest.approx(ref, abs=1e-13)


def test_segnet_backends_agree(rng):
    x = rng.uniform(size=(3, 10, 8, 3))
    w1, b1 = rng.normal(0, 0.3, (3, 3, 3, 8)), rng.normal(0, 0.1, 8)
    w2, b2 = rng.normal(0, 0.3, (3, 3, 8, 1)), rng.normal(0, 0.1, 1)
    pa, ca = _numpy.segnet_forward(x, w1, b1, w2, b2)
    pb, cb = _numba.segnet_forward(x, w1, b1, w2, b2)
    assert np.allclose(pa, pb, **CLOSE)
    gz = rng.normal(size=pa.shape)
    for need in (True, False):
        ra = _numpy.segnet_backward(ca, w1, w2, gz, need)
        rb = _numba.segnet_backward(cb, w1, w2, gz, need)
        for u, v in zip(ra, rb):
            if u is None:
                assert v is None
            else:
                assert np.allclose(u, v, **CLOSE)


def test_extractor_backends_agree(rng):
    x = rng.uniform(size=(2, 12, 12, 3))
    e1, f1 = rng.normal(0, 0.3, (3, 3, 3, 16)), rng.normal(0, 0.1, 16)
    e2, f2 = rng.normal(0, 0.1, (3, 3, 16, 64)), rng.normal(0, 0.1, 64)
    fa, ca = _numpy.extractor_forward(x, e1, f1, e2, f2, 2)
    fb, cb = _numba.extractor_forward(x, e1, f1, e2, f2, 2)
    assert fa.shape == (2, 64) and np.allclose(fa, fb, **CLOSE)
    g = rng.normal(size=fa.shape)
    assert np.allclose(_numpy.extractor_backward(ca, e1, e2, g, 2),
                       _numba.extractor_backward(cb, e1, e2, g, 2), **CLOSE)


def brute_edt(sites):
    pts = np.argwhere(sites)
    h, w = sites.shape
    out = np.empty((h, w))
    for i in range(h):
        for j in range(w):
            out[i, j] = min((i - r) ** 2 + (j - c) ** 2 for r, c in pts)
    return out


@settings(max_examples=60)
@given(arrays(np.bool_, st.tuples(st.integers(1, 14), st.integers(1, 14)),
              elements=st.booleans()))
def test_edt_brute_force_both_backends(sites):
    if not sites.any():
        sites = sites.copy()
        sites[0, 0] = True
    ref = brute_edt(sites)
    # squared distances of integer grids are exact
    assert np.array_equal(_numpy.squared_edt(sites), ref)
    assert np.array_equal(_numba.squared_edt(sites), ref)


def test_edt_lipschitz(rng):
    sites = rng.uniform(size=(20, 20)) < 0.05
    sites[3, 3] = True
    d = np.sqrt(kernels.squared_edt(sites))
    assert np.all(np.abs(np.diff(d, axis=0)) <= 1 + 1e-12)
    assert np.all(np.abs(np.diff(d, axis=1)) <= 1 + 1e-12)
    assert math.isclose(d.min(), 0.0) and np.all(d[sites] == 0)


def _backend_in_subprocess(flag):
    env = dict(os.environ)
    env.pop("MCPMIX_DISABLE_NUMBA", None)
    if flag is not None:
        env["MCPMIX_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", "import mcpmix.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_flag_selects_backend():
    assert _backend_in_subprocess(None) == "numba"
    assert _backend_in_subprocess("0") == "numba"
    assert _backend_in_subprocess("1") == "numpy"
