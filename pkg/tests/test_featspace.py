import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mcpmix import featspace
from mcpmix.featspace import (centroid_distance, discrepancy, extract, make_extractor,
                              median_bandwidth, mmd, mmd_feature_gradient,
                              mmd_input_gradient, mmd_squared)
from mcpmix.gradcheck import check_mmd_input, central_difference, rel_error

clouds = st.integers(1, 6).flatmap(lambda n: arrays(
    np.float64, (n, 4), elements=st.floats(-3, 3, allow_nan=False)))


def naive_mmd2(x, y, bw):
    def k(u, v):
        return math.exp(-sum((a - b) ** 2 for a, b in zip(u, v)) / (2 * bw * bw))
    kxx = sum(k(a, b) for a in x for b in x) / len(x) ** 2
    kyy = sum(k(a, b) for a in y for b in y) / len(y) ** 2
    kxy = sum(k(a, b) for a in x for b in y) / (len(x) * len(y))
    return kxx + kyy - 2 * kxy


@pytest.fixture(scope="module")
def ext():
    return make_extractor(3, seed=4)


def test_extract_shape_and_determinism(ext, rng):
    img = rng.uniform(size=(16, 16, 3))
    f = extract(ext, np.stack([img, img, rng.uniform(size=(16, 16, 3))]))
    assert f.shape == (3, 64)
    assert np.array_equal(f[0], f[1])
    assert np.array_equal(extract(ext, img)[0], f[0])


def test_one_pixel_changes_row(ext, rng):
    img = rng.uniform(size=(16, 16, 3))
    other = img.copy()
    other[7, 7, 1] += 0.01
    assert not np.array_equal(extract(ext, img), extract(ext, other))


def test_channel_mismatch(ext):
    with pytest.raises(ValueError):
        extract(ext, np.zeros((8, 8, 1)))


def test_same_seed_same_extractor():
    a, b = make_extractor(3, seed=9), make_extractor(3, seed=9)
    assert all(np.array_equal(getattr(a, f), getattr(b, f)) for f in ("w1", "b1", "w2", "b2"))
    with pytest.raises(ValueError):
        a.w1[0, 0, 0, 0] = 1.0


def test_singleton_closed_form(rng):
    for _ in range(20):
        x, y = rng.normal(size=(1, 8)), rng.normal(size=(1, 8))
        bw = rng.uniform(0.5, 3.0)
        expect = 2 - 2 * math.exp(-np.sum((x - y) ** 2) / (2 * bw * bw))
        assert abs(mmd_squared(x, y, bw) - expect) <= 1e-12


@given(x=clouds, y=clouds, bw=st.floats(0.1, 10))
def test_mmd_properties(x, y, bw):
    d = mmd(x, y, bw)
    assert d >= 0.0
    assert mmd_squared(x, y, bw) == mmd_squared(y, x, bw)
    assert mmd(x, x, bw) == 0.0
    assert mmd_squared(x, y, bw) == pytest.approx(naive_mmd2(x, y, bw), abs=1e-12)


def test_mmd_errors(rng):
    with pytest.raises(ValueError):
        mmd(rng.normal(size=(2, 3)), rng.normal(size=(2, 4)), 1.0)
    with pytest.raises(ValueError):
        mmd(rng.normal(size=(2, 3)), rng.normal(size=(2, 3)), 0.0)


def test_feature_gradient_matches_fd(rng):
    x, y = rng.normal(size=(3, 5)), rng.normal(size=(4, 5))
    g = mmd_feature_gradient(x, y, 1.7)
    for idx in np.ndindex(x.shape):
        def f(v):
            xx = x.copy()
            xx[idx] = v
            return mmd(xx, y, 1.7)
        assert rel_error(g[idx], central_difference(f, x[idx]), 1e-8) < 1e-6


def test_input_gradient_zero_at_identity(rng):
    e = make_extractor(1, seed=2)
    x = rng.uniform(size=(3, 8, 8, 1))
    assert np.max(np.abs(mmd_input_gradient(x, x, e, 1.0))) <= 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_input_gradient_fd(seed):
    assert check_mmd_input(seed).max_rel_error < 1e-5


def test_input_gradient_bandwidth_rescale(rng):
    e = make_extractor(1, seed=3)
    x, y = rng.uniform(size=(2, 8, 8, 1)), rng.uniform(size=(2, 8, 8, 1))
    fy = extract(e, y)
    base = median_bandwidth(np.concatenate([extract(e, x), fy]))
    for bw in (base, 2 * base):
        g = mmd_input_gradient(x, y, e, bw)
        idx = (1, 3, 4, 0)

        def f(v):
            xx = x.copy()
            xx[idx] = v
            return mmd(extract(e, xx), fy, bw)
        assert rel_error(g[idx], central_difference(f, x[idx])) < 1e-5
    g1, g2 = mmd_input_gradient(x, y, e, base), mmd_input_gradient(x, y, e, 2 * base)
    assert not np.allclose(g1, g2)


def test_discrepancy_consistent(rng):
    e = make_extractor(3, seed=1)
    x, y = rng.uniform(size=(3, 12, 12, 3)), rng.uniform(size=(3, 12, 12, 3))
    fy = extract(e, y)
    d, fx, g = discrepancy(e, x, fy, 0.3, True)
    assert d == mmd(extract(e, x), fy, 0.3)
    assert np.array_equal(g, mmd_input_gradient(x, y, e, 0.3))
    assert discrepancy(e, x, fy, 0.3, False)[2] is None


def test_median_bandwidth(rng):
    f = np.array([[0.0], [1.0], [3.0]])
    assert median_bandwidth(f) == 2.0  # distances 1, 3, 2
    assert median_bandwidth(np.zeros((3, 2))) == 1.0
    assert median_bandwidth(np.zeros((1, 2))) == 1.0


def test_centroid_distance(rng):
    x = rng.normal(size=(7, 4))
    v = np.array([1.0, -2.0, 0.5, 3.0])
    assert centroid_distance(x, x) == 0.0
    assert centroid_distance(x, x + v) == pytest.approx(np.linalg.norm(v), abs=1e-12)
    y = rng.normal(size=(5, 4))
    mx = [sum(r[j] for r in x) / 7 for j in range(4)]
    my = [sum(r[j] for r in y) / 5 for j in range(4)]
    assert centroid_distance(x, y) == pytest.approx(math.dist(mx, my), abs=1e-12)
    with pytest.raises(ValueError):
        centroid_distance(x, rng.normal(size=(2, 3)))


def test_private_forward_backward_shapes(rng):
    e = make_extractor(3, seed=1)
    x = rng.uniform(size=(2, 13, 11, 3))
    feat, cache = featspace._forward(e, x)
    assert feat.shape == (2, 64)
    assert featspace._backward(e, cache, np.ones_like(feat)).shape == x.shape
