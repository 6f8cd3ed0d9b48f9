"""Frozen random-convolution feature map, MMD and its input gradient."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import RngStream, frozen


@dataclass(frozen=True)
class FrozenExtractor:
    """Two strided 3x3 conv layers with tanh, then global average pooling."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    stride: int = 2

    @property
    def channels(self) -> int:
        return self.w1.shape[2]

    @property
    def dim(self) -> int:
        return self.w2.shape[3]


def make_extractor(channels: int, seed: int = 0, hidden: int = 16, dim: int = 64,
                   kernel: int = 3, stride: int = 2) -> FrozenExtractor:
    gen = RngStream(seed, 0xFEA7).generator()
    fan1 = kernel * kernel * channels
    w1 = gen.normal(0.0, 1.5 / math.sqrt(fan1), size=(kernel, kernel, channels, hidden))
    # centre pre-activations for mid-grey inputs so tanh starts in its linear range
    b1 = -0.5 * w1.sum(axis=(0, 1, 2)) + gen.normal(0.0, 0.1, size=hidden)
    fan2 = kernel * kernel * hidden
    w2 = gen.normal(0.0, 1.5 / math.sqrt(fan2), size=(kernel, kernel, hidden, dim))
    b2 = gen.normal(0.0, 0.1, size=dim)
    return FrozenExtractor(frozen(w1), frozen(b1), frozen(w2), frozen(b2), stride)


def _batch(images) -> np.ndarray:
    x = np.asarray(images, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4:
        raise ValueError(f"expected a batch of images, got shape {x.shape}")
    return x


def _forward(e: FrozenExtractor, x: np.ndarray):
    if x.shape[3] != e.channels:
        raise ValueError(f"extractor expects {e.channels} channels, got {x.shape[3]}")
    return kernels.extractor_forward(x, e.w1, e.b1, e.w2, e.b2, e.stride)


def extract(e: FrozenExtractor, batch) -> np.ndarray:
    """One ``dim``-dimensional feature row per image."""
    return _forward(e, _batch(batch))[0]


def _backward(e: FrozenExtractor, cache, gfeat: np.ndarray) -> np.ndarray:
    return kernels.extractor_backward(cache, e.w1, e.w2, gfeat, e.stride)


def _check_clouds(x, y, bandwidth=None):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"feature dimensions differ: {x.shape[1]} vs {y.shape[1]}")
    if bandwidth is not None and not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    return x, y


def _gram(x, y, bandwidth):
    diff = x[:, None, :] - y[None, :, :]
    return np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * bandwidth * bandwidth))


def mmd_squared(x, y, bandwidth: float) -> float:
    """Biased (V-statistic) squared MMD under a Gaussian RBF kernel.

    Kernel means use exactly rounded sums, so the value is symmetric in
    (x, y) bit for bit.
    """
    x, y = _check_clouds(x, y, bandwidth)
    n, m = len(x), len(y)
    kxx = math.fsum(_gram(x, x, bandwidth).ravel()) / (n * n)
    kyy = math.fsum(_gram(y, y, bandwidth).ravel()) / (m * m)
    kxy = math.fsum(_gram(x, y, bandwidth).ravel()) / (n * m)
    return (kxx + kyy) - 2.0 * kxy


def mmd(x, y, bandwidth: float) -> float:
    return math.sqrt(max(mmd_squared(x, y, bandwidth), 0.0))


def mmd_feature_gradient(x, y, bandwidth: float) -> np.ndarray:
    """d MMD / d x for feature rows ``x``; zero where MMD vanishes."""
    x, y = _check_clouds(x, y, bandwidth)
    d2 = mmd_squared(x, y, bandwidth)
    if d2 <= 0.0:
        return np.zeros_like(x)
    n, m = len(x), len(y)
    s2 = bandwidth * bandwidth
    kxx = _gram(x, x, bandwidth)
    kxy = _gram(x, y, bandwidth)
    dxx = x[:, None, :] - x[None, :, :]
    dxy = x[:, None, :] - y[None, :, :]
    g = (-2.0 / (n * n * s2)) * np.einsum("ij,ijd->id", kxx, dxx)
    g += (2.0 / (n * m * s2)) * np.einsum("ij,ijd->id", kxy, dxy)
    return g / (2.0 * math.sqrt(d2))


def mmd_input_gradient(x_images, y_images, e: FrozenExtractor, bandwidth: float) -> np.ndarray:
    """Gradient of MMD(phi(x_images), phi(y_images)) with respect to ``x_images``."""
    xb, yb = _batch(x_images), _batch(y_images)
    fx, cache = _forward(e, xb)
    fy = extract(e, yb)
    gfeat = mmd_feature_gradient(fx, fy, bandwidth)
    if not gfeat.any():
        return np.zeros_like(xb)
    return _backward(e, cache, gfeat)


def discrepancy(e: FrozenExtractor, x_images, y_feats, bandwidth: float, with_grad: bool):
    """(D, features of x, dD/dx_images or None), reusing one forward pass."""
    fx, cache = _forward(e, _batch(x_images))
    d = mmd(fx, y_feats, bandwidth)
    if not with_grad:
        return d, fx, None
    gfeat = mmd_feature_gradient(fx, y_feats, bandwidth)
    if not gfeat.any():
        return d, fx, np.zeros(cache[0])
    return d, fx, _backward(e, cache, gfeat)


def median_bandwidth(features) -> float:
    """Median pairwise Euclidean distance between rows; 1.0 if degenerate."""
    f = np.atleast_2d(np.asarray(features, dtype=np.float64))
    iu = np.triu_indices(len(f), k=1)
    if len(iu[0]) == 0:
        return 1.0
    diff = f[:, None, :] - f[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))[iu]
    med = float(np.median(dist))
    return med if med > 0 else 1.0


def centroid_distance(x, y) -> float:
    x, y = _check_clouds(x, y)
    return float(np.linalg.norm(x.mean(axis=0) - y.mean(axis=0)))
