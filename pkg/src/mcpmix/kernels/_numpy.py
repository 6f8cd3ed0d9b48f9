"""Pure-numpy reference kernels.

Same contracts as the numba versions; used when numba is disabled and as an
equivalence baseline in the tests and the benchmark.
"""

import numpy as np
from scipy.special import expit


def _out_size(n, k, stride):
    return (n + 2 * (k // 2) - k) // stride + 1


def conv2d_forward(x, w, b, stride=1):
    """Zero-padded 'same' cross-correlation.

    x: (B, H, W, C), w: (k, k, C, O), b: (O,) -> (B, Ho, Wo, O)
    """
    k = w.shape[0]
    p = k // 2
    B, H, W, _ = x.shape
    Ho, Wo = _out_size(H, k, stride), _out_size(W, k, stride)
    xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
    out = np.empty((B, Ho, Wo, w.shape[3]))
    out[...] = b
    for di in range(k):
        for dj in range(k):
            win = xp[:, di:di + stride * (Ho - 1) + 1:stride,
                     dj:dj + stride * (Wo - 1) + 1:stride, :]
            out += win @ w[di, dj]
    return out


def conv2d_backward_input(gout, w, in_shape, stride=1):
    k = w.shape[0]
    p = k // 2
    B, H, W, C = in_shape
    Ho, Wo = gout.shape[1], gout.shape[2]
    gxp = np.zeros((B, H + 2 * p, W + 2 * p, C))
    for di in range(k):
        for dj in range(k):
            gxp[:, di:di + stride * (Ho - 1) + 1:stride,
                dj:dj + stride * (Wo - 1) + 1:stride, :] += gout @ w[di, dj].T
    return gxp[:, p:p + H, p:p + W, :].copy()


def conv2d_backward_params(x, gout, k, stride=1):
    """Gradients of the conv weights and bias given the upstream gradient."""
    p = k // 2
    Ho, Wo = gout.shape[1], gout.shape[2]
    xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
    C, O = x.shape[3], gout.shape[3]
    gw = np.empty((k, k, C, O))
    g2 = gout.reshape(-1, O)
    for di in range(k):
        for dj in range(k):
            win = xp[:, di:di + stride * (Ho - 1) + 1:stride,
                     dj:dj + stride * (Wo - 1) + 1:stride, :]
            gw[di, dj] = win.reshape(-1, C).T @ g2
    return gw, g2.sum(axis=0)


def _lower_envelope_rows(f):
    # exact min_k f[i, k] + (j - k)^2 by broadcasting; O(H * W^2)
    n = f.shape[1]
    idx = np.arange(n, dtype=np.float64)
    sq = (idx[:, None] - idx[None, :]) ** 2
    return np.min(f[:, None, :] + sq[None, :, :], axis=2)


def squared_edt(sites):
    """Squared Euclidean distance from every pixel to the nearest True pixel.

    Values are exact integers stored as float64. `sites` must contain at
    least one True entry.
    """
    h, w = sites.shape
    big = float((h + w) ** 2 + 1)
    f = np.where(sites, 0.0, big)
    f = _lower_envelope_rows(f.T).T
    f = _lower_envelope_rows(f)
    return f


def segnet_forward(x, w1, b1, w2, b2):
    """Probabilities (B, H, W) and an opaque cache for :func:`segnet_backward`."""
    a1 = np.tanh(conv2d_forward(x, w1, b1))
    prob = expit(conv2d_forward(a1, w2, b2)[..., 0])
    return prob, (x, a1)


def segnet_backward(cache, w1, w2, gz2, need_input):
    """Parameter (and optionally input) gradients from the logit gradient ``gz2``."""
    x, a1 = cache
    k = w1.shape[0]
    g2 = gz2[..., None]
    gw2, gb2 = conv2d_backward_params(a1, g2, k)
    gz1 = conv2d_backward_input(g2, w2, a1.shape) * (1.0 - a1 * a1)
    gw1, gb1 = conv2d_backward_params(x, gz1, k)
    gx = conv2d_backward_input(gz1, w1, x.shape) if need_input else None
    return gw1, gb1, gw2, gb2, gx


def extractor_forward(x, w1, b1, w2, b2, stride):
    """Pooled features (B, D) and a cache for :func:`extractor_backward`."""
    a1 = np.tanh(conv2d_forward(x, w1, b1, stride))
    a2 = np.tanh(conv2d_forward(a1, w2, b2, stride))
    return a2.mean(axis=(1, 2)), (x.shape, a1, a2)


def extractor_backward(cache, w1, w2, gfeat, stride):
    """Input gradient given d(objective)/d(features)."""
    in_shape, a1, a2 = cache
    n_pool = a2.shape[1] * a2.shape[2]
    g2 = (gfeat[:, None, None, :] / n_pool) * (1.0 - a2 * a2)
    g1 = conv2d_backward_input(g2, w2, a1.shape, stride) * (1.0 - a1 * a1)
    return conv2d_backward_input(g1, w1, in_shape, stride)
