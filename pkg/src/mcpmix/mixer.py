"""Mixed-sample construction: MCPMix and the contrast baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_mask
from .synthgen import PairedTriplet


@dataclass(frozen=True)
class MixedSample:
    image: np.ndarray
    label: np.ndarray
    weight: float


def mix_images(real: np.ndarray, synthetic: np.ndarray, s: float) -> np.ndarray:
    """(1 - s) * real + s * synthetic; works on single images and batches."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"mix weight must lie in [0, 1], got {s}")
    return (1.0 - s) * real + s * synthetic


def mcpmix(t: PairedTriplet, s: float) -> MixedSample:
    """Appearance-only mix of a triplet; the label stays the shared hard mask."""
    return MixedSample(mix_images(t.real, t.synthetic, s), t.mask, float(s))


def classical_mixup(a, b, lam: float):
    """Inter-sample mixup of two (image, mask) pairs with a soft label."""
    (ia, ma), (ib, mb) = a, b
    if ia.shape != ib.shape or ma.shape != mb.shape:
        raise ValueError("classical_mixup needs matching shapes")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    image = lam * ia + (1.0 - lam) * ib
    soft = lam * ma.astype(np.float64) + (1.0 - lam) * mb.astype(np.float64)
    return image, soft


def cutpaste_mix(a, b, rect):
    """Paste the rectangle ``rect = (r0, c0, r1, c1)`` (half-open) of ``b`` into ``a``."""
    (ia, ma), (ib, mb) = a, b
    if ia.shape != ib.shape or ma.shape != mb.shape:
        raise ValueError("cutpaste_mix needs matching shapes")
    r0, c0, r1, c1 = rect
    h, w = ma.shape
    if not (0 <= r0 <= r1 <= h and 0 <= c0 <= c1 <= w):
        raise ValueError(f"rectangle {rect} outside a {h}x{w} image")
    image = np.array(ia, copy=True)
    mask = as_mask(ma).copy()
    image[r0:r1, c0:c1] = ib[r0:r1, c0:c1]
    mask[r0:r1, c0:c1] = mb[r0:r1, c0:c1]
    return image, mask
