"""Region and boundary metrics for binary segmentation.

Conventions:

* boundary = foreground pixels with at least one 4-neighbour in the
  background, where outside the image counts as background;
* distances are exact Euclidean distances in pixels to the nearest boundary
  pixel;
* percentiles interpolate linearly between order statistics;
* sentinels for empty masks: if exactly one mask is empty, HD95/ASSD return
  the image diagonal and boundary scores return 0; if both are empty,
  distances are 0 and every boundary score is perfect.

Region metrics and B-P/B-R/B-F1 are percentages; BIoU is a fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import as_mask

DELTAS = (2, 5, 10)
BIOU_RADIUS = 2


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def background(self) -> "ConfusionCounts":
        """Counts with the background treated as the positive class."""
        return ConfusionCounts(self.tn, self.fn, self.fp, self.tp)


@dataclass(frozen=True)
class RegionMetrics:
    miou: float
    pa: float
    recall: float
    precision: float
    dsc: float


def _pair(pred, gt):
    pred, gt = as_mask(pred), as_mask(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    return pred.astype(bool), gt.astype(bool)


def confusion(pred, gt) -> ConfusionCounts:
    p, g = _pair(pred, gt)
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    return ConfusionCounts(tp, fp, fn, p.size - tp - fp - fn)


def _ratio(num, den, both_empty):
    # 0/0 only happens when the class is absent from the relevant mask(s)
    if den == 0:
        return 100.0 if both_empty else 0.0
    return 100.0 * num / den


def region_metrics(c: ConfusionCounts, c_bg: ConfusionCounts | None = None) -> RegionMetrics:
    if c_bg is None:
        c_bg = c.background()
    empty_fg = c.tp + c.fp + c.fn == 0
    empty_bg = c_bg.tp + c_bg.fp + c_bg.fn == 0
    iou_fg = _ratio(c.tp, c.tp + c.fp + c.fn, empty_fg)
    iou_bg = _ratio(c_bg.tp, c_bg.tp + c_bg.fp + c_bg.fn, empty_bg)
    total = c.tp + c.fp + c.fn + c.tn
    return RegionMetrics(
        miou=(iou_fg + iou_bg) / 2.0,
        pa=_ratio(c.tp + c.tn, total, total == 0),
        recall=_ratio(c.tp, c.tp + c.fn, empty_fg),
        precision=_ratio(c.tp, c.tp + c.fp, empty_fg),
        dsc=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, empty_fg),
    )


def boundary_mask(m) -> np.ndarray:
    fg = as_mask(m).astype(bool)
    padded = np.pad(fg, 1, constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:])
    return fg & ~interior


def boundary_extract(m) -> np.ndarray:
    """Boundary pixel coordinates as an (N, 2) array of (row, col), row-major order."""
    return np.argwhere(boundary_mask(m))


def distance_field(b, h: int, w: int) -> np.ndarray:
    """Euclidean distance from every pixel of an h x w grid to the point set ``b``."""
    b = np.asarray(b, dtype=np.int64).reshape(-1, 2)
    if len(b) == 0:
        raise ValueError("distance field of an empty boundary")
    sites = np.zeros((h, w), dtype=bool)
    sites[b[:, 0], b[:, 1]] = True
    return np.sqrt(kernels.squared_edt(sites))


class _Geometry:
    """Boundaries and their distance fields for one (pred, gt) pair."""

    def __init__(self, pred, gt):
        p, g = _pair(pred, gt)
        self.shape = p.shape
        self.empty_pred, self.empty_gt = not p.any(), not g.any()
        self.bp = boundary_mask(p)
        self.bg = boundary_mask(g)
        h, w = self.shape
        self.diagonal = math.hypot(h, w)
        if not (self.empty_pred or self.empty_gt):
            self.dist_to_pred = np.sqrt(kernels.squared_edt(self.bp))
            self.dist_to_gt = np.sqrt(kernels.squared_edt(self.bg))
            self.gt_to_pred = self.dist_to_pred[self.bg]  # d(p, pred boundary), p on gt boundary
            self.pred_to_gt = self.dist_to_gt[self.bp]

    @property
    def degenerate(self):
        if self.empty_pred and self.empty_gt:
            return "both"
        if self.empty_pred or self.empty_gt:
            return "one"
        return None

    def hd95(self):
        if self.degenerate:
            return 0.0 if self.degenerate == "both" else self.diagonal
        pooled = np.concatenate([self.gt_to_pred, self.pred_to_gt])
        return float(np.percentile(pooled, 95, method="linear"))

    def assd(self):
        if self.degenerate:
            return 0.0 if self.degenerate == "both" else self.diagonal
        return 0.5 * (float(self.gt_to_pred.mean()) + float(self.pred_to_gt.mean()))

    def prf(self, delta):
        if self.degenerate:
            v = 100.0 if self.degenerate == "both" else 0.0
            return v, v, v
        br = 100.0 * float(np.mean(self.gt_to_pred <= delta))
        bp = 100.0 * float(np.mean(self.pred_to_gt <= delta))
        f1 = 0.0 if bp + br == 0 else 2.0 * bp * br / (bp + br)
        return bp, br, f1

    def biou(self, r):
        if self.degenerate:
            return 1.0 if self.degenerate == "both" else 0.0
        band_g = self.dist_to_gt <= r
        band_p = self.dist_to_pred <= r
        return float(np.count_nonzero(band_g & band_p)) / float(np.count_nonzero(band_g | band_p))


def hd95(pred, gt) -> float:
    return _Geometry(pred, gt).hd95()


def assd(pred, gt) -> float:
    return _Geometry(pred, gt).assd()


def boundary_prf(pred, gt, delta: float) -> tuple[float, float, float]:
    """(B-P, B-R, B-F1) in percent at tolerance ``delta`` pixels."""
    return _Geometry(pred, gt).prf(delta)


def biou(pred, gt, r: float = BIOU_RADIUS) -> float:
    if r < 0:
        raise ValueError("band radius must be >= 0")
    return _Geometry(pred, gt).biou(r)


METRIC_COLUMNS = (
    ["miou", "pa", "recall", "precision", "dsc", "hd95", "assd"]
    + [f"{m}_d{d}" for d in DELTAS for m in ("bp", "br", "bf1")]
    + [f"biou_r{BIOU_RADIUS}"]
)


def evaluate_pair(pred, gt) -> dict[str, float]:
    """Every metric for one image, keyed by :data:`METRIC_COLUMNS`."""
    geo = _Geometry(pred, gt)
    rm = region_metrics(confusion(pred, gt))
    row = {"miou": rm.miou, "pa": rm.pa, "recall": rm.recall,
           "precision": rm.precision, "dsc": rm.dsc,
           "hd95": geo.hd95(), "assd": geo.assd()}
    for d in DELTAS:
        row[f"bp_d{d}"], row[f"br_d{d}"], row[f"bf1_d{d}"] = geo.prf(d)
    row[f"biou_r{BIOU_RADIUS}"] = geo.biou(BIOU_RADIUS)
    return row
