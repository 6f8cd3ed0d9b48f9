"""Self-contained SVG line charts for training trajectories.

Output depends only on the input numbers: coordinates are printed with a
fixed number of decimals and nothing time- or platform-dependent is
embedded, so the same log always renders to the same bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .core import atomic_write_text
from .trainloop import TrainLogRecord, read_log_csv, track_distribution

WIDTH, HEIGHT = 640, 360
MARGIN = (56, 20, 28, 44)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class Series:
    label: str
    ys: tuple[float, ...]
    dashed: bool = False


def _num(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(title: str, xs, series: list[Series], xlabel: str = "step") -> str:
    """Render one chart; all series share ``xs``."""
    xs = [float(x) for x in xs]
    if not xs or not series:
        raise ReportError(f"{title}: nothing to plot")
    for s in series:
        if len(s.ys) != len(xs):
            raise ReportError(f"{title}: series {s.label!r} has {len(s.ys)} points, expected {len(xs)}")
    ys = [y for s in series for y in s.ys]
    if not all(math.isfinite(v) for v in xs + ys):
        raise ReportError(f"{title}: non-finite values")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        pad = max(abs(y0) * 0.1, 0.5)
        y0, y1 = y0 - pad, y1 + pad
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for t in _ticks(y0, y1):
        y = _num(py(t))
        out.append(f'<line x1="{left - 4}" y1="{y}" x2="{left}" y2="{y}" stroke="#444"/>')
        out.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" dy="3">{t:.4g}</text>')
    for t in _ticks(x0, x1):
        x = _num(px(t))
        out.append(f'<line x1="{x}" y1="{top + ph}" x2="{x}" y2="{top + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{x}" y="{top + ph + 16}" text-anchor="middle">{t:.4g}</text>')
    out.append(f'<text x="{left + pw // 2}" y="{HEIGHT - 6}" text-anchor="middle">{escape(xlabel)}</text>')
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_num(px(x))},{_num(py(y))}" for x, y in zip(xs, s.ys))
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<polyline class="series" data-label="{escape(s.label)}" points="{pts}" '
                   f'fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = top + 14 + 14 * i
        out.append(f'<line x1="{left + pw - 120}" y1="{ly - 4}" x2="{left + pw - 100}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{left + pw - 96}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _col(records: list[TrainLogRecord], name: str) -> tuple[float, ...]:
    return tuple(float(getattr(r, name)) for r in records)


def trajectory_charts(records: list[TrainLogRecord], centroid_series=None) -> dict[str, str]:
    """Chart name -> SVG text for a training log.

    ``centroid_series`` is an optional list of (epoch, distance) checkpoint
    pairs; without it the per-batch centroid column of the log is plotted.
    """
    if not records:
        raise ReportError("log has no records")
    xs = range(1, len(records) + 1)
    charts = {
        "s_t": line_chart("mixing ratio s_t", xs, [
            Series("s_t", _col(records, "s_t")),
            Series("cosine prior", _col(records, "s_prior"), dashed=True)]),
        "rho_t": line_chart("mixed-loss weight rho_t", xs, [
            Series("rho_t", _col(records, "rho_t")),
            Series("cosine prior", _col(records, "rho_prior"), dashed=True)]),
        "discrepancy": line_chart("discrepancy D_t and threshold tau_t", xs, [
            Series("D_t", _col(records, "D_t")),
            Series("tau_t", _col(records, "tau_t"), dashed=True)]),
        "loss": line_chart("losses", xs, [
            Series("total", _col(records, "total")),
            Series("l_real", _col(records, "l_real")),
            Series("l_mix", _col(records, "l_mix"))]),
    }
    if centroid_series:
        ep = [e for e, _ in centroid_series]
        charts["centroid"] = line_chart("centroid distance, mixed vs real", ep, [
            Series("centroid distance", tuple(float(d) for _, d in centroid_series))],
            xlabel="epoch")
    else:
        charts["centroid"] = line_chart("centroid distance, mixed vs real", xs, [
            Series("centroid distance", _col(records, "centroid_distance"))])
    return charts


def render_report(log_csv, out_dir, distribution_csv=None) -> list[Path]:
    """Read a log CSV (and optional checkpoint CSV), write one SVG per chart."""
    try:
        records = read_log_csv(log_csv)
    except (OSError, ValueError) as exc:
        raise ReportError(str(exc)) from exc
    series = None
    if distribution_csv is not None:
        try:
            values = track_distribution(distribution_csv)
            with open(distribution_csv, newline="") as fh:
                epochs = [int(r["epoch"]) for r in csv.DictReader(fh)]
        except (OSError, ValueError, KeyError) as exc:
            raise ReportError(str(exc)) from exc
        series = list(zip(epochs, values))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, svg in trajectory_charts(records, series).items():
        path = out / f"{name}.svg"
        atomic_write_text(path, svg)
        written.append(path)
    return written
