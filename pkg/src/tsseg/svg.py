"""Static SVG rendering of a segmented series.

The chart overlays the raw series polyline with the per-segment model fit
(horizontal mean bars for the means model, per-segment curves otherwise)
and marks change points with dashed vertical rules.  Output is plain SVG
text with fixed number formatting, so identical inputs produce identical
bytes.
"""

from __future__ import annotations

import numpy as np

from .core import Segmentation, TimeSeries, segment_stats

__all__ = ["segmentation_svg"]

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 56, 16, 24, 36


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def segmentation_svg(
    x: TimeSeries,
    t: Segmentation,
    fitted: np.ndarray | None = None,
    width: int = 900,
    height: int = 360,
    title: str | None = None,
) -> str:
    """Render the series with its segmentation as an SVG document.

    ``fitted`` gives the model value at every index; by default the
    segment means are used.
    """
    values = x.values
    T = len(x)
    if t.length != T:
        raise ValueError("segmentation does not match the series length")
    if fitted is None:
        fitted = np.concatenate(
            [np.full(s.length, s.mean) for s in segment_stats(x, t)]
        )
    fitted = np.asarray(fitted, dtype=np.float64)
    ticks = x.labels if x.labels is not None else np.arange(1, T + 1)

    lo = min(values.min(), fitted.min())
    hi = max(values.max(), fitted.max())
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def sx(i: int) -> float:  # i is a 0-based index
        return _MARGIN_L + (plot_w * i / max(T - 1, 1))

    def sy(v: float) -> float:
        return _MARGIN_T + plot_h * (hi - v) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#999"/>',
    ]
    if title:
        out.append(
            f'<text x="{width // 2}" y="16" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )

    # y-axis ticks
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = lo + frac * (hi - lo)
        y = sy(v)
        out.append(
            f'<line x1="{_MARGIN_L - 4}" y1="{_fmt(y)}" x2="{_MARGIN_L}" '
            f'y2="{_fmt(y)}" stroke="#999"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(v)}</text>'
        )
    # x-axis ticks at segment boundaries
    for cp in t.change_points[1:]:
        xx = sx(cp - 1)
        label = int(ticks[cp - 1])
        out.append(
            f'<line x1="{_fmt(xx)}" y1="{height - _MARGIN_B}" x2="{_fmt(xx)}" '
            f'y2="{height - _MARGIN_B + 4}" stroke="#999"/>'
        )
        out.append(
            f'<text x="{_fmt(xx)}" y="{height - _MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f"{label}</text>"
        )

    # change-point rules (interior boundaries)
    for cp in t.change_points[1:-1]:
        xx = sx(cp - 1)
        out.append(
            f'<line x1="{_fmt(xx)}" y1="{_MARGIN_T}" x2="{_fmt(xx)}" '
            f'y2="{height - _MARGIN_B}" stroke="#bbb" stroke-dasharray="4 3"/>'
        )

    pts = " ".join(f"{_fmt(sx(i))},{_fmt(sy(v))}" for i, v in enumerate(values))
    out.append(
        f'<polyline points="{pts}" fill="none" stroke="#4878a8" stroke-width="1"/>'
    )
    # fitted values, one polyline per segment so jumps stay vertical-free
    for start, end in t.segments():
        seg_pts = " ".join(
            f"{_fmt(sx(i))},{_fmt(sy(fitted[i]))}" for i in range(start - 1, end)
        )
        out.append(
            f'<polyline points="{seg_pts}" fill="none" stroke="#c03028" '
            f'stroke-width="2"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
