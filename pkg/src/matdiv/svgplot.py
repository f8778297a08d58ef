"""Self-contained SVG line plots (fixed 800 x 600 viewBox, no dependencies).

Supports linear and log axes.  For log-log scaling plots a dashed
reference segment of a given slope can be drawn; its data-space endpoints
are recorded as ``data-*`` attributes on the element.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import DomainError

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 25, 45, 60

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


class _Axis:
    def __init__(self, lo, hi, pix_lo, pix_hi, log):
        if log and (lo <= 0 or hi <= 0):
            raise DomainError("log axes need positive data")
        if lo == hi:
            lo, hi = (lo * 0.5, hi * 2.0) if log else (lo - 1.0, hi + 1.0)
        self.lo, self.hi, self.log = lo, hi, log
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def to_pix(self, v):
        a, b, v = (math.log10(self.lo), math.log10(self.hi), math.log10(v)) if self.log else (self.lo, self.hi, v)
        frac = (v - a) / (b - a)
        return self.pix_lo + frac * (self.pix_hi - self.pix_lo)

    def ticks(self):
        if self.log:
            first = math.floor(math.log10(self.lo))
            last = math.ceil(math.log10(self.hi))
            vals = [10.0**e for e in range(first, last + 1)]
            return [(v, f"1e{int(math.log10(v))}") for v in vals if self.lo <= v <= self.hi] or [
                (self.lo, f"{self.lo:g}"),
                (self.hi, f"{self.hi:g}"),
            ]
        span = self.hi - self.lo
        step = 10.0 ** math.floor(math.log10(span / 4))
        for mult in (1, 2, 5, 10):
            if span / (step * mult) <= 6:
                step *= mult
                break
        first = math.ceil(self.lo / step) * step
        vals = []
        v = first
        while v <= self.hi + 1e-12 * span:
            vals.append(v)
            v += step
        return [(v, f"{v:g}") for v in vals]


def line_plot(
    path,
    series,
    *,
    title="",
    xlabel="",
    ylabel="",
    xlog=False,
    ylog=False,
    reference_slope=None,
):
    """Write a multi-series line plot; ``series`` is a list of (label, xs, ys)."""
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys) if not (xlog and x <= 0) and not (ylog and y <= 0)]
    if not pts:
        raise DomainError("nothing to plot")
    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    x_axis = _Axis(min(xs_all), max(xs_all), MARGIN_LEFT, WIDTH - MARGIN_RIGHT, xlog)
    y_axis = _Axis(min(ys_all), max(ys_all), HEIGHT - MARGIN_BOTTOM, MARGIN_TOP, ylog)

    el = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{WIDTH - MARGIN_LEFT - MARGIN_RIGHT}" '
        f'height="{HEIGHT - MARGIN_TOP - MARGIN_BOTTOM}" fill="none" stroke="black"/>',
    ]
    if title:
        el.append(f'<text x="{WIDTH / 2:.1f}" y="25" text-anchor="middle" font-size="18">{escape(title)}</text>')
    if xlabel:
        el.append(
            f'<text x="{(MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2:.1f}" y="{HEIGHT - 12}" '
            f'text-anchor="middle" font-size="14">{escape(xlabel)}</text>'
        )
    if ylabel:
        cy = (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2
        el.append(
            f'<text x="20" y="{cy:.1f}" text-anchor="middle" font-size="14" '
            f'transform="rotate(-90 20 {cy:.1f})">{escape(ylabel)}</text>'
        )
    for v, label in x_axis.ticks():
        px = x_axis.to_pix(v)
        el.append(
            f'<line x1="{px:.2f}" y1="{HEIGHT - MARGIN_BOTTOM}" x2="{px:.2f}" '
            f'y2="{HEIGHT - MARGIN_BOTTOM + 5}" stroke="black"/>'
        )
        el.append(
            f'<text x="{px:.2f}" y="{HEIGHT - MARGIN_BOTTOM + 20}" text-anchor="middle" '
            f'font-size="12">{escape(label)}</text>'
        )
    for v, label in y_axis.ticks():
        py = y_axis.to_pix(v)
        el.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{py:.2f}" x2="{MARGIN_LEFT}" y2="{py:.2f}" stroke="black"/>')
        el.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="12">{escape(label)}</text>'
        )

    if reference_slope is not None:
        if not (xlog and ylog):
            raise DomainError("reference_slope is defined for log-log plots")
        _, xs0, ys0 = series[0]
        x0, y0 = float(xs0[0]), float(ys0[0])
        x1 = float(max(x for x in xs0 if x > 0))
        y1 = y0 * (x1 / x0) ** reference_slope
        el.append(
            f'<line class="refline" data-slope="{reference_slope:g}" '
            f'data-x0="{x0!r}" data-y0="{y0!r}" data-x1="{x1!r}" data-y1="{y1!r}" '
            f'x1="{x_axis.to_pix(x0):.2f}" y1="{y_axis.to_pix(y0):.2f}" '
            f'x2="{x_axis.to_pix(x1):.2f}" y2="{y_axis.to_pix(y1):.2f}" '
            f'stroke="black" stroke-dasharray="6 4"/>'
        )

    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(
            f"{x_axis.to_pix(x):.2f},{y_axis.to_pix(y):.2f}"
            for x, y in zip(xs, ys)
            if not (xlog and x <= 0) and not (ylog and y <= 0)
        )
        el.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        lx = WIDTH - MARGIN_RIGHT - 160
        ly = MARGIN_TOP + 16 + 16 * i
        el.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        el.append(f'<text x="{lx + 28}" y="{ly}" font-size="12">{escape(str(label))}</text>')

    el.append("</svg>")
    Path(path).write_text("\n".join(el) + "\n")
