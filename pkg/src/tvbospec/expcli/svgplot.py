"""Minimal deterministic SVG plotting (lines, scatter, log axes).

Just enough to render spectrum and regret figures without a plotting
dependency: one panel per plot, linear or log10 axes, automatic ticks,
polyline/marker series and a legend.  Output is plain text SVG with no
timestamps, so identical inputs yield identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["Series", "SvgPlot"]

_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


@dataclass
class Series:
    xs: list
    ys: list
    label: str = ""
    color: str | None = None
    marker: bool = False
    line: bool = True


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, target: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks or [lo]


class SvgPlot:
    """A single-panel plot assembled in memory and written as SVG."""

    def __init__(self, title: str = "", xlabel: str = "", ylabel: str = "",
                 width: int = 640, height: int = 420,
                 xlog: bool = False, ylog: bool = False):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.width = width
        self.height = height
        self.xlog = xlog
        self.ylog = ylog
        self.series: list[Series] = []

    def add(self, xs, ys, label: str = "", marker: bool = False,
            line: bool = True, color: str | None = None) -> None:
        xs = [float(x) for x in xs]
        ys = [float(y) for y in ys]
        if len(xs) != len(ys):
            raise ValueError("xs and ys must have equal length")
        self.series.append(Series(xs, ys, label, color, marker, line))

    # -- rendering --------------------------------------------------------

    def _transform(self, v: float, log: bool) -> float:
        if log:
            return math.log10(max(v, 1e-300))
        return v

    def render(self) -> str:
        margin_l, margin_r, margin_t, margin_b = 64, 16, 28, 46
        px = self.width - margin_l - margin_r
        py = self.height - margin_t - margin_b

        pts = [(self._transform(x, self.xlog), self._transform(y, self.ylog))
               for s in self.series
               for x, y in zip(s.xs, s.ys)
               if (not self.xlog or x > 0) and (not self.ylog or y > 0)]
        if not pts:
            pts = [(0.0, 0.0), (1.0, 1.0)]
        xs, ys = zip(*pts)
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0
        xpad = 0.03 * (xhi - xlo)
        ypad = 0.05 * (yhi - ylo)
        xlo, xhi = xlo - xpad, xhi + xpad
        ylo, yhi = ylo - ypad, yhi + ypad

        def sx(v):
            return margin_l + (self._transform(v, self.xlog) - xlo) / (xhi - xlo) * px

        def sy(v):
            return margin_t + py - (self._transform(v, self.ylog) - ylo) / (yhi - ylo) * py

        out = []
        out.append(f'<svg xmlns="http://www.w3.org/2000/svg" '
                   f'width="{self.width}" height="{self.height}" '
                   f'viewBox="0 0 {self.width} {self.height}">')
        out.append(f'<rect width="{self.width}" height="{self.height}" '
                   f'fill="white"/>')
        out.append(f'<rect x="{margin_l}" y="{margin_t}" width="{px}" '
                   f'height="{py}" fill="none" stroke="#333" stroke-width="1"/>')
        if self.title:
            out.append(f'<text x="{self.width / 2}" y="18" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="13">{self.title}</text>')

        # ticks (coordinates live in transformed space; log labels are 10^t)
        if self.xlog:
            tick_vals = [float(e) for e in range(math.floor(xlo), math.ceil(xhi) + 1)
                         if xlo <= e <= xhi]
        else:
            tick_vals = _ticks(xlo, xhi)
        for t in tick_vals:
            x = margin_l + (t - xlo) / (xhi - xlo) * px
            label = _fmt(10.0 ** t) if self.xlog else _fmt(t)
            out.append(f'<line x1="{x:.2f}" y1="{margin_t + py}" x2="{x:.2f}" '
                       f'y2="{margin_t + py + 4}" stroke="#333"/>')
            out.append(f'<text x="{x:.2f}" y="{margin_t + py + 16}" '
                       f'text-anchor="middle" font-family="sans-serif" '
                       f'font-size="10">{label}</text>')
        if self.ylog:
            tick_vals = [e for e in range(math.floor(ylo), math.ceil(yhi) + 1)
                         if ylo <= e <= yhi]
        else:
            tick_vals = _ticks(ylo, yhi)
        for t in tick_vals:
            y = margin_t + py - (t - ylo) / (yhi - ylo) * py
            label = _fmt(10.0 ** t) if self.ylog else _fmt(t)
            out.append(f'<line x1="{margin_l - 4}" y1="{y:.2f}" x2="{margin_l}" '
                       f'y2="{y:.2f}" stroke="#333"/>')
            out.append(f'<text x="{margin_l - 8}" y="{y + 3:.2f}" '
                       f'text-anchor="end" font-family="sans-serif" '
                       f'font-size="10">{label}</text>')
        if self.xlabel:
            out.append(f'<text x="{margin_l + px / 2}" y="{self.height - 10}" '
                       f'text-anchor="middle" font-family="sans-serif" '
                       f'font-size="11">{self.xlabel}</text>')
        if self.ylabel:
            yc = margin_t + py / 2
            out.append(f'<text x="14" y="{yc}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="11" '
                       f'transform="rotate(-90 14 {yc})">{self.ylabel}</text>')

        # series
        for idx, s in enumerate(self.series):
            color = s.color or _COLORS[idx % len(_COLORS)]
            coords = [(sx(x), sy(y)) for x, y in zip(s.xs, s.ys)
                      if (not self.xlog or x > 0) and (not self.ylog or y > 0)]
            if s.line and len(coords) > 1:
                path = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
                out.append(f'<polyline points="{path}" fill="none" '
                           f'stroke="{color}" stroke-width="1.5"/>')
            if s.marker:
                for x, y in coords:
                    out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" '
                               f'fill="{color}"/>')

        # legend
        labeled = [s for s in self.series if s.label]
        for i, s in enumerate(labeled):
            color = s.color or _COLORS[self.series.index(s) % len(_COLORS)]
            lx = margin_l + 10
            ly = margin_t + 14 + 14 * i
            out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" '
                       f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{lx + 24}" y="{ly}" font-family="sans-serif" '
                       f'font-size="10">{s.label}</text>')

        out.append("</svg>")
        return "\n".join(out) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
