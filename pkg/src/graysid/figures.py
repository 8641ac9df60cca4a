"""Minimal SVG line/marker plots, each written with a companion CSV."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .io import write_csv

__all__ = ["Series", "Figure", "PALETTE"]

PALETTE = ["#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd", "#17becf",
           "#e377c2", "#7f7f7f", "#bcbd22", "#8c564b", "#000000"]


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray
    kind: str = "line"  # "line", "markers" or "band" (y holds lower, y2 upper)
    color: str | None = None
    dash: str | None = None
    marker: str = "circle"
    y2: np.ndarray | None = None


@dataclass
class Figure:
    title: str
    xlabel: str = "x"
    ylabel: str = "y"
    equal_aspect: bool = False
    xlog: bool = False
    series: list = field(default_factory=list)
    width: int = 760
    height: int = 480

    def line(self, name, x, y, color=None, dash=None):
        self.series.append(Series(name, np.asarray(x, float), np.asarray(y, float), "line", color, dash))
        return self

    def markers(self, name, x, y, color=None, marker="circle"):
        self.series.append(Series(name, np.asarray(x, float), np.asarray(y, float), "markers",
                                  color, None, marker))
        return self

    def band(self, name, x, lower, upper, color=None):
        self.series.append(Series(name, np.asarray(x, float), np.asarray(lower, float), "band",
                                  color, y2=np.asarray(upper, float)))
        return self

    def rows(self):
        """Long-format rows ``(series, kind, index, x, y, y2)`` shared by the CSV and the SVG."""
        for s in self.series:
            for i, (xv, yv) in enumerate(zip(s.x, s.y)):
                y2 = "" if s.y2 is None else float(s.y2[i])
                yield s.name, s.kind, i, float(xv), float(yv), y2

    def write(self, svg_path) -> tuple[Path, Path]:
        """Write ``<name>.svg`` and ``<name>.csv``; returns both paths."""
        svg_path = Path(svg_path)
        csv_path = svg_path.with_suffix(".csv")
        write_csv(csv_path, ["series", "kind", "index", "x", "y", "y2"], self.rows())
        svg_path.parent.mkdir(parents=True, exist_ok=True)
        svg_path.write_text(self.to_svg())
        return svg_path, csv_path

    # rendering

    def _bounds(self):
        xs, ys = [], []
        for s in self.series:
            x = np.log10(s.x) if self.xlog else s.x
            ok = np.isfinite(x) & np.isfinite(s.y)
            xs.append(x[ok])
            ys.append(s.y[ok])
            if s.y2 is not None:
                ys.append(s.y2[np.isfinite(s.y2)])
        x = np.concatenate(xs) if xs else np.zeros(0)
        y = np.concatenate(ys) if ys else np.zeros(0)
        if x.size == 0:
            return (0.0, 1.0), (0.0, 1.0)
        xr = [float(x.min()), float(x.max())]
        yr = [float(y.min()), float(y.max())]
        for r in (xr, yr):
            if r[1] - r[0] < 1e-12:
                r[0] -= 0.5
                r[1] += 0.5
            pad = 0.05 * (r[1] - r[0])
            r[0] -= pad
            r[1] += pad
        if self.equal_aspect:
            span = max(xr[1] - xr[0], yr[1] - yr[0])
            xc, yc = sum(xr) / 2, sum(yr) / 2
            xr = [xc - span / 2, xc + span / 2]
            yr = [yc - span / 2, yc + span / 2]
        return tuple(xr), tuple(yr)

    def to_svg(self) -> str:
        W, H = self.width, self.height
        left, right, top, bottom = 70, 250, 40, 50
        pw, ph = W - left - right, H - top - bottom
        if self.equal_aspect:
            pw = ph = min(pw, ph)
        (x0, x1), (y0, y1) = self._bounds()

        def px(x):
            x = np.log10(x) if self.xlog else x
            return left + (x - x0) / (x1 - x0) * pw

        def py(y):
            return top + (y1 - y) / (y1 - y0) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
               f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
               f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
               f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
               f'{escape(self.title)}</text>',
               f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>',
               f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        for v in _ticks(x0, x1):
            X = left + (v - x0) / (x1 - x0) * pw
            label = f"1e{v:g}" if self.xlog else f"{v:g}"
            out.append(f'<line x1="{X:.1f}" y1="{top + ph}" x2="{X:.1f}" y2="{top + ph + 5}" stroke="black"/>'
                       f'<text x="{X:.1f}" y="{top + ph + 18}" text-anchor="middle">{label}</text>')
        for v in _ticks(y0, y1):
            Y = py(v)
            out.append(f'<line x1="{left - 5}" y1="{Y:.1f}" x2="{left}" y2="{Y:.1f}" stroke="black"/>'
                       f'<text x="{left - 8}" y="{Y + 4:.1f}" text-anchor="end">{v:g}</text>')
        out.append(f'<text x="{left + pw / 2:.1f}" y="{H - 10}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(self.ylabel)}</text>')

        out.append('<g clip-path="url(#plot)">')
        for k, s in enumerate(self.series):
            color = s.color or PALETTE[k % len(PALETTE)]
            ok = np.isfinite(s.x) & np.isfinite(s.y)
            if self.xlog:
                ok &= s.x > 0
            if s.kind == "band":
                ok &= np.isfinite(s.y2)
                pts = [(px(a), py(b)) for a, b in zip(s.x[ok], s.y2[ok])]
                pts += [(px(a), py(b)) for a, b in zip(s.x[ok][::-1], s.y[ok][::-1])]
                out.append(f'<polygon points="{_pts(pts)}" fill="{color}" fill-opacity="0.25" stroke="none"/>')
            elif s.kind == "line":
                dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
                pts = [(px(a), py(b)) for a, b in zip(s.x[ok], s.y[ok])]
                out.append(f'<polyline points="{_pts(pts)}" fill="none" stroke="{color}" '
                           f'stroke-width="1.4"{dash}/>')
            else:
                for a, b in zip(s.x[ok], s.y[ok]):
                    out.append(_marker(s.marker, px(a), py(b), color))
        out.append("</g>")

        for k, s in enumerate(self.series):
            color = s.color or PALETTE[k % len(PALETTE)]
            Y = top + 10 + 16 * k
            X = left + pw + 12
            if s.kind == "markers":
                out.append(_marker(s.marker, X + 10, Y, color))
            else:
                out.append(f'<line x1="{X}" y1="{Y}" x2="{X + 20}" y2="{Y}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{X + 26}" y="{Y + 4}">{escape(s.name)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _pts(pts):
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)


def _marker(kind, x, y, color, r=3.5):
    if kind == "plus":
        return (f'<path d="M{x - r:.2f},{y:.2f}H{x + r:.2f}M{x:.2f},{y - r:.2f}V{y + r:.2f}" '
                f'stroke="{color}" stroke-width="1.5"/>')
    if kind == "cross":
        return (f'<path d="M{x - r:.2f},{y - r:.2f}L{x + r:.2f},{y + r:.2f}M{x - r:.2f},{y + r:.2f}'
                f'L{x + r:.2f},{y - r:.2f}" stroke="{color}" stroke-width="1.5"/>')
    if kind == "square":
        return (f'<rect x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r:.2f}" height="{2 * r:.2f}" '
                f'fill="none" stroke="{color}"/>')
    if kind == "triangle":
        return (f'<path d="M{x - r:.2f},{y - r:.2f}H{x + r:.2f}L{x:.2f},{y + r:.2f}Z" '
                f'fill="none" stroke="{color}"/>')
    if kind == "diamond":
        return (f'<path d="M{x:.2f},{y - r:.2f}L{x + r:.2f},{y:.2f}L{x:.2f},{y + r:.2f}L{x - r:.2f},{y:.2f}Z" '
                f'fill="none" stroke="{color}"/>')
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="none" stroke="{color}"/>'


def _ticks(lo, hi, count=5):
    span = hi - lo
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    vals = []
    v = start
    while v <= hi + 1e-12 * span:
        vals.append(round(v, 12))
        v += step
    return vals
