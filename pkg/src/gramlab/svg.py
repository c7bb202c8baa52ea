"""Tiny static SVG 1.1 emitter for the experiment plots.

Line charts (linear or log axes, dashed reference curves, legend) and a
histogram with a density overlay.  No scripting, no external assets;
numbers are written with %.6g so files are small and stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 68, 16, 36, 50

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    label: str
    xs: np.ndarray
    ys: np.ndarray
    color: str | None = None
    dashed: bool = False


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _g(v: float) -> str:
    return f"{v:.6g}"


def _nice_ticks(lo: float, hi: float, want: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / want
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    ticks = [10.0 ** k for k in range(math.floor(math.log10(lo)),
                                      math.ceil(math.log10(hi)) + 1)]
    return [t for t in ticks if lo / 1.001 <= t <= hi * 1.001]


class _Axes:
    def __init__(self, xlo, xhi, ylo, yhi, xlog, ylog):
        self.xlog, self.ylog = xlog, ylog
        self.xlo = math.log10(xlo) if xlog else xlo
        self.xhi = math.log10(xhi) if xlog else xhi
        self.ylo = math.log10(ylo) if ylog else ylo
        self.yhi = math.log10(yhi) if ylog else yhi
        if self.xhi - self.xlo < 1e-12:
            self.xhi = self.xlo + 1.0
        if self.yhi - self.ylo < 1e-12:
            self.yhi = self.ylo + 1.0

    def px(self, x: float) -> float:
        t = (math.log10(x) if self.xlog else x)
        f = (t - self.xlo) / (self.xhi - self.xlo)
        return MARGIN_L + f * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        t = (math.log10(y) if self.ylog else y)
        f = (t - self.ylo) / (self.yhi - self.ylo)
        return HEIGHT - MARGIN_B - f * (HEIGHT - MARGIN_T - MARGIN_B)


def _finite_positive(xs, ys, xlog, ylog):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    ok = np.isfinite(xs) & np.isfinite(ys)
    if xlog:
        ok &= xs > 0
    if ylog:
        ok &= ys > 0
    return xs, ys, ok


def _data_range(series, xlog, ylog):
    xlo = ylo = math.inf
    xhi = yhi = -math.inf
    for s in series:
        xs, ys, ok = _finite_positive(s.xs, s.ys, xlog, ylog)
        if not ok.any():
            continue
        xlo, xhi = min(xlo, xs[ok].min()), max(xhi, xs[ok].max())
        ylo, yhi = min(ylo, ys[ok].min()), max(yhi, ys[ok].max())
    if not math.isfinite(xlo):
        xlo, xhi, ylo, yhi = 0.0, 1.0, 0.0, 1.0
    if not xlog:
        pad = 0.02 * (xhi - xlo or 1.0)
        xlo, xhi = xlo - pad, xhi + pad
    if not ylog:
        pad = 0.06 * (yhi - ylo or 1.0)
        ylo, yhi = ylo - pad, yhi + pad
    else:
        ylo, yhi = ylo / 1.3, yhi * 1.3
    if xlog:
        xlo, xhi = xlo / 1.05, xhi * 1.05
    return xlo, xhi, ylo, yhi


def _header(title):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle">{_esc(title)}</text>',
    ]


def _axes_elements(ax, xlabel, ylabel):
    out = []
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
               'fill="none" stroke="#333" stroke-width="1"/>')
    xticks = (_log_ticks(10 ** ax.xlo, 10 ** ax.xhi) if ax.xlog
              else _nice_ticks(ax.xlo, ax.xhi))
    yticks = (_log_ticks(10 ** ax.ylo, 10 ** ax.yhi) if ax.ylog
              else _nice_ticks(ax.ylo, ax.yhi))
    for t in xticks:
        px = ax.px(t)
        out.append(f'<line x1="{_g(px)}" y1="{y0}" x2="{_g(px)}" y2="{y0 + 4}" '
                   'stroke="#333"/>')
        out.append(f'<text x="{_g(px)}" y="{y0 + 17}" font-family="sans-serif" '
                   f'font-size="10" text-anchor="middle">{_g(t)}</text>')
    for t in yticks:
        py = ax.py(t)
        out.append(f'<line x1="{x0 - 4}" y1="{_g(py)}" x2="{x0}" y2="{_g(py)}" '
                   'stroke="#333"/>')
        out.append(f'<text x="{x0 - 7}" y="{_g(py + 3)}" font-family="sans-serif" '
                   f'font-size="10" text-anchor="end">{_g(t)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 10}" '
               'font-family="sans-serif" font-size="12" '
               f'text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{(y0 + y1) / 2}" font-family="sans-serif" '
               f'font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {(y0 + y1) / 2})">{_esc(ylabel)}</text>')
    return out


def _polylines(ax, s: Series, color: str):
    xs, ys, ok = _finite_positive(s.xs, s.ys, ax.xlog, ax.ylog)
    dash = ' stroke-dasharray="6,4"' if s.dashed else ""
    out = []
    pts = []
    for x, y, good in zip(xs, ys, ok):
        if good:
            pts.append(f"{_g(ax.px(x))},{_g(ax.py(y))}")
        elif pts:
            out.append(pts)
            pts = []
    if pts:
        out.append(pts)
    elems = []
    for seg in out:
        if len(seg) == 1:
            cx, cy = seg[0].split(",")
            elems.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>')
        else:
            elems.append(f'<polyline points="{" ".join(seg)}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"{dash}/>')
    return elems


def line_chart(path: str, series: list[Series], *, title: str, xlabel: str,
               ylabel: str, xlog: bool = False, ylog: bool = False,
               markers: bool = False) -> None:
    xlo, xhi, ylo, yhi = _data_range(series, xlog, ylog)
    ax = _Axes(xlo, xhi, ylo, yhi, xlog, ylog)
    out = _header(title) + _axes_elements(ax, xlabel, ylabel)
    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        out.extend(_polylines(ax, s, color))
        if markers:
            xs, ys, ok = _finite_positive(s.xs, s.ys, xlog, ylog)
            for x, y in zip(xs[ok], ys[ok]):
                out.append(f'<circle cx="{_g(ax.px(x))}" cy="{_g(ax.py(y))}" '
                           f'r="3" fill="{color}"/>')
        ly = MARGIN_T + 14 + 15 * i
        lx = WIDTH - MARGIN_R - 150
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{lx + 27}" y="{ly}" font-family="sans-serif" '
                   f'font-size="11">{_esc(s.label)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def histogram_chart(path: str, values, bins: int, *, title: str, xlabel: str,
                    overlay_xs=None, overlay_ys=None,
                    overlay_label: str = "") -> None:
    values = np.asarray(values, dtype=np.float64)
    counts, edges = np.histogram(values, bins=bins, density=True)
    top = float(counts.max()) if counts.size else 1.0
    if overlay_ys is not None:
        top = max(top, float(np.max(overlay_ys)))
    ax = _Axes(float(edges[0]), float(edges[-1]), 0.0, top * 1.08, False, False)
    out = _header(title) + _axes_elements(ax, xlabel, "density")
    for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
        x = ax.px(e0)
        w = ax.px(e1) - x
        y = ax.py(c)
        h = ax.py(0.0) - y
        out.append(f'<rect x="{_g(x)}" y="{_g(y)}" width="{_g(w)}" '
                   f'height="{_g(h)}" fill="#9ecae1" stroke="#4292c6" '
                   'stroke-width="0.5"/>')
    if overlay_xs is not None and overlay_ys is not None:
        s = Series(overlay_label or "overlay", np.asarray(overlay_xs),
                   np.asarray(overlay_ys), color="#d62728", dashed=True)
        out.extend(_polylines(ax, s, s.color))
        out.append(f'<text x="{WIDTH - MARGIN_R - 130}" y="{MARGIN_T + 14}" '
                   f'font-family="sans-serif" font-size="11" fill="#d62728">'
                   f'{_esc(s.label)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
