"""Deterministic SVG rendering of contour sets and eigenvalue markers."""
from __future__ import annotations

import math
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .pseudogrid import ContourSet, GridSpec

WIDTH = 640
MARGIN = 48
PALETTE = ("#1f4e99", "#c2410c", "#15803d", "#7e22ce", "#b91c1c", "#0e7490")


def _num(x: float) -> str:
    return "%.3f" % x


def _ticks(lo: float, hi: float, target: int = 6) -> List[float]:
    span = hi - lo
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    out = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        v = first + k * step
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        k += 1
    return out


def _tick_label(v: float) -> str:
    return "%g" % float("%.6g" % v)


def level_class(index: int) -> str:
    return f"eps{index}"


def render_svg_text(
    contours: Optional[ContourSet],
    eigs: Sequence[complex] = (),
    grid: Optional[GridSpec] = None,
    title: str = "",
) -> str:
    """SVG document with axes, one ``<path>`` per polyline and a marker per eigenvalue.

    Each path carries the class ``eps<k>`` for the k-th epsilon and a
    ``data-eps`` attribute. ``grid`` sets the plot window when ``contours``
    is empty or None.
    """
    g = contours.grid if contours is not None else grid
    if g is None:
        pts = np.array(list(eigs), dtype=complex)
        if pts.size == 0:
            pts = np.array([0j])
        pad = 1.0 + 0.1 * float(np.max(np.abs(pts)))
        g = GridSpec(pts.real.min() - pad, pts.real.max() + pad, pts.imag.min() - pad, pts.imag.max() + pad, 2, 2)
    xs = (g.re_max - g.re_min)
    ys = (g.im_max - g.im_min)
    plot_w = WIDTH - 2 * MARGIN
    plot_h = max(120.0, min(plot_w * ys / xs, 1.5 * plot_w))
    height = plot_h + 2 * MARGIN

    def px(x: float) -> float:
        return MARGIN + (x - g.re_min) / xs * plot_w

    def py(y: float) -> float:
        return MARGIN + (g.im_max - y) / ys * plot_h

    eps_list = list(contours.epsilons) if contours is not None else []
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{_num(height)}" '
        f'viewBox="0 0 {WIDTH} {_num(height)}">',
        "<style>",
        ".axis{stroke:#222;stroke-width:1;fill:none}",
        ".tick{font:11px sans-serif;fill:#222}",
        ".eig{fill:#000}",
    ]
    for k, _ in enumerate(eps_list):
        out.append(f".{level_class(k)}{{stroke:{PALETTE[k % len(PALETTE)]};stroke-width:1.2;fill:none}}")
    out.append("</style>")
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out.append(
        f'<rect class="axis" x="{_num(MARGIN)}" y="{_num(MARGIN)}" width="{_num(plot_w)}" height="{_num(plot_h)}"/>'
    )
    out.append('<g id="axes">')
    for t in _ticks(g.re_min, g.re_max):
        x = px(t)
        out.append(f'<line class="axis" x1="{_num(x)}" y1="{_num(MARGIN + plot_h)}" x2="{_num(x)}" y2="{_num(MARGIN + plot_h + 5)}"/>')
        out.append(f'<text class="tick" x="{_num(x)}" y="{_num(MARGIN + plot_h + 18)}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in _ticks(g.im_min, g.im_max):
        y = py(t)
        out.append(f'<line class="axis" x1="{_num(MARGIN - 5)}" y1="{_num(y)}" x2="{_num(MARGIN)}" y2="{_num(y)}"/>')
        out.append(f'<text class="tick" x="{_num(MARGIN - 8)}" y="{_num(y + 4)}" text-anchor="end">{_tick_label(t)}</text>')
    out.append("</g>")
    out.append('<g id="contours">')
    for k, eps in enumerate(eps_list):
        for pl in contours.polylines.get(eps, []):
            v = pl.vertices
            if len(v) == 0:
                continue
            d = "M" + " L".join(f"{_num(px(x))},{_num(py(y))}" for x, y in v)
            if pl.closed:
                d += " Z"
            out.append(
                f'<path class="{level_class(k)}" data-eps="{"%.17g" % eps}" '
                f'data-closed="{"true" if pl.closed else "false"}" d="{d}"/>'
            )
    out.append("</g>")
    out.append('<g id="eigenvalues">')
    for z in sorted((complex(z) for z in eigs), key=lambda z: (z.real, z.imag)):
        if not (g.re_min <= z.real <= g.re_max and g.im_min <= z.imag <= g.im_max):
            continue
        out.append(
            f'<circle class="eig" cx="{_num(px(z.real))}" cy="{_num(py(z.imag))}" r="2.5" '
            f'data-re="{"%.17g" % z.real}" data-im="{"%.17g" % z.imag}"/>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(contours: Optional[ContourSet], eigs: Sequence[complex], out_path, grid: Optional[GridSpec] = None, title: str = "") -> None:
    text = render_svg_text(contours, eigs, grid, title)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
