"""Deterministic SVG phase portraits: quiver, region boundary, zeros and index."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .fields import PolyVectorField
from .regions import Circle, Region
from .zeros import ZeroCluster

SIZE = 480
GRID = 24
MARGIN = 24


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def phase_portrait(field: PolyVectorField, region: Region, zeros: Sequence[ZeroCluster],
                   index: Optional[int], title: str = "") -> str:
    """SVG text; identical inputs give identical bytes."""
    x0, y0, x1, y1 = region.bbox()
    pad = 0.1 * max(x1 - x0, y1 - y0)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    span = max(x1 - x0, y1 - y0)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    x0, y0 = cx - 0.5 * span, cy - 0.5 * span
    inner = SIZE - 2 * MARGIN
    scale = inner / span

    def sx(x):
        return MARGIN + (x - x0) * scale

    def sy(y):
        return SIZE - MARGIN - (y - y0) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{title}</title>')

    # quiver: unit-length glyphs, the field's direction only
    cell = span / GRID
    g = x0 + (np.arange(GRID) + 0.5) * cell
    gx, gy = np.meshgrid(g, y0 + (np.arange(GRID) + 0.5) * cell, indexing="xy")
    P, Q = field.components(region.chart)
    u = np.asarray(P(gx, gy), dtype=float) * np.ones_like(gx)
    v = np.asarray(Q(gx, gy), dtype=float) * np.ones_like(gx)
    norm = np.hypot(u, v)
    glyph = 0.4 * cell * scale
    out.append('<g stroke="#4a6fa5" stroke-width="1" fill="none">')
    for a, b, du, dv, n in zip(gx.ravel(), gy.ravel(), u.ravel(), v.ravel(), norm.ravel()):
        if not (n > 0 and math.isfinite(n)):
            continue
        ex, ey = du / n * glyph, -dv / n * glyph
        px, py = sx(a), sy(b)
        tx, ty = px + ex, py + ey
        hx, hy = -ex * 0.35, -ey * 0.35
        out.append(
            f'<path d="M{_fmt(px - ex)} {_fmt(py - ey)} L{_fmt(tx)} {_fmt(ty)} '
            f'M{_fmt(tx + hx - hy * 0.6)} {_fmt(ty + hy + hx * 0.6)} L{_fmt(tx)} {_fmt(ty)} '
            f'L{_fmt(tx + hx + hy * 0.6)} {_fmt(ty + hy - hx * 0.6)}"/>')
    out.append('</g>')

    out.append('<g stroke="black" stroke-width="2" fill="none">')
    for c in region.curves():
        if isinstance(c, Circle):
            out.append(f'<circle class="boundary" cx="{_fmt(sx(c.cx))}" cy="{_fmt(sy(c.cy))}" '
                       f'r="{_fmt(c.r * scale)}"/>')
        else:
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in c.vertices)
            out.append(f'<polygon class="boundary" points="{pts}"/>')
    out.append('</g>')

    for z in zeros:
        a, b = z.location
        out.append(f'<circle class="zero" cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="5" '
                   f'fill="#c0392b" stroke="black"/>')
    label = "?" if index is None else str(index)
    out.append(f'<text x="{MARGIN}" y="{MARGIN - 6}" font-family="monospace" '
               f'font-size="14">index = {label}</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
