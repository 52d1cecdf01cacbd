"""Deterministic SVG drawing of planar instances and tours.

Regions become ``circle``, ``rect``, ``polygon`` and ``line`` elements, the
tour a single ``polyline``, and start/end small ``path`` markers.  All
numbers are printed with a fixed format, so identical inputs give
byte-identical documents.
"""

from __future__ import annotations

from typing import List, Optional
from xml.sax.saxutils import quoteattr

import numpy as np

from .geometry import Ball, Box, ConvexPolygon, GeometryError, Instance, Region, Segment, Tour, Union

CANVAS = 800.0
MARGIN = 0.05
REGION_STYLE = 'fill="#9ecae1" fill-opacity="0.5" stroke="#3182bd"'
TOUR_STYLE = 'fill="none" stroke="#d62728"'


def _fmt(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Frame:
    """World-to-canvas map: uniform scale, y axis pointing up."""

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
        pad = MARGIN * span
        self.lo = lo - pad
        self.scale = CANVAS / (span + 2 * pad)
        self.height = (hi[1] - lo[1] + 2 * pad) * self.scale
        self.width = (hi[0] - lo[0] + 2 * pad) * self.scale

    def xy(self, p) -> str:
        x = (p[0] - self.lo[0]) * self.scale
        y = self.height - (p[1] - self.lo[1]) * self.scale
        return f"{_fmt(x)},{_fmt(y)}"

    def x(self, p) -> str:
        return _fmt((p[0] - self.lo[0]) * self.scale)

    def y(self, p) -> str:
        return _fmt(self.height - (p[1] - self.lo[1]) * self.scale)

    def len(self, v: float) -> str:
        return _fmt(v * self.scale)


def _extent(region: Region):
    if isinstance(region, Ball):
        return region.c - region.radius, region.c + region.radius
    if isinstance(region, Box):
        return region._lo, region._hi
    if isinstance(region, ConvexPolygon):
        v = np.array(region.vertices)
        return v.min(axis=0), v.max(axis=0)
    if isinstance(region, Segment):
        v = np.array([region.a, region.b])
        return v.min(axis=0), v.max(axis=0)
    raise GeometryError(f"cannot draw {type(region).__name__}")


def _elements(region: Region, idx: int, frame: _Frame) -> List[str]:
    tag = f'data-region="{idx}"'
    if isinstance(region, Union):
        out = []
        for part in region.parts:
            out += _elements(part, idx, frame)
        return out
    if isinstance(region, Ball):
        return [f'<circle {tag} cx="{frame.x(region.c)}" cy="{frame.y(region.c)}" '
                f'r="{frame.len(region.radius)}" {REGION_STYLE}/>']
    if isinstance(region, Box):
        top_left = (region._lo[0], region._hi[1])
        size = region._hi - region._lo
        return [f'<rect {tag} x="{frame.x(top_left)}" y="{frame.y(top_left)}" '
                f'width="{frame.len(size[0])}" height="{frame.len(size[1])}" {REGION_STYLE}/>']
    if isinstance(region, ConvexPolygon):
        pts = " ".join(frame.xy(v) for v in region.vertices)
        return [f'<polygon {tag} points="{pts}" {REGION_STYLE}/>']
    if isinstance(region, Segment):
        return [f'<line {tag} x1="{frame.x(region.a)}" y1="{frame.y(region.a)}" '
                f'x2="{frame.x(region.b)}" y2="{frame.y(region.b)}" stroke="#3182bd" '
                f'stroke-width="3"/>']
    raise GeometryError(f"cannot draw {type(region).__name__}")


def _marker(p, frame: _Frame, label: str, color: str) -> str:
    x, y = float(frame.x(p)), float(frame.y(p))
    d = f"M{_fmt(x - 5)},{_fmt(y)} L{_fmt(x)},{_fmt(y - 5)} L{_fmt(x + 5)},{_fmt(y)} " \
        f"L{_fmt(x)},{_fmt(y + 5)} Z"
    return f'<path class={quoteattr(label)} d="{d}" fill="{color}"/>'


def render_svg(instance: Instance, tour: Optional[Tour] = None, title: str = "") -> str:
    """SVG 1.1 document for a 2-D instance and an optional tour."""
    if instance.dim != 2:
        raise GeometryError("plotting supports dimension 2 only")
    lows = [instance.p_start, instance.p_end]
    highs = [instance.p_start, instance.p_end]
    for region in instance.regions:
        for part in region.parts:
            lo, hi = _extent(part)
            lows.append(lo)
            highs.append(hi)
    pts = None
    if tour is not None and len(tour.points):
        pts = np.asarray(tour.points, dtype=float)
        lows.append(pts.min(axis=0))
        highs.append(pts.max(axis=0))
    frame = _Frame(np.min(lows, axis=0), np.max(highs, axis=0))
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'width="{_fmt(frame.width)}" height="{_fmt(frame.height)}" '
             f'viewBox="0 0 {_fmt(frame.width)} {_fmt(frame.height)}">']
    if title:
        lines.append(f"<title>{title.replace('&', '&amp;').replace('<', '&lt;')}</title>")
    for idx, region in enumerate(instance.regions, start=1):
        lines += _elements(region, idx, frame)
    if pts is not None and len(pts) >= 2:
        path = " ".join(frame.xy(p) for p in pts)
        lines.append(f'<polyline points="{path}" {TOUR_STYLE} stroke-width="1.5"/>')
    lines.append(_marker(instance.p_start, frame, "start", "#2ca02c"))
    lines.append(_marker(instance.p_end, frame, "end", "#000000"))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(path, instance: Instance, tour: Optional[Tour] = None, title: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(instance, tour, title))


__all__ = ["render_svg", "write_svg"]
