"""Poincare-disk SVG output for 2-dimensional experiments.

Disk coordinates are spatial coordinates divided by 1 + x0.  The SVG is
assembled by hand so the bytes depend only on the data (no timestamps or
library version strings), keeping plot output deterministic.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .regions import Ball, ConvexRegion, HalfSpace, Intersection, WholeSpace

SIZE = 640
MARGIN = 20


def _to_px(disk_xy):
    r = (SIZE - 2 * MARGIN) / 2.0
    cx = SIZE / 2.0
    return cx + disk_xy[0] * r, cx - disk_xy[1] * r


def _fmt(v: float) -> str:
    return format(v, ".3f")


def _polyline(points, stroke, width=1.5, closed=False, dashed=False):
    if len(points) == 0:
        return ""
    px = [_to_px(geo.to_poincare_disk(np.asarray(p))) for p in points]
    coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in px)
    tag = "polygon" if closed else "polyline"
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (f'<{tag} points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{dash}/>')


def _dot(p, color, radius=4.0):
    a, b = _to_px(geo.to_poincare_disk(np.asarray(p)))
    return f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="{radius}" fill="{color}"/>'


def _ball_boundary(ball: Ball, n=256):
    c = ball.center
    e1 = K.tangent_project(c, np.array([0.0, 1.0, 0.0]))
    q1 = K.mink(e1, e1)
    if q1 < 1e-12:
        e1 = K.tangent_project(c, np.array([0.0, 0.0, 1.0]))
        q1 = K.mink(e1, e1)
    e1 /= np.sqrt(q1)
    e2 = K.tangent_project(c, np.array([0.0, 0.0, 1.0]))
    e2 = e2 - K.mink(e2, e1) * e1
    q2 = K.mink(e2, e2)
    if q2 < 1e-12:
        e2 = K.tangent_project(c, np.array([0.0, 1.0, 0.0]))
        e2 = e2 - K.mink(e2, e1) * e1
        q2 = K.mink(e2, e2)
    e2 /= np.sqrt(q2)
    ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    dirs = np.cos(ang)[:, None] * e1[None, :] + np.sin(ang)[:, None] * e2[None, :]
    return K.batch_exp_map(c, np.ascontiguousarray(dirs),
                           np.full(n, ball.radius))


def _halfspace_boundary(hs: HalfSpace, extent=6.0, n=128):
    u = hs.normal
    base = geo.origin(hs.dim)
    s = K.mink(base, u)
    p0 = K.normalize(base - s * u)
    w = np.zeros_like(u)
    # tangent at p0, orthogonal to the normal: any ambient direction
    # projected off both p0 and u
    for probe in np.eye(len(u))[1:]:
        cand = probe + K.mink(p0, probe) * p0 - K.mink(probe, u) * u
        q = K.mink(cand, cand)
        if q > 1e-10:
            w = cand / np.sqrt(q)
            break
    ts = np.linspace(-extent, extent, n)
    return np.array([np.cosh(t) * p0 + np.sinh(t) * w for t in ts])


def _region_outlines(region: ConvexRegion):
    if isinstance(region, Ball):
        yield _ball_boundary(region), True
    elif isinstance(region, HalfSpace):
        yield _halfspace_boundary(region), False
    elif isinstance(region, Intersection):
        for m in region.members:
            yield from _region_outlines(m)
    elif isinstance(region, WholeSpace):
        return


def render_svg(region: ConvexRegion | None = None, iterates=None,
               resolvent=None, query=None, anchors=None) -> str:
    """Compose the scene: ideal boundary, region outline, PPA iterates,
    query point, and resolvent."""
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" '
             f'height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
             f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
             f'<circle cx="{SIZE/2}" cy="{SIZE/2}" r="{(SIZE - 2*MARGIN)/2}" '
             'fill="none" stroke="#888" stroke-width="1"/>']
    if region is not None:
        for outline, closed in _region_outlines(region):
            parts.append(_polyline(outline, "#2b6cb0", closed=closed))
    if iterates is not None and len(iterates):
        pts = [np.asarray(p) for p in iterates]
        parts.append(_polyline(pts, "#d69e2e", width=1.0, dashed=True))
        for p in pts:
            parts.append(_dot(p, "#d69e2e", radius=2.0))
    if anchors is not None:
        for a in anchors:
            parts.append(_dot(a, "#38a169", radius=3.0))
    if query is not None:
        parts.append(_dot(query, "#805ad5", radius=4.0))
    if resolvent is not None:
        parts.append(_dot(resolvent, "#c53030", radius=4.0))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
