"""Planar primitives: predicates, circumcenters and convex polygon clipping.

All predicates use plain floating point with a scaled tolerance ``EPS_GEOM``.
Points are anything indexable as ``p[0], p[1]``; results are tuples.
"""
from __future__ import annotations

import math

import numpy as np

EPS_GEOM = 1e-12

INSIDE = 1
ON = 0
OUTSIDE = -1


class GeometryError(ValueError):
    """Raised for degenerate geometric input."""


def _check_point(p):
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite point {p!r}")
    return x, y


def orient2d(a, b, c):
    """Twice the signed area of triangle ``abc``.

    Positive when ``abc`` turns left (counterclockwise). Values within
    ``EPS_GEOM * scale**2`` of zero are snapped to exactly 0.0. The points
    are evaluated in a canonical order so that swapping any two of them
    negates the result exactly.
    """
    p = [(float(a[0]), float(a[1])), (float(b[0]), float(b[1])), (float(c[0]), float(c[1]))]
    order = sorted(range(3), key=lambda i: p[i])
    sign = 1.0 if order in ([0, 1, 2], [1, 2, 0], [2, 0, 1]) else -1.0
    u, v, w = (p[i] for i in order)
    det = sign * ((v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0]))
    scale = max(abs(a[0]), abs(a[1]), abs(b[0]), abs(b[1]), abs(c[0]), abs(c[1]), 1e-300)
    if abs(det) <= EPS_GEOM * scale * scale:
        return 0.0
    return float(det)


def incircle(a, b, c, d):
    """Classify ``d`` against the circumcircle of the ccw triangle ``abc``.

    Returns INSIDE, ON or OUTSIDE.
    """
    if orient2d(a, b, c) <= 0.0:
        raise GeometryError("incircle needs a non-degenerate ccw triangle")
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdx * cdy - cdx * bdy)
           + blift * (cdx * ady - adx * cdy)
           + clift * (adx * bdy - bdx * ady))
    scale = max(abs(adx), abs(ady), abs(bdx), abs(bdy), abs(cdx), abs(cdy), 1e-300)
    if abs(det) <= EPS_GEOM * scale ** 4:
        return ON
    return INSIDE if det > 0 else OUTSIDE


def circumcenter(a, b, c):
    """Center of the circle through ``a``, ``b``, ``c``.

    Computed relative to ``a`` to limit cancellation.
    """
    bx, by = b[0] - a[0], b[1] - a[1]
    cx, cy = c[0] - a[0], c[1] - a[1]
    d = 2.0 * (bx * cy - by * cx)
    scale = max(abs(bx), abs(by), abs(cx), abs(cy))
    if scale == 0.0 or abs(d) <= 2.0 * EPS_GEOM * scale * scale:
        raise GeometryError("degenerate triangle")
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return (a[0] + ux, a[1] + uy)


def segment_cross(p, q, r, s):
    """Interior crossing point of open segments ``pq`` and ``rs``, or None."""
    d1x, d1y = q[0] - p[0], q[1] - p[1]
    d2x, d2y = s[0] - r[0], s[1] - r[1]
    den = d1x * d2y - d1y * d2x
    scale = max(abs(d1x), abs(d1y), abs(d2x), abs(d2y))
    if scale == 0.0 or abs(den) <= EPS_GEOM * scale * scale:
        return None
    wx, wy = r[0] - p[0], r[1] - p[1]
    t = (wx * d2y - wy * d2x) / den
    u = (wx * d1y - wy * d1x) / den
    if not (EPS_GEOM < t < 1.0 - EPS_GEOM and EPS_GEOM < u < 1.0 - EPS_GEOM):
        return None
    return (p[0] + t * d1x, p[1] + t * d1y)


def shoelace(vertices):
    """Signed area of a closed vertex cycle (positive when ccw)."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


class ConvexPolygon:
    """Strictly convex polygon with counterclockwise vertices.

    Parameters
    ----------
    vertices : array_like, shape (n, 2)
        Vertex coordinates in counterclockwise order, ``n >= 3``.
    """

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("polygon needs at least 3 vertices of dimension 2")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon has non-finite vertices")
        n = len(v)
        diam = float(np.max(np.ptp(v, axis=0)))
        for i in range(n):
            if np.hypot(*(v[(i + 1) % n] - v[i])) <= EPS_GEOM * diam:
                raise GeometryError(f"repeated vertex {i}")
            if orient2d(v[i - 1], v[i], v[(i + 1) % n]) <= 0.0:
                raise GeometryError(f"polygon is not strictly convex and ccw at vertex {i}")
        v.flags.writeable = False
        self.vertices = v

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()!r})"

    @classmethod
    def unit_square(cls):
        return cls([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])

    @property
    def area(self):
        return polygon_area(self)

    @property
    def diameter(self):
        v = self.vertices
        return float(np.max(np.hypot(*(v[:, None, :] - v[None, :, :]).transpose(2, 0, 1))))

    def edges(self):
        """Yield ``(start, end)`` vertex pairs in ccw order."""
        v = self.vertices
        for i in range(len(v)):
            yield v[i], v[(i + 1) % len(v)]

    def halfplanes(self):
        """Outward ``(normal, offset)`` pairs with the interior ``normal . x <= offset``."""
        out = []
        for a, b in self.edges():
            nrm = np.array([b[1] - a[1], a[0] - b[0]])
            nrm /= np.hypot(*nrm)
            out.append((nrm, float(nrm @ a)))
        return out

    def distance_to_boundary(self, p):
        """Signed distance to the boundary, positive inside."""
        return min(off - float(nrm @ np.asarray(p, dtype=float)) for nrm, off in self.halfplanes())

    def contains(self, p, tol=None):
        """True if ``p`` lies in the closed polygon, within ``tol`` (default scaled eps)."""
        if tol is None:
            tol = EPS_GEOM * self.diameter
        return self.distance_to_boundary(p) >= -tol

    def on_boundary(self, p, tol=None):
        if tol is None:
            tol = EPS_GEOM * self.diameter
        return abs(self.distance_to_boundary(p)) <= tol


def polygon_area(poly):
    """Shoelace area of a polygon (a ConvexPolygon or a vertex array)."""
    verts = poly.vertices if isinstance(poly, ConvexPolygon) else poly
    return abs(shoelace(verts))


def clip_vertices(vertices, normal, offset):
    """Sutherland-Hodgman clip of a convex vertex cycle by ``normal . x <= offset``.

    Works on raw arrays so intermediate (possibly degenerate) polygons are
    allowed. Returns an ``(k, 2)`` array, ``k == 0`` when the result is empty.
    """
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        return v.reshape(0, 2)
    nx, ny = float(normal[0]), float(normal[1])
    scale = max(1.0, float(np.max(np.abs(v))), abs(offset))
    tol = EPS_GEOM * scale
    dist = v[:, 0] * nx + v[:, 1] * ny - offset
    if np.all(dist <= tol):
        return v.copy()
    if np.all(dist >= -tol):
        return v[:0].copy()
    out = []
    n = len(v)
    for i in range(n):
        p, dp = v[i], dist[i]
        q, dq = v[(i + 1) % n], dist[(i + 1) % n]
        p_in = dp <= tol
        if p_in:
            out.append(p)
        if (dp < -tol and dq > tol) or (dp > tol and dq < -tol):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    res = np.array(out, dtype=float).reshape(-1, 2)
    return _dedupe_cycle(res, tol)


def _dedupe_cycle(v, tol):
    if len(v) == 0:
        return v
    keep = [v[0]]
    for p in v[1:]:
        if np.hypot(*(p - keep[-1])) > tol:
            keep.append(p)
    while len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= tol:
        keep.pop()
    return np.array(keep, dtype=float).reshape(-1, 2)


def clip_convex(poly, halfplane):
    """Intersect a convex polygon with the half-plane ``{x : normal . x <= offset}``.

    Returns a ConvexPolygon, or None when the intersection has no area.
    """
    normal, offset = halfplane
    verts = clip_vertices(poly.vertices, normal, offset)
    verts = _drop_collinear(verts)
    if len(verts) < 3 or shoelace(verts) <= 0.0:
        return None
    return ConvexPolygon(verts)


def _drop_collinear(v):
    if len(v) < 3:
        return v
    keep = [p for i, p in enumerate(v) if orient2d(v[i - 1], p, v[(i + 1) % len(v)]) != 0.0]
    return np.array(keep, dtype=float).reshape(-1, 2)
