"""Point-set generators for the D-nodes."""
from __future__ import annotations

import numpy as np

from .geometry import ConvexPolygon, GeometryError


class PointFileError(ValueError):
    pass


def lattice_points(n):
    """``(n + 1)**2`` lattice points on the unit square, row by row."""
    if n < 1:
        raise ValueError("n must be positive")
    h = 1.0 / n
    return np.array([(i * h, j * h) for j in range(n + 1) for i in range(n + 1)])


def jitter_points(n, alpha, seed):
    """Unit-square lattice with interior points moved uniformly in ``[-alpha h, alpha h]^2``.

    Edge points move only along their side; corners stay put.
    """
    if not 0.0 <= alpha < 0.5:
        raise ValueError("alpha must lie in [0, 0.5)")
    pts = lattice_points(n)
    h = 1.0 / n
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-alpha * h, alpha * h, size=pts.shape)
    idx = np.arange(len(pts))
    i, j = idx % (n + 1), idx // (n + 1)
    on_x = (i == 0) | (i == n)
    on_y = (j == 0) | (j == n)
    shift[on_x, 0] = 0.0
    shift[on_y, 1] = 0.0
    return pts + shift


def polygon_points(domain, n, alpha=0.0, seed=0):
    """Points for a general convex domain.

    Edges are subdivided at spacing close to ``h = diameter / n``; a lattice
    of spacing ``h`` fills the interior, keeping ``h / 2`` away from the
    boundary. Interior points are jittered as in :func:`jitter_points`.
    """
    h = domain.diameter / n
    pts = []
    for a, b in domain.edges():
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / h - 1e-9)))
        pts.extend(a + (b - a) * t for t in np.arange(k) / k)
    lo, hi = domain.vertices.min(axis=0), domain.vertices.max(axis=0)
    rng = np.random.default_rng(seed)
    xs = np.arange(lo[0] + h, hi[0], h)
    ys = np.arange(lo[1] + h, hi[1], h)
    for y in ys:
        for x in xs:
            p = np.array([x, y])
            if alpha > 0.0:
                p = p + rng.uniform(-alpha * h, alpha * h, size=2)
            if domain.distance_to_boundary(p) > 0.5 * h:
                pts.append(p)
    return np.array(pts, dtype=float)


def read_points(path, domain=None):
    """Read ``x1,x2`` lines; ``#`` starts a comment. Checks domain membership."""
    pts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise PointFileError(f"{path}:{lineno}: expected 'x1,x2'")
            try:
                p = (float(parts[0]), float(parts[1]))
            except ValueError:
                raise PointFileError(f"{path}:{lineno}: not a number") from None
            if domain is not None and not domain.contains(p, 1e-10 * domain.diameter):
                raise PointFileError(f"{path}:{lineno}: point {p} lies outside the domain")
            pts.append(p)
    return np.array(pts, dtype=float).reshape(-1, 2)


def write_points(path, points):
    with open(path, "w") as fh:
        for x, y in points:
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def read_polygon(path):
    return ConvexPolygon(read_points(path))


def generate(domain="square", scheme="lattice", n=8, alpha=0.2, seed=0, path=None):
    """Generate D-nodes.

    Parameters
    ----------
    domain : "square" or ConvexPolygon
    scheme : {"lattice", "jitter", "file"}
    n : int
        Subdivisions per side (``n >= 3`` for lattice/jitter schemes).
    alpha : float
        Jitter amplitude in units of ``h``.
    path : str
        Point file for the ``file`` scheme.

    Returns
    -------
    (ConvexPolygon, ndarray)
    """
    poly = ConvexPolygon.unit_square() if isinstance(domain, str) and domain == "square" else domain
    if not isinstance(poly, ConvexPolygon):
        raise GeometryError(f"unknown domain {domain!r}")
    if scheme == "file":
        if path is None:
            raise ValueError("file scheme needs a point file")
        return poly, read_points(path, poly)
    if n < 3:
        raise ValueError("n must be at least 3")
    square = isinstance(domain, str)
    if scheme == "lattice":
        pts = lattice_points(n) if square else polygon_points(poly, n)
    elif scheme == "jitter":
        pts = jitter_points(n, alpha, seed) if square else polygon_points(poly, n, alpha, seed)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return poly, pts
