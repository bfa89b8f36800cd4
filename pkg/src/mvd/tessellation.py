"""Delaunay triangulation of the D-nodes and the dual Voronoi diagram clipped to the domain."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    EPS_GEOM,
    INSIDE,
    ON,
    ConvexPolygon,
    GeometryError,
    circumcenter,
    clip_vertices,
    incircle,
    orient2d,
    shoelace,
)


class InadmissibleGridError(GeometryError):
    """The point set violates the regularity the merged grid needs."""


@dataclass(frozen=True)
class Triangulation:
    """A planar triangulation.

    Attributes
    ----------
    points : ndarray, shape (n, 2)
        D-node coordinates.
    triangles : ndarray, shape (t, 3)
        Counterclockwise vertex triples.
    neighbors : ndarray, shape (t, 3)
        ``neighbors[t, k]`` is the triangle across the edge opposite vertex
        ``k`` or -1 on the hull.
    boundary_edges : ndarray, shape (b, 2)
        Hull edges as a closed counterclockwise chain, starting at the
        lowest-index hull vertex.
    """

    points: np.ndarray
    triangles: np.ndarray
    neighbors: np.ndarray
    boundary_edges: np.ndarray
    edge_nodes: np.ndarray = field(repr=False)
    edge_tris: np.ndarray = field(repr=False)

    @classmethod
    def from_triangles(cls, points, triangles):
        """Build neighbor and edge tables for a given triangle list.

        Triangles are reoriented counterclockwise; nothing else is checked,
        so non-Delaunay triangulations can be represented.
        """
        pts = np.array(points, dtype=float)
        tris = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        for t in tris:
            if orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0:
                t[1], t[2] = t[2], t[1]
        owner = {}
        for ti, t in enumerate(tris):
            for k in range(3):
                owner[(int(t[(k + 1) % 3]), int(t[(k + 2) % 3]))] = (ti, k)
        nbr = -np.ones_like(tris)
        for (a, b), (ti, k) in owner.items():
            other = owner.get((b, a))
            if other is not None:
                nbr[ti, k] = other[0]
        return cls._assemble(pts, tris, nbr)

    @classmethod
    def _assemble(cls, pts, tris, nbr):
        edge_nodes, edge_tris = [], []
        hull_next = {}
        for ti, t in enumerate(tris):
            for k in range(3):
                a, b = int(t[(k + 1) % 3]), int(t[(k + 2) % 3])
                n = int(nbr[ti, k])
                if n < 0:
                    edge_nodes.append((a, b))
                    edge_tris.append((ti, -1))
                    hull_next[a] = b
                elif ti < n:
                    if a < b:
                        edge_nodes.append((a, b))
                        edge_tris.append((ti, n))
                    else:
                        edge_nodes.append((b, a))
                        edge_tris.append((n, ti))
        chain = []
        if hull_next:
            start = min(hull_next)
            a = start
            for _ in range(len(hull_next)):
                b = hull_next.get(a)
                if b is None:
                    break
                chain.append((a, b))
                a = b
                if a == start:
                    break
            if a != start or len(chain) != len(hull_next):
                raise GeometryError("hull edges do not form a single closed chain")
        arr = lambda x, w: np.array(x, dtype=np.int64).reshape(-1, w)
        return cls(pts, tris, nbr, arr(chain, 2), arr(edge_nodes, 2), arr(edge_tris, 2))

    @property
    def n_edges(self):
        return len(self.edge_nodes)

    def triangle_areas(self):
        p = self.points[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))

    def adjacency(self):
        """Delaunay neighbor lists of every node, sorted by index."""
        nb = [set() for _ in range(len(self.points))]
        for a, b in self.edge_nodes:
            nb[a].add(int(b))
            nb[b].add(int(a))
        return [sorted(s) for s in nb]


def _check_input(points, domain):
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise GeometryError("need at least 3 points of dimension 2")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("non-finite point coordinates")
    diam = domain.diameter if domain is not None else float(np.max(np.ptp(pts, axis=0)))
    pairs = sorted(cKDTree(pts).query_pairs(EPS_GEOM * diam))
    if pairs:
        listing = ", ".join(f"{i}-{j}" for i, j in pairs[:20])
        raise GeometryError(f"duplicate points: {listing}")
    if all(orient2d(pts[0], pts[1], p) == 0.0 for p in pts[2:]):
        raise GeometryError("all points are collinear")
    if domain is not None:
        tol = 1e-10 * diam
        bad = [i for i, p in enumerate(pts) if not domain.contains(p, tol)]
        if bad:
            raise GeometryError(f"points outside the domain: {bad[:20]}")
        for v in domain.vertices:
            if np.min(np.hypot(*(pts - v).T)) > EPS_GEOM * diam:
                raise GeometryError(f"domain vertex ({float(v[0])!r}, {float(v[1])!r}) is not among the points")
    return pts


class _Mesh:
    """Mutable triangle soup with opposite-vertex adjacency used during construction."""

    def __init__(self, pts):
        self.pts = pts
        self.tris = []
        self.nbr = []
        self.alive = []

    def add(self, tri, nbr):
        self.tris.append(list(tri))
        self.nbr.append(list(nbr))
        self.alive.append(True)
        return len(self.tris) - 1

    def relink(self, t, old, new):
        if t < 0:
            return
        nb = self.nbr[t]
        for k in range(3):
            if nb[k] == old:
                nb[k] = new
                return

    def edge_slot(self, t, other):
        return self.nbr[t].index(other)

    def incircle(self, t, p):
        a, b, c = (self.pts[v] for v in self.tris[t])
        return incircle(a, b, c, p)

    def locate(self, p, start):
        t = start
        for _ in range(4 * len(self.tris) + 10):
            tri = self.tris[t]
            moved = False
            for k in range(3):
                a = self.pts[tri[(k + 1) % 3]]
                b = self.pts[tri[(k + 2) % 3]]
                if orient2d(a, b, p) < 0.0 and self.nbr[t][k] >= 0:
                    t = self.nbr[t][k]
                    moved = True
                    break
            if not moved:
                return t
        for t, tri in enumerate(self.tris):
            if self.alive[t] and all(
                orient2d(self.pts[tri[(k + 1) % 3]], self.pts[tri[(k + 2) % 3]], p) >= 0.0
                for k in range(3)
            ):
                return t
        raise GeometryError("point location failed")

    def insert(self, vi, start):
        p = self.pts[vi]
        t0 = self.locate(p, start)
        cavity = {t0}
        stack = [t0]
        while stack:
            t = stack.pop()
            for n in self.nbr[t]:
                if n >= 0 and n not in cavity and self.incircle(n, p) == INSIDE:
                    cavity.add(n)
                    stack.append(n)
        # the cavity must be star-shaped from p
        while True:
            grow = []
            for t in cavity:
                tri = self.tris[t]
                for k in range(3):
                    n = self.nbr[t][k]
                    if n in cavity or n < 0:
                        continue
                    a, b = self.pts[tri[(k + 1) % 3]], self.pts[tri[(k + 2) % 3]]
                    if orient2d(a, b, p) <= 0.0:
                        grow.append(n)
            if not grow:
                break
            cavity.update(grow)
        rim = []
        for t in sorted(cavity):
            tri = self.tris[t]
            for k in range(3):
                n = self.nbr[t][k]
                if n not in cavity:
                    rim.append((tri[(k + 1) % 3], tri[(k + 2) % 3], n, t))
        for t in cavity:
            self.alive[t] = False
        starts, ends = {}, {}
        new = []
        for a, b, outer, t in rim:
            nt = self.add((a, b, vi), (-1, -1, outer))
            self.relink(outer, t, nt)
            starts[a] = nt
            ends[b] = nt
            new.append(nt)
        for nt in new:
            a, b, _ = self.tris[nt]
            self.nbr[nt][0] = starts[b]  # across (b, p)
            self.nbr[nt][1] = ends[a]  # across (p, a)
        return new[-1]

    def flip(self, t1, k1):
        t2 = self.nbr[t1][k1]
        k2 = self.edge_slot(t2, t1)
        T1, T2 = self.tris[t1], self.tris[t2]
        a, b, c = T1[k1], T1[(k1 + 1) % 3], T1[(k1 + 2) % 3]
        d = T2[k2]
        n_ca = self.nbr[t1][(k1 + 1) % 3]
        n_ab = self.nbr[t1][(k1 + 2) % 3]
        n_bd = self.nbr[t2][(k2 + 1) % 3]
        n_dc = self.nbr[t2][(k2 + 2) % 3]
        self.tris[t1] = [a, b, d]
        self.nbr[t1] = [n_bd, t2, n_ab]
        self.tris[t2] = [a, d, c]
        self.nbr[t2] = [n_dc, n_ca, t1]
        self.relink(n_bd, t2, t1)
        self.relink(n_ca, t1, t2)

    def wants_flip(self, t1, k1):
        """Lawson test with the lowest-index rule for cocircular quadruples."""
        t2 = self.nbr[t1][k1]
        if t2 < 0:
            return False
        T1 = self.tris[t1]
        d = self.tris[t2][self.edge_slot(t2, t1)]
        a, b, c = T1[k1], T1[(k1 + 1) % 3], T1[(k1 + 2) % 3]
        pa, pb, pc, pd = (self.pts[v] for v in (a, b, c, d))
        # the flipped pair must stay valid triangles
        if orient2d(pa, pb, pd) <= 0.0 or orient2d(pa, pd, pc) <= 0.0:
            return False
        cls = incircle(pa, pb, pc, pd)
        if cls == INSIDE:
            return True
        if cls == ON:
            return min(a, d) < min(b, c)
        return False


def _fill_hull(mesh):
    """Close concave pockets left on the hull after removing the super triangle."""
    for _ in range(len(mesh.tris) + 10):
        boundary = {}
        for t, alive in enumerate(mesh.alive):
            if not alive:
                continue
            tri = mesh.tris[t]
            for k in range(3):
                if mesh.nbr[t][k] < 0:
                    boundary[tri[(k + 1) % 3]] = (tri[(k + 2) % 3], t, k)
        prev = {b: a for a, (b, _, _) in boundary.items()}
        added = False
        for v in sorted(boundary):
            a = prev[v]
            c, t_vc, k_vc = boundary[v]
            pa, pv, pc = mesh.pts[a], mesh.pts[v], mesh.pts[c]
            if orient2d(pa, pv, pc) >= 0.0:
                continue
            poly = np.array([pa, pc, pv])
            blocked = any(
                w not in (a, v, c) and _in_triangle(mesh.pts[w], poly) for w in boundary
            )
            if blocked:
                continue
            _, t_av, k_av = boundary[a]
            nt = mesh.add((a, c, v), (t_vc, t_av, -1))
            mesh.nbr[t_vc][k_vc] = nt
            mesh.nbr[t_av][k_av] = nt
            added = True
            break
        if not added:
            return


def _in_triangle(p, tri):
    return all(orient2d(tri[k], tri[(k + 1) % 3], p) >= 0.0 for k in range(3))


def _legalize(mesh):
    limit = 50 * len(mesh.tris) + 100
    queue = [(t, k) for t in range(len(mesh.tris)) if mesh.alive[t] for k in range(3)]
    flips = 0
    while queue and flips < limit:
        t, k = queue.pop()
        if not mesh.alive[t] or mesh.nbr[t][k] < 0:
            continue
        if mesh.wants_flip(t, k):
            t2 = mesh.nbr[t][k]
            mesh.flip(t, k)
            flips += 1
            queue.extend((t, j) for j in range(3))
            queue.extend((t2, j) for j in range(3))


def delaunay(points, domain=None):
    """Bowyer-Watson Delaunay triangulation in input order.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        D-node coordinates; they must contain the domain vertices.
    domain : ConvexPolygon, optional
        When given, points are checked to lie in its closure.

    Returns
    -------
    Triangulation
        Deterministic for a fixed input order. Cocircular ties take the
        diagonal through the lowest-index vertex.
    """
    pts = _check_input(points, domain)
    n = len(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    center = 0.5 * (lo + hi)
    r = 100.0 * max(float(np.max(hi - lo)), 1e-300)
    sup = np.array([
        center + r * np.array([0.0, 2.0]),
        center + r * np.array([-np.sqrt(3.0), -1.0]),
        center + r * np.array([np.sqrt(3.0), -1.0]),
    ])
    all_pts = np.vstack([pts, sup])
    mesh = _Mesh(all_pts)
    mesh.add((n + 1, n + 2, n), (-1, -1, -1))
    last = 0
    for i in range(n):
        last = mesh.insert(i, last)
    for t, tri in enumerate(mesh.tris):
        if mesh.alive[t] and max(tri) >= n:
            mesh.alive[t] = False
            for k in range(3):
                mesh.relink(mesh.nbr[t][k], t, -1)
    _fill_hull(mesh)
    _legalize(mesh)

    keep = [t for t, alive in enumerate(mesh.alive) if alive]
    remap = {t: i for i, t in enumerate(keep)}
    tris = np.array([mesh.tris[t] for t in keep], dtype=np.int64)
    nbr = np.array([[remap.get(x, -1) for x in mesh.nbr[t]] for t in keep], dtype=np.int64)
    return Triangulation._assemble(pts, tris, nbr)


@dataclass
class DelaunayReport:
    violations: list
    min_angle: float
    max_angle: float
    min_edge: float

    @property
    def ok(self):
        return not self.violations


def check_delaunay(tri, rtol=1e-10):
    """Brute-force empty-circumcircle validator.

    Every (triangle, point) pair where the point lies strictly inside the
    circumcircle, beyond a relative radius tolerance, is listed.
    """
    pts = tri.points
    violations = []
    for t, (a, b, c) in enumerate(tri.triangles):
        try:
            cc = np.array(circumcenter(pts[a], pts[b], pts[c]))
        except GeometryError:
            continue
        r2 = float(np.sum((pts[a] - cc) ** 2))
        d2 = np.sum((pts - cc) ** 2, axis=1)
        inside = np.nonzero(d2 < r2 * (1.0 - rtol))[0]
        violations.extend((t, int(p)) for p in inside if p not in (a, b, c))
    p = pts[tri.triangles]
    angles = []
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cosv = np.sum(u * v, axis=1) / (np.hypot(*u.T) * np.hypot(*v.T))
        angles.append(np.degrees(np.arccos(np.clip(cosv, -1.0, 1.0))))
    angles = np.concatenate(angles)
    e = pts[tri.edge_nodes]
    lengths = np.hypot(*(e[:, 1] - e[:, 0]).T)
    return DelaunayReport(violations, float(angles.min()), float(angles.max()), float(lengths.min()))


CIRCUMCENTER = "circumcenter"
BOUNDARY_CLIP = "boundary_clip"


@dataclass(frozen=True)
class VoronoiDiagram:
    """Voronoi diagram of the D-nodes clipped to the domain.

    Attributes
    ----------
    v_nodes : ndarray, shape (m, 2)
        Merged circumcenters followed by boundary clip points (hull edge midpoints).
    kind : list of (str, tuple)
        ``("circumcenter", triangle ids)`` or ``("boundary_clip", (hull edge index,))``.
    cells : list of ndarray
        Clipped Voronoi polygon of each D-node, counterclockwise.
    dual_edge : ndarray, shape (e, 2)
        For every Delaunay edge the (tail, head) v_node pair: the left
        triangle's node, then the right triangle's node or the clip point.
    triangle_node : ndarray, shape (t,)
        v_node index of each triangle's circumcenter.
    """

    v_nodes: np.ndarray
    kind: list
    cells: list
    dual_edge: np.ndarray
    triangle_node: np.ndarray

    def cell_areas(self):
        return np.array([shoelace(c) for c in self.cells])


def _merge_circumcenters(tri, centers, radius):
    parent = list(range(len(centers)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (t1, t2) in tri.edge_tris:
        if t2 >= 0 and np.hypot(*(centers[t1] - centers[t2])) <= radius:
            r1, r2 = find(int(t1)), find(int(t2))
            if r1 != r2:
                parent[max(r1, r2)] = min(r1, r2)
    return [find(t) for t in range(len(centers))]


def voronoi(tri, domain, strict=True):
    """Clipped Voronoi diagram dual to ``tri``.

    Each D-node cell is the domain clipped by the bisector half-planes
    towards all of its Delaunay neighbors.

    Raises
    ------
    InadmissibleGridError
        With ``strict``, when a circumcenter lies outside the closed domain.
    """
    pts = tri.points
    diam = domain.diameter
    merge_r = EPS_GEOM * diam
    centers = np.array([circumcenter(*pts[t]) for t in tri.triangles])
    if strict:
        tol = 1e-10 * diam
        for t, c in enumerate(centers):
            if not domain.contains(c, tol):
                raise InadmissibleGridError(
                    f"inadmissible: Voronoi vertex outside domain (triangle {t}, at ({float(c[0])!r}, {float(c[1])!r}))"
                )

    roots = _merge_circumcenters(tri, centers, merge_r)
    groups = {}
    for t, r in enumerate(roots):
        groups.setdefault(r, []).append(t)
    order = sorted(groups)
    v_nodes, kind = [], []
    triangle_node = np.empty(len(centers), dtype=np.int64)
    for r in order:
        triangle_node[groups[r]] = len(v_nodes)
        v_nodes.append(centers[r])
        kind.append((CIRCUMCENTER, tuple(groups[r])))
    clip_node = {}
    for h, (a, b) in enumerate(tri.boundary_edges):
        clip_node[(int(a), int(b))] = len(v_nodes)
        v_nodes.append(0.5 * (pts[a] + pts[b]))
        kind.append((BOUNDARY_CLIP, (h,)))

    dual = np.empty((tri.n_edges, 2), dtype=np.int64)
    for e, ((a, b), (tl, tr)) in enumerate(zip(tri.edge_nodes, tri.edge_tris)):
        dual[e, 0] = triangle_node[tl]
        dual[e, 1] = triangle_node[tr] if tr >= 0 else clip_node[(int(a), int(b))]

    cells = []
    for i, nbrs in enumerate(tri.adjacency()):
        poly = domain.vertices
        for j in nbrs:
            d = pts[j] - pts[i]
            # (x - p_i) . d <= |d|^2 / 2, written in absolute coordinates
            poly = clip_vertices(poly, d, float(d @ pts[i]) + 0.5 * float(d @ d))
        cells.append(poly)
    return VoronoiDiagram(np.array(v_nodes, dtype=float).reshape(-1, 2), kind, cells, dual, triangle_node)
