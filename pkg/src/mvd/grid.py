"""Merged Voronoi-Delaunay grid: nodes, orthodiagonal cells, frames and measures."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import EPS_GEOM, ConvexPolygon
from .tessellation import BOUNDARY_CLIP, InadmissibleGridError, delaunay, voronoi

D_NODE = 0
V_CIRCUM = 1
V_BCLIP = 2
ROLE_NAMES = {D_NODE: "D", V_CIRCUM: "V_circum", V_BCLIP: "V_bclip"}

# incidence slots: which end of which diagonal a node occupies in a cell
V_TAIL, V_HEAD, D_TAIL, D_HEAD = 0, 1, 2, 3


class MvdGrid:
    """Immutable merged grid over a convex domain.

    Scalar grid functions are arrays of shape ``(n_nodes,)``; vector grid
    functions are arrays of shape ``(n_cells, 2)`` holding the components
    along the local frame ``(e1, e2)`` of each cell. ``e1`` follows the
    V-diagonal, ``e2`` the D-diagonal, and ``e1 x e2 = +1``.

    Parameters
    ----------
    domain : ConvexPolygon
    points : ndarray, shape (n, 2)
    role : ndarray of int
        ``D_NODE``, ``V_CIRCUM`` or ``V_BCLIP`` per node.
    boundary : ndarray of bool
        Node lies on the domain boundary.
    measure : ndarray
        Full control-volume measure per node (Voronoi cell area for D-nodes,
        dual triangle area for circumcenters, 0 for clip points).
    cells : ndarray of int, shape (m, 4)
        ``(d_tail, d_head, v_tail, v_head)`` node ids per cell.
    center : ndarray, shape (m, 2)
    cell_boundary : ndarray of bool
    """

    def __init__(self, domain, points, role, boundary, measure, cells, center, cell_boundary):
        self.domain = domain
        self.points = _frozen(np.asarray(points, dtype=float))
        self.role = _frozen(np.asarray(role, dtype=np.int64))
        self.boundary = _frozen(np.asarray(boundary, dtype=bool))
        self.measure = _frozen(np.asarray(measure, dtype=float))
        self.cells = _frozen(np.asarray(cells, dtype=np.int64).reshape(-1, 4))
        self.center = _frozen(np.asarray(center, dtype=float).reshape(-1, 2))
        self.cell_boundary = _frozen(np.asarray(cell_boundary, dtype=bool))

        p = self.points
        dt, dh, vt, vh = self.cells.T
        dvec = p[dh] - p[dt]
        self.L_D = _frozen(np.hypot(dvec[:, 0], dvec[:, 1]))
        self.L_V = _frozen(np.hypot(*(p[vh] - p[vt]).T))
        e2 = dvec / self.L_D[:, None]
        self.e2 = _frozen(e2)
        self.e1 = _frozen(np.column_stack([e2[:, 1], -e2[:, 0]]))
        self.area = _frozen(0.5 * self.L_D * self.L_V)

    @property
    def n_nodes(self):
        return len(self.points)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def weight(self):
        """Node weight of the merged inner product, half the control-volume measure."""
        return 0.5 * self.measure

    @property
    def interior(self):
        return ~self.boundary

    @property
    def d_nodes(self):
        return np.nonzero(self.role == D_NODE)[0]

    @property
    def v_nodes(self):
        return np.nonzero(self.role != D_NODE)[0]

    @property
    def flux_nodes(self):
        """Nodes with a closed or boundary-closed control volume (all but clip points)."""
        return np.nonzero(self.role != V_BCLIP)[0]

    @property
    def h(self):
        """Representative mesh size, the longest D-diagonal."""
        return float(self.L_D.max())

    @cached_property
    def incidence(self):
        """Per node, an ``(k, 2)`` array of ``(cell, slot)`` pairs in cell order."""
        rows = [[] for _ in range(self.n_nodes)]
        for m, (dt, dh, vt, vh) in enumerate(self.cells):
            rows[vt].append((m, V_TAIL))
            rows[vh].append((m, V_HEAD))
            rows[dt].append((m, D_TAIL))
            rows[dh].append((m, D_HEAD))
        return [np.array(r, dtype=np.int64).reshape(-1, 2) for r in rows]

    def kite(self, m):
        """Vertex cycle ``(d_tail, v_tail, d_head, v_head)`` of cell ``m``."""
        dt, dh, vt, vh = self.cells[m]
        return self.points[[dt, vt, dh, vh]]

    def to_global(self, v):
        """Convert local-frame cell vectors to Cartesian components."""
        v = np.asarray(v, dtype=float)
        return v[:, :1] * self.e1 + v[:, 1:2] * self.e2

    def to_local(self, g):
        g = np.asarray(g, dtype=float)
        return np.column_stack([np.sum(g * self.e1, axis=1), np.sum(g * self.e2, axis=1)])

    def __repr__(self):
        return (f"MvdGrid(n_nodes={self.n_nodes}, n_cells={self.n_cells}, "
                f"n_d={len(self.d_nodes)}, n_v={len(self.v_nodes)})")


def _frozen(a):
    a.flags.writeable = False
    return a


def build_mvd(tri, vor, domain):
    """Merge a Delaunay triangulation and its clipped Voronoi diagram.

    One cell per Delaunay edge with a non-degenerate dual edge. Interior
    edges give quadrilaterals spanned by the two adjacent circumcenters;
    hull edges give triangles whose V-diagonal ends at the edge midpoint.
    Edges between cocircular triangles, whose circumcenters were merged,
    have a zero-length dual and carry no cell.

    Raises
    ------
    InadmissibleGridError
        If a dual edge runs against its Delaunay edge, or a hull cell is
        degenerate (circumcenter on the hull edge).
    """
    pts_d = tri.points
    n_d = len(pts_d)
    diam = domain.diameter
    points = np.vstack([pts_d, vor.v_nodes])
    role = np.concatenate([
        np.full(n_d, D_NODE),
        [V_BCLIP if k == BOUNDARY_CLIP else V_CIRCUM for k, _ in vor.kind],
    ])
    tol = 1e-10 * diam
    boundary = np.array([role[i] == V_BCLIP or domain.on_boundary(p, tol) for i, p in enumerate(points)])

    areas = tri.triangle_areas()
    measure = np.zeros(len(points))
    measure[:n_d] = vor.cell_areas()
    for j, (kind, members) in enumerate(vor.kind):
        if kind != BOUNDARY_CLIP:
            measure[n_d + j] = float(np.sum(areas[list(members)]))

    cells, centers, cbound = [], [], []
    for e, ((a, b), (tl, tr)) in enumerate(zip(tri.edge_nodes, tri.edge_tris)):
        vt, vh = (int(x) + n_d for x in vor.dual_edge[e])
        if vt == vh:
            continue
        m = len(cells)
        pa, pb = pts_d[a], pts_d[b]
        dvec = pb - pa
        e1 = np.array([dvec[1], -dvec[0]]) / np.hypot(*dvec)
        span = float((points[vh] - points[vt]) @ e1)
        if tr < 0:
            if span <= EPS_GEOM * diam:
                raise InadmissibleGridError(
                    f"inadmissible: degenerate boundary cell {m} (hull edge {a}-{b}, dual length {span:.3e})"
                )
        elif span <= EPS_GEOM * diam:
            raise InadmissibleGridError(
                f"inadmissible: cell {m} diagonals do not intersect (edge {a}-{b}, signed dual length {span:.3e})"
            )
        cells.append((a, b, vt, vh))
        centers.append(0.5 * (pa + pb))
        cbound.append(tr < 0)
    return MvdGrid(domain, points, role, boundary, measure, cells, centers, cbound)


def grid_from_points(points, domain=None):
    """Convenience pipeline: triangulate, build the Voronoi dual, merge."""
    if domain is None:
        domain = ConvexPolygon.unit_square()
    tri = delaunay(points, domain)
    return build_mvd(tri, voronoi(tri, domain), domain)


@dataclass
class AdmissibilityReport:
    min_L_V: float
    max_L_V: float
    min_L_D: float
    max_L_D: float
    min_cell_area: float
    circumcenters_outside: int
    nonconvex_cells: list
    min_v_boundary_distance: float
    v_nodes_inside: bool

    def lines(self):
        return [
            f"L_V range            [{self.min_L_V:.6e}, {self.max_L_V:.6e}]",
            f"L_D range            [{self.min_L_D:.6e}, {self.max_L_D:.6e}]",
            f"min cell area        {self.min_cell_area:.6e}",
            f"circumcenters outside their triangles  {self.circumcenters_outside}",
            f"cells with non-crossing V-diagonal     {len(self.nonconvex_cells)}",
            f"min V-node distance to boundary        {self.min_v_boundary_distance:.6e}",
            f"every interior V-node inside its control volume: {self.v_nodes_inside}",
        ]


def admissibility_report(grid):
    """Regularity summary of a grid.

    A circumcenter is inside its dual triangle (or merged cyclic polygon)
    exactly when it sits on the inner side of every cell it ends. Cells
    where that fails for an endpoint are reported as non-convex (their
    V-diagonal meets the D-diagonal line outside the V-segment).
    """
    p = grid.points
    dt, dh, vt, vh = grid.cells.T
    side_t = np.sum((grid.center - p[vt]) * grid.e1, axis=1)
    side_h = np.sum((p[vh] - grid.center) * grid.e1, axis=1)
    tol = EPS_GEOM * grid.domain.diameter
    bad_t = side_t <= tol
    bad_h = (side_h <= tol) & (grid.role[vh] == V_CIRCUM)
    outside_nodes = set(vt[bad_t].tolist()) | set(vh[bad_h].tolist())
    circ = np.nonzero(grid.role == V_CIRCUM)[0]
    dist = [grid.domain.distance_to_boundary(p[j]) for j in circ]
    return AdmissibilityReport(
        min_L_V=float(grid.L_V.min()),
        max_L_V=float(grid.L_V.max()),
        min_L_D=float(grid.L_D.min()),
        max_L_D=float(grid.L_D.max()),
        min_cell_area=float(grid.area.min()),
        circumcenters_outside=len(outside_nodes),
        nonconvex_cells=sorted(np.nonzero(bad_t | bad_h)[0].tolist()),
        min_v_boundary_distance=float(min(dist)) if dist else float("nan"),
        v_nodes_inside=not outside_nodes,
    )


def _support_mask(grid, support):
    if support == "all":
        return np.ones(grid.n_nodes, dtype=bool)
    if support == "interior":
        return grid.interior
    raise ValueError(f"unknown support {support!r}")


def inner_omega(y, z, grid, support="all"):
    """Weighted node inner product ``sum y z S`` over the chosen node set."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != (grid.n_nodes,) or z.shape != (grid.n_nodes,):
        raise ValueError("grid functions must be defined on every node")
    mask = _support_mask(grid, support)
    return float(np.sum((y * z * grid.weight)[mask]))


def norm_omega(y, grid, support="all"):
    return float(np.sqrt(inner_omega(y, y, grid, support)))


def inner_cells(u, v, grid):
    """Cell inner product ``sum S* (u1 v1 + u2 v2)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (grid.n_cells, 2) or v.shape != (grid.n_cells, 2):
        raise ValueError("vector grid functions must have shape (n_cells, 2)")
    return float(np.sum(grid.area * np.sum(u * v, axis=1)))


def norm_cells(v, grid):
    return float(np.sqrt(inner_cells(v, v, grid)))


class SamplingError(ValueError):
    pass


def sample_scalar(f, grid, support="all"):
    """Evaluate ``f(x1, x2)`` at the nodes; nodes off the support get 0.

    ``f`` must accept coordinate arrays.
    """
    mask = _support_mask(grid, support)
    vals = np.broadcast_to(np.asarray(f(grid.points[:, 0], grid.points[:, 1]), dtype=float),
                           (grid.n_nodes,)).copy()
    bad = np.nonzero(mask & ~np.isfinite(vals))[0]
    if len(bad):
        k = bad[0]
        raise SamplingError(f"non-finite sample at node {k} {tuple(grid.points[k])}")
    vals[~mask] = 0.0
    return vals


def sample_vector(F, grid):
    """Evaluate a Cartesian field ``F(x1, x2) -> (F1, F2)`` at cell centers, in local frames."""
    x1, x2 = grid.center[:, 0], grid.center[:, 1]
    f1, f2 = F(x1, x2)
    g = np.column_stack([np.broadcast_to(np.asarray(f1, dtype=float), x1.shape),
                         np.broadcast_to(np.asarray(f2, dtype=float), x1.shape)])
    bad = np.nonzero(~np.all(np.isfinite(g), axis=1))[0]
    if len(bad):
        m = bad[0]
        raise SamplingError(f"non-finite sample at cell {m} center {tuple(grid.center[m])}")
    return grid.to_local(g)


@dataclass
class InvariantCheck:
    name: str
    value: float
    tol: float
    ok: bool
    detail: str = ""


def grid_invariants(grid, rtol=1e-10):
    """Re-verify the structural invariants of a grid.

    Area partitions, double cover, frame orthonormality, diagonal
    orthogonality, positive cell areas, kite areas and boundary-cell
    centers. Returns a list of :class:`InvariantCheck`.
    """
    meas = grid.domain.area
    p = grid.points
    dt, dh, vt, vh = grid.cells.T
    checks = []

    def rel(name, total):
        err = abs(total - meas) / meas
        checks.append(InvariantCheck(name, float(total), rtol, err <= rtol))

    rel("sum of cell areas", np.sum(grid.area))
    rel("sum of node weights", np.sum(grid.weight))
    rel("D-node control volumes", np.sum(grid.measure[grid.role == D_NODE]))
    rel("V-node control volumes", np.sum(grid.measure[grid.role != D_NODE]))

    e1, e2 = grid.e1, grid.e2
    frame = max(float(np.max(np.abs(np.hypot(*e1.T) - 1.0), initial=0.0)),
                float(np.max(np.abs(np.hypot(*e2.T) - 1.0), initial=0.0)),
                float(np.max(np.abs(np.sum(e1 * e2, axis=1)), initial=0.0)),
                float(np.max(np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] - 1.0), initial=0.0)))
    checks.append(InvariantCheck("frame orthonormality", frame, 1e-14, frame <= 1e-14))

    vvec = p[vh] - p[vt]
    cos = np.abs(np.sum(vvec * e2, axis=1)) / np.maximum(grid.L_V, np.finfo(float).tiny)
    bad = np.nonzero(cos > rtol)[0]
    checks.append(InvariantCheck("diagonal orthogonality", float(cos.max(initial=0.0)), rtol, not len(bad),
                                 _cells("cells", bad)))

    span = np.sum(vvec * e1, axis=1)
    bad = np.nonzero(span <= EPS_GEOM * grid.domain.diameter)[0]
    checks.append(InvariantCheck("positive V-diagonal span", float(span.min(initial=np.inf)), 0.0, not len(bad),
                                 _cells("cells", bad)))

    kite = 0.5 * np.abs((p[dh] - p[dt])[:, 0] * vvec[:, 1] - (p[dh] - p[dt])[:, 1] * vvec[:, 0])
    kerr = np.abs(kite - grid.area) / np.maximum(grid.area, np.finfo(float).tiny)
    bad = np.nonzero(kerr > 1e-12)[0]
    checks.append(InvariantCheck("kite areas", float(kerr.max(initial=0.0)), 1e-12, not len(bad),
                                 _cells("cells", bad)))

    b = grid.cell_boundary
    off = np.hypot(*(p[vh[b]] - grid.center[b]).T) if b.any() else np.zeros(0)
    tol = rtol * grid.domain.diameter
    bad = np.nonzero(b)[0][off > tol]
    checks.append(InvariantCheck("boundary cell centers", float(off.max(initial=0.0)), tol, not len(bad),
                                 _cells("cells", bad)))
    clip = grid.role == V_BCLIP
    checks.append(InvariantCheck("clip nodes carry no volume", float(np.abs(grid.measure[clip]).max(initial=0.0)),
                                 0.0, not np.any(grid.measure[clip])))
    return checks


def _cells(label, idx, limit=10):
    if not len(idx):
        return ""
    shown = ", ".join(str(i) for i in idx[:limit])
    more = f" (+{len(idx) - limit} more)" if len(idx) > limit else ""
    return f"{label} {shown}{more}"
