"""Grid gradient, divergence and the two planar rotors on the merged grid.

Sign conventions: a node at the tail of a cell diagonal sees that cell with
orientation +1, a node at the head with -1. For a circumcenter the outward
normal across the cell's Delaunay edge is ``sigma * e1`` and the ccw tangent
``sigma * e2``; for a D-node the outward normal across the Voronoi edge is
``sigma * e2`` and the ccw tangent ``-sigma * e1``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .grid import D_HEAD, D_TAIL, V_BCLIP, V_HEAD, V_TAIL

SIGMA = np.array([1.0, -1.0, 1.0, -1.0])  # indexed by incidence slot


class OperatorDomainError(ValueError):
    pass


def orientation_sign(grid):
    """Per-cell signs of ``(v_tail, v_head, d_tail, d_head)``, shape ``(n_cells, 4)``."""
    return np.tile(SIGMA, (grid.n_cells, 1))


def _diffs(y, grid):
    y = np.asarray(y, dtype=float)
    if y.shape != (grid.n_nodes,):
        raise ValueError("scalar grid function must be defined on every node")
    dt, dh, vt, vh = grid.cells.T
    return (y[vh] - y[vt]) / grid.L_V, (y[dh] - y[dt]) / grid.L_D


def grad_h(y, grid):
    """Cell gradient of a node function, in local frames."""
    gv, gd = _diffs(y, grid)
    return np.column_stack([gv, gd])


def rot2d_scalar_h(y, grid):
    """Rotor of a scalar (out-of-plane) node function: the gradient turned by -90 degrees."""
    gv, gd = _diffs(y, grid)
    return np.column_stack([gd, -gv])


def _check_vector(v, grid):
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.n_cells, 2):
        raise ValueError("vector grid function must have shape (n_cells, 2)")
    return v


def _node_sum(v, grid, k, kind):
    """Signed normal-flux ("div") or circulation ("rot") sum around node ``k``."""
    total = 0.0
    d_node = grid.role[k] == 0
    for m, slot in grid.incidence[k]:
        s = SIGMA[slot]
        if kind == "div":
            if d_node:
                total += s * v[m, 1] * grid.L_V[m]
            else:
                total += s * v[m, 0] * grid.L_D[m]
        else:
            if d_node:
                total += -s * v[m, 0] * grid.L_V[m]
            else:
                total += s * v[m, 1] * grid.L_D[m]
    return total / grid.measure[k]


def _node_op(v, grid, at, kind):
    v = _check_vector(v, grid)
    if at is not None:
        if grid.role[at] == V_BCLIP:
            raise OperatorDomainError(
                f"{'divergence' if kind == 'div' else 'rotor'} undefined at degenerate control volume (node {at})"
            )
        return _node_sum(v, grid, at, kind)
    # same terms and summation order as _node_sum, vectorized
    dt, dh, vt, vh = grid.cells.T
    m = np.arange(grid.n_cells)
    nodes = np.concatenate([vt, vh, dt, dh])
    cells = np.concatenate([m, m, m, m])
    slot = np.repeat(np.arange(4), grid.n_cells)
    s = SIGMA[slot]
    on_d = slot >= D_TAIL
    if kind == "div":
        terms = np.where(on_d, s * v[cells, 1] * grid.L_V[cells], s * v[cells, 0] * grid.L_D[cells])
    else:
        terms = np.where(on_d, -s * v[cells, 0] * grid.L_V[cells], s * v[cells, 1] * grid.L_D[cells])
    order = np.lexsort((cells, nodes))
    total = np.zeros(grid.n_nodes)
    np.add.at(total, nodes[order], terms[order])
    out = np.zeros(grid.n_nodes)
    k = grid.flux_nodes
    out[k] = total[k] / grid.measure[k]
    return out


def div_h(v, grid, at=None):
    """Divergence of a cell vector field at nodes.

    With ``at`` the value at that node; otherwise an array over all nodes
    where boundary clip points (zero control volume) hold 0. At boundary
    D-nodes the flux through the domain boundary is taken as zero.
    """
    return _node_op(v, grid, at, "div")


def rot2d_vector_h(v, grid, at=None):
    """Rotor of an in-plane cell vector field at nodes (ccw circulation density).

    Boundary conventions as for :func:`div_h`, with zero tangential data.
    """
    return _node_op(v, grid, at, "rot")


# sparse matrix forms; vector unknowns are interleaved as (v1_0, v2_0, v1_1, ...)

def _pair_matrix(grid, comp_v, comp_d, sign_v):
    m = np.arange(grid.n_cells)
    dt, dh, vt, vh = grid.cells.T
    inv_v = sign_v / grid.L_V
    inv_d = 1.0 / grid.L_D
    rows = np.concatenate([2 * m + comp_v, 2 * m + comp_v, 2 * m + comp_d, 2 * m + comp_d])
    cols = np.concatenate([vh, vt, dh, dt])
    vals = np.concatenate([inv_v, -inv_v, inv_d, -inv_d])
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * grid.n_cells, grid.n_nodes))


def gradient_matrix(grid):
    """Sparse ``grad_h``, shape ``(2 n_cells, n_nodes)``."""
    return _pair_matrix(grid, 0, 1, 1.0)


def rot_scalar_matrix(grid):
    """Sparse ``rot2d_scalar_h``, shape ``(2 n_cells, n_nodes)``."""
    return _pair_matrix(grid, 1, 0, -1.0)


def _node_matrix(grid, kind):
    dt, dh, vt, vh = grid.cells.T
    m = np.arange(grid.n_cells)
    if kind == "div":
        v_comp, d_comp, d_sign = 0, 1, 1.0
    else:
        v_comp, d_comp, d_sign = 1, 0, -1.0
    rows = np.concatenate([vt, vh, dt, dh])
    cols = np.concatenate([2 * m + v_comp, 2 * m + v_comp, 2 * m + d_comp, 2 * m + d_comp])
    vals = np.concatenate([grid.L_D, -grid.L_D, d_sign * grid.L_V, -d_sign * grid.L_V])
    keep = grid.role[rows] != V_BCLIP
    inv = np.zeros(grid.n_nodes)
    ok = grid.measure > 0
    inv[ok] = 1.0 / grid.measure[ok]
    return sp.csr_matrix((vals[keep] * inv[rows[keep]], (rows[keep], cols[keep])),
                         shape=(grid.n_nodes, 2 * grid.n_cells))


def divergence_matrix(grid):
    """Sparse ``div_h``, shape ``(n_nodes, 2 n_cells)``; clip-point rows are empty."""
    return _node_matrix(grid, "div")


def rot_vector_matrix(grid):
    """Sparse ``rot2d_vector_h``, shape ``(n_nodes, 2 n_cells)``."""
    return _node_matrix(grid, "rot")


# contour quadrature oracles

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


def control_volume_edges(grid, k):
    """Counterclockwise boundary segments of node ``k``'s control volume.

    Returns a list of ``(cell, start, end)``. Segments on the domain
    boundary (for boundary D-nodes) are not included.
    """
    p = grid.points
    out = []
    d_node = grid.role[k] == 0
    for m, slot in grid.incidence[k]:
        dt, dh, vt, vh = grid.cells[m]
        if d_node:
            a, b = (vh, vt) if slot == D_TAIL else (vt, vh)
        else:
            a, b = (dt, dh) if slot == V_TAIL else (dh, dt)
        out.append((int(m), p[a], p[b]))
    return out


def contour_oracle(F, grid, k, kind="flux", rule="gauss"):
    """Contour integral of ``F . n`` (flux) or ``F . tau`` (circulation) over
    the control volume of node ``k``, divided by its measure.

    ``rule="gauss"`` integrates the analytic field with 8 Gauss points per
    segment on the true geometry; ``rule="center"`` is the one-point rule
    that evaluates ``F`` at each cell center (the piecewise constant
    interpolation the discrete operators use).
    """
    if kind not in ("flux", "circulation"):
        raise ValueError(f"unknown kind {kind!r}")
    if grid.role[k] == V_BCLIP:
        raise OperatorDomainError(f"no control volume at boundary clip node {k}")
    if rule == "center":
        return _center_rule(F, grid, k, kind)
    if rule != "gauss":
        raise ValueError(f"unknown rule {rule!r}")
    total = 0.0
    for _, a, b in control_volume_edges(grid, k):
        d = b - a
        t = 0.5 * (_GAUSS_X + 1.0)
        x = a[0] + t * d[0]
        y = a[1] + t * d[1]
        f1, f2 = F(x, y)
        f1 = np.broadcast_to(f1, x.shape)
        f2 = np.broadcast_to(f2, x.shape)
        if kind == "flux":
            integrand = f1 * d[1] - f2 * d[0]
        else:
            integrand = f1 * d[0] + f2 * d[1]
        total += 0.5 * float(np.dot(_GAUSS_W, integrand))
    return total / grid.measure[k]


def _center_rule(F, grid, k, kind):
    inc = grid.incidence[k]
    cells = inc[:, 0]
    c = grid.center[cells]
    f1, f2 = F(c[:, 0], c[:, 1])
    f1 = np.broadcast_to(np.asarray(f1, dtype=float), cells.shape)
    f2 = np.broadcast_to(np.asarray(f2, dtype=float), cells.shape)
    d_node = grid.role[k] == 0
    total = 0.0
    for i, (m, slot) in enumerate(inc):
        s = SIGMA[slot]
        if d_node:
            n = s * grid.e2[m]
            tau = -s * grid.e1[m]
            length = grid.L_V[m]
        else:
            n = s * grid.e1[m]
            tau = s * grid.e2[m]
            length = grid.L_D[m]
        vec = n if kind == "flux" else tau
        total += (f1[i] * vec[0] + f2[i] * vec[1]) * length
    return total / grid.measure[k]
