"""Assembly and solution of the four model boundary value problems.

Each problem is stored as the symmetric bilinear-form matrix ``B`` on the
free unknowns together with the weights ``W``; the grid operator itself is
``A = W^{-1} B``. Homogeneous boundary data are eliminated.

=================  =========================  ===================================
problem            unknowns                   boundary condition
=================  =========================  ===================================
diffusion          interior nodes             y = 0 on boundary nodes
rotrot-scalar      interior nodes             y = 0 on boundary nodes
graddiv            cell components            normal component 0 on boundary cells
rotrot-vector      cell components            tangential component 0 on boundary cells
=================  =========================  ===================================
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .grid import sample_scalar
from .operators import divergence_matrix, gradient_matrix, rot_scalar_matrix, rot_vector_matrix

SCALAR_PROBLEMS = ("diffusion", "rotrot-scalar")
VECTOR_PROBLEMS = ("graddiv", "rotrot-vector")
PROBLEMS = SCALAR_PROBLEMS + VECTOR_PROBLEMS


class CoefficientError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    pass


@dataclass
class CoefficientSet:
    """Coefficients ``k``, ``c`` and right-hand side ``f`` as vectorized callables.

    For vector problems ``f`` is a pair ``(f1, f2)`` of Cartesian components.
    """

    k: Callable
    c: Callable
    f: object


@dataclass
class DiscreteSystem:
    problem: str
    grid: object
    matrix: sp.csr_matrix
    weight: np.ndarray
    rhs: np.ndarray
    dofs: np.ndarray
    n_full: int
    pinned: np.ndarray = field(repr=False)

    @property
    def is_vector(self):
        return self.problem in VECTOR_PROBLEMS

    def operator(self):
        """The grid operator ``A = W^{-1} B`` on the free unknowns."""
        return sp.diags(1.0 / self.weight) @ self.matrix

    def expand(self, u):
        """Embed a free-unknown vector into a full grid function.

        Scalar problems give shape ``(n_nodes,)``, vector problems
        ``(n_cells, 2)`` in local frames.
        """
        full = np.zeros(self.n_full)
        full[self.dofs] = u
        return full.reshape(-1, 2) if self.is_vector else full

    def restrict(self, full):
        return np.asarray(full, dtype=float).ravel()[self.dofs]


def _positive(name, values, points):
    values = np.asarray(values, dtype=float)
    bad = np.nonzero(~(np.isfinite(values) & (values > 0.0)))[0]
    if len(bad):
        i = bad[0]
        raise CoefficientError(
            f"coefficient {name} must be positive: {name}({float(points[i][0])!r}, {float(points[i][1])!r}) = {float(values[i])!r}"
        )
    return values


def _sample(fn, xy):
    return np.broadcast_to(np.asarray(fn(xy[:, 0], xy[:, 1]), dtype=float), (len(xy),))


def _finite(name, values, points):
    bad = np.nonzero(~np.isfinite(values))[0]
    if len(bad):
        i = bad[0]
        raise CoefficientError(f"{name} is not finite at ({float(points[i][0])!r}, {float(points[i][1])!r})")
    return values


def _scalar_system(problem, grid, coeffs, op):
    free = np.nonzero(grid.interior)[0]
    k = _positive("k", _sample(coeffs.k, grid.center), grid.center)
    xy = grid.points[free]
    c = _positive("c", _sample(coeffs.c, xy), xy)
    f = _finite("f", _sample(coeffs.f, xy), xy)
    w = grid.weight[free]
    cell_w = np.repeat(grid.area * k, 2)
    stiff = (op.T @ sp.diags(cell_w) @ op).tocsr()[free][:, free]
    B = (stiff + sp.diags(c * w)).tocsr()
    return DiscreteSystem(problem, grid, B, w, w * f, free, grid.n_nodes, np.nonzero(grid.boundary)[0])


def _vector_system(problem, grid, coeffs, op, free_boundary_comp):
    nodes = grid.flux_nodes
    comp = np.tile([0, 1], grid.n_cells)
    cell = np.repeat(np.arange(grid.n_cells), 2)
    bnd = grid.cell_boundary[cell]
    free = np.nonzero(~bnd | (comp == free_boundary_comp))[0]
    pinned = np.nonzero(bnd & (comp != free_boundary_comp))[0]

    xy = grid.points[nodes]
    k_nodes = np.zeros(grid.n_nodes)
    k_nodes[nodes] = _positive("k", _sample(coeffs.k, xy), xy)
    used = np.unique(cell[free])
    c = np.ones(grid.n_cells)
    c[used] = _positive("c", _sample(coeffs.c, grid.center[used]), grid.center[used])
    f1, f2 = coeffs.f
    fg = np.column_stack([_sample(f1, grid.center), _sample(f2, grid.center)])
    _finite("f", fg[used].ravel(), np.repeat(grid.center[used], 2, axis=0))
    f_local = grid.to_local(fg).ravel()

    node_w = grid.weight * k_nodes
    stiff = (op.T @ sp.diags(node_w) @ op).tocsr()[free][:, free]
    w = np.repeat(grid.area, 2)[free]
    B = (stiff + sp.diags(np.repeat(c, 2)[free] * w)).tocsr()
    return DiscreteSystem(problem, grid, B, w, w * f_local[free], free, 2 * grid.n_cells, pinned)


def assemble_diffusion(grid, coeffs):
    """``-div(k grad u) + c u = f`` with ``u = 0`` on the boundary; ``k`` sampled at cell centers."""
    return _scalar_system("diffusion", grid, coeffs, gradient_matrix(grid))


def assemble_rotrot_scalar(grid, coeffs):
    """Scalar rot-rot problem; built from the scalar rotor, equal to diffusion on this grid."""
    return _scalar_system("rotrot-scalar", grid, coeffs, rot_scalar_matrix(grid))


def assemble_graddiv(grid, coeffs):
    """``-grad(k div u) + c u = f`` with ``u . n = 0``; ``k`` sampled at nodes."""
    return _vector_system("graddiv", grid, coeffs, divergence_matrix(grid), 1)


def assemble_rotrot_vector(grid, coeffs):
    """``rot(k rot u) + c u = f`` with ``u x n = 0``; ``k`` sampled at nodes."""
    return _vector_system("rotrot-vector", grid, coeffs, rot_vector_matrix(grid), 0)


ASSEMBLERS = {
    "diffusion": assemble_diffusion,
    "rotrot-scalar": assemble_rotrot_scalar,
    "graddiv": assemble_graddiv,
    "rotrot-vector": assemble_rotrot_vector,
}


def assemble(problem, grid, coeffs):
    try:
        return ASSEMBLERS[problem](grid, coeffs)
    except KeyError:
        raise ValueError(f"unknown problem {problem!r}; choose from {', '.join(PROBLEMS)}") from None


def apply_operator(problem, grid, coeffs, full):
    """Matrix-free ``A u`` on a full grid function, through the node/cell operators.

    Used to cross-check the assembled forms.
    """
    from . import operators as ops

    if problem in SCALAR_PROBLEMS:
        vec = ops.grad_h(full, grid) if problem == "diffusion" else ops.rot2d_scalar_h(full, grid)
        k = _sample(coeffs.k, grid.center)
        flux = vec * k[:, None]
        if problem == "diffusion":
            out = -ops.div_h(flux, grid)
        else:
            out = ops.rot2d_vector_h(flux, grid)
        c = sample_scalar(coeffs.c, grid)
        return out + c * full
    k = np.zeros(grid.n_nodes)
    nodes = grid.flux_nodes
    k[nodes] = _sample(coeffs.k, grid.points[nodes])
    c = _sample(coeffs.c, grid.center)
    if problem == "graddiv":
        out = -ops.grad_h(k * ops.div_h(full, grid), grid)
    else:
        out = ops.rot2d_scalar_h(k * ops.rot2d_vector_h(full, grid), grid)
    return out + c[:, None] * full


@dataclass
class SolveStats:
    iterations: int
    residual: float
    converged: bool


def pcg(B, b, tol=1e-10, maxit=None, x0=None):
    """Jacobi-preconditioned conjugate gradients for symmetric positive definite ``B``.

    Stops when ``||B x - b|| / ||b|| <= tol``; the returned residual is
    recomputed from scratch.
    """
    B = sp.csr_matrix(B)
    b = np.asarray(b, dtype=float)
    n = len(b)
    if maxit is None:
        maxit = 10 * n + 10
    diag = B.diagonal()
    if np.any(diag <= 0.0):
        raise NotPositiveDefiniteError("matrix not positive definite")
    inv_d = 1.0 / diag
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros(n), SolveStats(0, 0.0, True)
    r = b - B @ x
    z = inv_d * r
    p = z.copy()
    rz = float(r @ z)
    it = 0
    while it < maxit:
        if np.linalg.norm(r) <= tol * bnorm:
            true_res = float(np.linalg.norm(b - B @ x))
            if true_res <= tol * bnorm:
                break
            r = b - B @ x
            z = inv_d * r
            p = z.copy()
            rz = float(r @ z)
        q = B @ p
        pq = float(p @ q)
        if pq <= 0.0:
            raise NotPositiveDefiniteError("matrix not positive definite")
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = inv_d * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    res = float(np.linalg.norm(b - B @ x)) / bnorm
    return x, SolveStats(it, res, res <= tol)


def cg_solve(system, tol=1e-10, maxit=None):
    """Solve an assembled :class:`DiscreteSystem`; returns ``(u_free, SolveStats)``."""
    return pcg(system.matrix, system.rhs, tol, maxit)


@dataclass
class SpdReport:
    asymmetry: float
    min_rayleigh: float
    trials: int

    @property
    def positive(self):
        return self.min_rayleigh > 0.0


def spd_probe(B, trials=100, seed=0):
    """Largest ``|B - B^T|`` entry and smallest Rayleigh quotient over random unit vectors."""
    B = sp.csr_matrix(B)
    diff = (B - B.T).tocoo()
    asym = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    rng = np.random.default_rng(seed)
    quotients = []
    for _ in range(trials):
        x = rng.standard_normal(B.shape[0])
        x /= np.linalg.norm(x)
        quotients.append(float(x @ (B @ x)))
    return SpdReport(asym, min(quotients), trials)


def solve(problem, grid, coeffs, tol=1e-10, maxit=None):
    """Assemble and solve; returns ``(full solution, SolveStats, DiscreteSystem)``."""
    system = assemble(problem, grid, coeffs)
    u, stats = cg_solve(system, tol, maxit)
    return system.expand(u), stats, system


def l2_error(problem, grid, solution, exact):
    """Discrete L2 error against an exact solution.

    Scalar problems use the node weights; vector problems compare Cartesian
    components at cell centers with the cell measures.
    """
    if problem in SCALAR_PROBLEMS:
        u = sample_scalar(exact, grid)
        return float(np.sqrt(np.sum(grid.weight * (solution - u) ** 2)))
    e1, e2 = exact
    xy = grid.center
    ug = np.column_stack([_sample(e1, xy), _sample(e2, xy)])
    diff = grid.to_global(solution) - ug
    return float(np.sqrt(np.sum(grid.area * np.sum(diff * diff, axis=1))))


def max_asymmetry(B):
    diff = (B - B.T).tocoo()
    return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
