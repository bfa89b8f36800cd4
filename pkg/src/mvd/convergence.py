"""Refinement studies against manufactured solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .generate import generate
from .grid import grid_from_points
from .problems import l2_error, solve


class NonConvergenceError(RuntimeError):
    def __init__(self, message, stats):
        super().__init__(message)
        self.stats = stats


@dataclass
class Level:
    n: int
    h: float
    n_nodes: int
    n_cells: int
    dofs: int
    iterations: int
    residual: float
    error: float


@dataclass
class ConvergenceTable:
    problem: str
    levels: list = field(default_factory=list)

    @property
    def errors(self):
        return [lv.error for lv in self.levels]

    @property
    def orders(self):
        """``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` between consecutive levels."""
        out = []
        for a, b in zip(self.levels, self.levels[1:]):
            if a.error > 0.0 and b.error > 0.0:
                out.append(math.log(a.error / b.error) / math.log(a.h / b.h))
            else:
                out.append(float("nan"))
        return out

    def decreasing(self):
        e = self.errors
        return all(x > y for x, y in zip(e, e[1:]))

    def lines(self):
        rows = [f"{'n':>5} {'h':>12} {'dofs':>8} {'iters':>6} {'L2 error':>12} {'order':>7}"]
        orders = [None] + self.orders
        for lv, p in zip(self.levels, orders):
            o = "" if p is None else f"{p:7.3f}"
            rows.append(f"{lv.n:>5} {lv.h:12.5e} {lv.dofs:>8} {lv.iterations:>6} {lv.error:12.5e} {o:>7}")
        return rows

    def to_dict(self):
        return {
            "problem": self.problem,
            "levels": [vars(lv).copy() for lv in self.levels],
            "orders": self.orders,
        }


def run_convergence(problem, coeffs, exact, levels, domain="square", scheme="lattice",
                    alpha=0.2, seed=0, tol=1e-10, maxit=None):
    """Solve ``problem`` on each level and tabulate L2 errors.

    Raises
    ------
    ValueError
        Fewer than two levels, or levels that do not refine.
    NonConvergenceError
        The solver failed on some level.
    """
    levels = [int(n) for n in levels]
    if len(levels) < 2:
        raise ValueError("a convergence study needs at least two levels")
    table = ConvergenceTable(problem)
    for n in levels:
        poly, pts = generate(domain, scheme, n, alpha, seed)
        grid = grid_from_points(pts, poly)
        u, stats, system = solve(problem, grid, coeffs, tol, maxit)
        if not stats.converged:
            raise NonConvergenceError(
                f"solver did not converge on level n={n}: {stats.iterations} iterations, "
                f"residual {stats.residual:.3e}", stats)
        err = l2_error(problem, grid, u, exact)
        if table.levels and grid.h >= table.levels[-1].h:
            raise ValueError(f"levels must refine: h = {grid.h:.6g} at n={n} does not decrease")
        table.levels.append(Level(n, grid.h, grid.n_nodes, grid.n_cells, len(system.dofs),
                                  stats.iterations, stats.residual, err))
    return table
