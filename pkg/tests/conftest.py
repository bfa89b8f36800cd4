import functools

import numpy as np
import pytest

from mvd.generate import generate
from mvd.geometry import ConvexPolygon
from mvd.grid import grid_from_points


@functools.lru_cache(maxsize=None)
def lattice_grid(n):
    poly, pts = generate("square", "lattice", n)
    return grid_from_points(pts, poly)


@functools.lru_cache(maxsize=None)
def jitter_grid(n, seed, alpha=0.2):
    poly, pts = generate("square", "jitter", n, alpha, seed)
    return grid_from_points(pts, poly)


def hexagon(radius=1.0):
    ang = np.arange(6) * np.pi / 3
    return ConvexPolygon(np.column_stack([radius * np.cos(ang), radius * np.sin(ang)]))


@functools.lru_cache(maxsize=None)
def hexagon_star_grid():
    """Regular hexagon plus its center: six equilateral triangles."""
    poly = hexagon()
    pts = np.vstack([poly.vertices, [[0.0, 0.0]]])
    return grid_from_points(pts, poly)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# manufactured solutions, in the coefficient language; k = c = 1
MANUFACTURED = {
    "diffusion": {
        "exact": ("sin(pi*x1)*sin(pi*x2)",),
        "f": ("(2*pi^2+1)*sin(pi*x1)*sin(pi*x2)",),
    },
    "rotrot-scalar": {
        "exact": ("sin(pi*x1)*sin(pi*x2)",),
        "f": ("(2*pi^2+1)*sin(pi*x1)*sin(pi*x2)",),
    },
    "graddiv": {
        "exact": ("sin(pi*x1)*cos(pi*x2)", "cos(pi*x1)*sin(pi*x2)"),
        "f": ("(2*pi^2+1)*sin(pi*x1)*cos(pi*x2)", "(2*pi^2+1)*cos(pi*x1)*sin(pi*x2)"),
    },
    "rotrot-vector": {
        "exact": ("sin(pi*x2)*sin(pi*x1)^2", "0"),
        "f": ("(pi^2+1)*sin(pi*x2)*sin(pi*x1)^2", "pi^2*cos(pi*x2)*sin(2*pi*x1)"),
    },
}


def manufactured(problem, k="1", c="1"):
    """``(CoefficientSet, exact)`` for a manufactured case."""
    from mvd.expr import Expr
    from mvd.problems import CoefficientSet

    case = MANUFACTURED[problem]
    f = tuple(Expr(t) for t in case["f"])
    exact = tuple(Expr(t) for t in case["exact"])
    if len(f) == 1:
        return CoefficientSet(Expr(k), Expr(c), f[0]), exact[0]
    return CoefficientSet(Expr(k), Expr(c), f), exact


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
