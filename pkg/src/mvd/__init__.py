"""Mimetic finite differences on merged Voronoi-Delaunay grids."""
from .generate import generate
from .geometry import ConvexPolygon, GeometryError
from .grid import MvdGrid, admissibility_report, build_mvd, grid_from_points
from .operators import div_h, grad_h, rot2d_scalar_h, rot2d_vector_h
from .problems import CoefficientSet, assemble, cg_solve, solve, spd_probe
from .tessellation import InadmissibleGridError, delaunay, voronoi

__all__ = [
    "ConvexPolygon",
    "GeometryError",
    "InadmissibleGridError",
    "MvdGrid",
    "CoefficientSet",
    "admissibility_report",
    "assemble",
    "build_mvd",
    "cg_solve",
    "delaunay",
    "div_h",
    "generate",
    "grad_h",
    "grid_from_points",
    "rot2d_scalar_h",
    "rot2d_vector_h",
    "solve",
    "spd_probe",
    "voronoi",
]
__version__ = "0.1.0"
