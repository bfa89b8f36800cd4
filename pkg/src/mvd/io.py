"""Mesh and solution files: JSON (bit-faithful) and legacy ASCII VTK."""
from __future__ import annotations

import json
import math

import numpy as np

from .geometry import ConvexPolygon, GeometryError
from .grid import D_NODE, ROLE_NAMES, MvdGrid

MESH_FORMAT = "mvd-mesh"
SOLUTION_FORMAT = "mvd-solution"
VERSION = 1
VTK_TRIANGLE = 5
VTK_QUAD = 9

_ROLE_IDS = {name: role for role, name in ROLE_NAMES.items()}


class MeshFileError(OSError):
    pass


def format_float(x):
    """17 significant digits: enough to reproduce every double exactly."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return "%.17g" % x


def _emit(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if any(isinstance(v, (dict, list, tuple)) for v in obj):
            inner = [pad + "  " + _emit(v, indent + 1) for v in obj]
            return "[\n" + ",\n".join(inner) + "\n" + pad + "]"
        return "[" + ", ".join(_emit(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float written to 17 significant digits."""
    return _emit(obj) + "\n"


def mesh_dict(grid):
    return {
        "format": MESH_FORMAT,
        "version": VERSION,
        "domain": grid.domain.vertices.tolist(),
        "nodes": {
            "points": grid.points.tolist(),
            "role": [ROLE_NAMES[int(r)] for r in grid.role],
            "boundary": grid.boundary.tolist(),
            "measure": grid.measure.tolist(),
        },
        "cells": {
            "nodes": grid.cells.tolist(),
            "center": grid.center.tolist(),
            "boundary": grid.cell_boundary.tolist(),
        },
    }


def grid_from_dict(data):
    try:
        if data.get("format") not in (MESH_FORMAT, SOLUTION_FORMAT):
            raise MeshFileError(f"not a mesh file (format {data.get('format')!r})")
        if data.get("format") == SOLUTION_FORMAT:
            data = data["mesh"]
        nodes, cells = data["nodes"], data["cells"]
        points = np.array(nodes["points"], dtype=float).reshape(-1, 2)
        role = np.array([_ROLE_IDS[r] for r in nodes["role"]], dtype=np.int64)
        boundary = np.array(nodes["boundary"], dtype=bool)
        measure = np.array(nodes["measure"], dtype=float)
        cell_nodes = np.array(cells["nodes"], dtype=np.int64).reshape(-1, 4)
        center = np.array(cells["center"], dtype=float).reshape(-1, 2)
        cell_boundary = np.array(cells["boundary"], dtype=bool)
        domain = ConvexPolygon(data["domain"])
    except MeshFileError:
        raise
    except (KeyError, TypeError, ValueError, GeometryError) as exc:
        raise MeshFileError(f"corrupt mesh data: {exc}") from None
    n = len(points)
    if not (len(role) == len(boundary) == len(measure) == n):
        raise MeshFileError("corrupt mesh data: node arrays differ in length")
    if not (len(center) == len(cell_boundary) == len(cell_nodes)):
        raise MeshFileError("corrupt mesh data: cell arrays differ in length")
    if len(cell_nodes) and (cell_nodes.min() < 0 or cell_nodes.max() >= n):
        raise MeshFileError("corrupt mesh data: cell refers to a missing node")
    if len(cell_nodes) and (np.any(role[cell_nodes[:, :2]] != D_NODE) or np.any(role[cell_nodes[:, 2:]] == D_NODE)):
        raise MeshFileError("corrupt mesh data: cell diagonal endpoints have wrong roles")
    return MvdGrid(domain, points, role, boundary, measure, cell_nodes, center, cell_boundary)


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise MeshFileError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MeshFileError(f"{path}: malformed JSON ({exc})") from None


def _write_text(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise MeshFileError(f"cannot write {path}: {exc.strerror or exc}") from None


def write_json(path, data):
    _write_text(path, dumps(data))


def write_mesh(path, grid):
    _write_text(path, dumps(mesh_dict(grid)))


def read_mesh(path):
    data = _read_json(path)
    if not isinstance(data, dict):
        raise MeshFileError(f"{path}: not a mesh file")
    return grid_from_dict(data)


def solution_dict(grid, point_data=None, cell_data=None, meta=None):
    """Mesh plus named fields.

    ``point_data`` maps names to node arrays; ``cell_data`` maps names to
    local-frame cell vectors, stored in Cartesian components.
    """
    out = {"format": SOLUTION_FORMAT, "version": VERSION}
    if meta:
        out["meta"] = dict(meta)
    out["mesh"] = mesh_dict(grid)
    out["point_data"] = {k: np.asarray(v, dtype=float).tolist() for k, v in (point_data or {}).items()}
    out["cell_data"] = {k: grid.to_global(v).tolist() for k, v in (cell_data or {}).items()}
    return out


def write_solution_json(path, grid, point_data=None, cell_data=None, meta=None):
    _write_text(path, dumps(solution_dict(grid, point_data, cell_data, meta)))


def read_solution_json(path):
    """Returns ``(grid, point_data, cell_data_global, meta)``."""
    data = _read_json(path)
    if not isinstance(data, dict) or data.get("format") != SOLUTION_FORMAT:
        raise MeshFileError(f"{path}: not a solution file")
    grid = grid_from_dict(data)
    pd = {k: np.array(v, dtype=float) for k, v in data.get("point_data", {}).items()}
    cd = {k: np.array(v, dtype=float).reshape(-1, 2) for k, v in data.get("cell_data", {}).items()}
    return grid, pd, cd, data.get("meta", {})


def vtk_text(grid, point_data=None, cell_data=None, title="mvd grid"):
    """Legacy VTK 2.0 ASCII unstructured grid.

    Interior cells are quads ``(d_tail, v_tail, d_head, v_head)``; boundary
    cells, whose V-head sits on the Delaunay edge, are triangles
    ``(d_tail, v_tail, d_head)``. Cell vectors are written in Cartesian
    components with a zero third component.
    """
    f = format_float
    lines = ["# vtk DataFile Version 2.0", title.replace("\n", " ")[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {grid.n_nodes} double")
    lines.extend(f"{f(x)} {f(y)} 0" for x, y in grid.points)
    conn, types = [], []
    for (dt, dh, vt, vh), b in zip(grid.cells, grid.cell_boundary):
        if b:
            conn.append(f"3 {dt} {vt} {dh}")
            types.append(VTK_TRIANGLE)
        else:
            conn.append(f"4 {dt} {vt} {dh} {vh}")
            types.append(VTK_QUAD)
    size = sum(len(c.split()) for c in conn)
    lines.append(f"CELLS {grid.n_cells} {size}")
    lines.extend(conn)
    lines.append(f"CELL_TYPES {grid.n_cells}")
    lines.extend(str(t) for t in types)
    if point_data:
        lines.append(f"POINT_DATA {grid.n_nodes}")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (grid.n_nodes,):
                raise ValueError(f"point field {name!r} must have one value per node")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f(v) for v in values)
    if cell_data:
        lines.append(f"CELL_DATA {grid.n_cells}")
        for name, values in cell_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (grid.n_cells, 2):
                raise ValueError(f"cell field {name!r} must have shape (n_cells, 2)")
            lines.append(f"VECTORS {name} double")
            lines.extend(f"{f(a)} {f(b)} 0" for a, b in grid.to_global(values))
    return "\n".join(lines) + "\n"


def write_vtk(path, grid, point_data=None, cell_data=None, title="mvd grid"):
    _write_text(path, vtk_text(grid, point_data, cell_data, title))
