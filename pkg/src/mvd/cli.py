"""``mvd`` command-line interface.

Exit codes: 0 ok, 2 I/O or usage error, 3 solver did not converge,
4 invalid coefficients, 5 inadmissible mesh.
"""
from __future__ import annotations

import argparse
import sys
from io import StringIO
from pathlib import Path

from . import io
from .convergence import NonConvergenceError, run_convergence
from .expr import Expr, ExprEvalError, ExprSyntaxError
from .generate import PointFileError, generate, read_polygon
from .geometry import GeometryError
from .grid import admissibility_report, grid_from_points, grid_invariants, sample_scalar
from .problems import PROBLEMS, VECTOR_PROBLEMS, CoefficientError, CoefficientSet, l2_error, solve

EXIT_OK = 0
EXIT_IO = 2
EXIT_NOCONV = 3
EXIT_COEFF = 4
EXIT_MESH = 5


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _domain(value):
    if value == "square":
        return "square"
    try:
        return read_polygon(value)
    except OSError as exc:
        raise CliError(f"cannot read domain file {value}: {exc.strerror or exc}", EXIT_IO) from None
    except (PointFileError, GeometryError) as exc:
        raise CliError(f"bad domain file {value}: {exc}", EXIT_IO) from None


def _expr(text, flag):
    try:
        return Expr(text)
    except ExprSyntaxError as exc:
        raise CliError(f"{flag}: {exc}", EXIT_COEFF) from None


def _build_grid(args):
    try:
        poly, pts = generate(_domain(args.domain), args.scheme, args.n, args.alpha, args.seed, args.points)
    except OSError as exc:
        raise CliError(f"cannot read point file: {exc.strerror or exc}", EXIT_IO) from None
    except PointFileError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    except GeometryError as exc:
        raise CliError(str(exc), EXIT_MESH) from None
    except ValueError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    try:
        return grid_from_points(pts, poly)
    except GeometryError as exc:
        raise CliError(str(exc), EXIT_MESH) from None


def _load_grid(args):
    if args.mesh:
        try:
            return io.read_mesh(args.mesh)
        except io.MeshFileError as exc:
            raise CliError(str(exc), EXIT_IO) from None
    return _build_grid(args)


def _run_checks(grid, out):
    report = admissibility_report(grid)
    for line in report.lines():
        print(line, file=out)
    ok = True
    for c in grid_invariants(grid):
        status = "ok" if c.ok else "FAIL"
        detail = f"  {c.detail}" if c.detail and not c.ok else ""
        print(f"[{status:>4}] {c.name}: {c.value:.17g} (tol {c.tol:g}){detail}", file=out)
        ok &= c.ok
    return ok


def _coefficients(args):
    k = _expr(args.k, "--k")
    c = _expr(args.c, "--c")
    if args.f is None:
        raise CliError("--f is required", EXIT_IO)
    if args.problem in VECTOR_PROBLEMS:
        if args.f2 is None:
            raise CliError(f"{args.problem} needs both --f and --f2", EXIT_IO)
        f = (_expr(args.f, "--f"), _expr(args.f2, "--f2"))
    else:
        f = _expr(args.f, "--f")
    return CoefficientSet(k, c, f)


def _exact(args):
    if args.exact is None:
        return None
    if args.problem in VECTOR_PROBLEMS:
        if args.exact2 is None:
            raise CliError(f"{args.problem} needs both --exact and --exact2", EXIT_IO)
        return (_expr(args.exact, "--exact"), _expr(args.exact2, "--exact2"))
    return _expr(args.exact, "--exact")


def _out_paths(out):
    base = Path(out)
    if base.suffix in (".vtk", ".json"):
        base = base.with_suffix("")
    return base.with_suffix(".vtk"), base.with_suffix(".json")


def cmd_generate(args):
    grid = _build_grid(args)
    print(repr(grid))
    if args.out:
        try:
            io.write_mesh(args.out, grid)
        except io.MeshFileError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_check(args):
    grid = _load_grid(args)
    print(repr(grid))
    ok = _run_checks(grid, sys.stdout)
    print("check passed" if ok else "check FAILED")
    return EXIT_OK if ok else EXIT_MESH


def cmd_solve(args):
    grid = _load_grid(args)
    coeffs = _coefficients(args)
    exact = _exact(args)
    buf = StringIO()
    if not _run_checks(grid, buf):
        sys.stdout.write(buf.getvalue())
        raise CliError("mesh failed its checks; not solving", EXIT_MESH)
    try:
        u, stats, system = solve(args.problem, grid, coeffs, args.tol, args.maxit)
    except CoefficientError as exc:
        raise CliError(str(exc), EXIT_COEFF) from None
    except ExprEvalError as exc:
        raise CliError(f"coefficient evaluation failed: {exc}", EXIT_COEFF) from None
    print(f"problem {args.problem}: {len(system.dofs)} unknowns")
    print(f"iterations {stats.iterations}  residual {stats.residual:.6e}  converged {stats.converged}")
    err = None
    if exact is not None:
        err = l2_error(args.problem, grid, u, exact)
        print(f"L2 error {err:.6e}")
    if args.out:
        vtk_path, json_path = _out_paths(args.out)
        if args.problem in VECTOR_PROBLEMS:
            pd, cd = {}, {"u": u}
        else:
            pd, cd = {"u": u}, {}
        meta = {"problem": args.problem, "k": args.k, "c": args.c, "f": args.f, "f2": args.f2,
                "tol": args.tol, "iterations": stats.iterations, "residual": stats.residual,
                "converged": stats.converged, "l2_error": err}
        try:
            io.write_vtk(vtk_path, grid, pd, cd, title=f"mvd {args.problem} solution")
            io.write_solution_json(json_path, grid, pd, cd, meta)
        except io.MeshFileError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        print(f"wrote {vtk_path} and {json_path}")
    return EXIT_OK if stats.converged else EXIT_NOCONV


def _levels(text):
    try:
        levels = [int(s) for s in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"--levels: expected integers, got {text!r}", EXIT_IO) from None
    if len(levels) < 2:
        raise CliError("--levels: a convergence study needs at least two levels", EXIT_IO)
    return levels


def cmd_converge(args):
    levels = _levels(args.levels)
    coeffs = _coefficients(args)
    exact = _exact(args)
    if exact is None:
        raise CliError("--exact is required for a convergence study", EXIT_IO)
    try:
        table = run_convergence(args.problem, coeffs, exact, levels, _domain(args.domain), args.scheme,
                                args.alpha, args.seed, args.tol, args.maxit)
    except NonConvergenceError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NOCONV
    except CoefficientError as exc:
        raise CliError(str(exc), EXIT_COEFF) from None
    except ExprEvalError as exc:
        raise CliError(f"coefficient evaluation failed: {exc}", EXIT_COEFF) from None
    except GeometryError as exc:
        raise CliError(str(exc), EXIT_MESH) from None
    except ValueError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    for line in table.lines():
        print(line)
    if args.out:
        data = table.to_dict()
        data["settings"] = {"scheme": args.scheme, "alpha": args.alpha, "seed": args.seed, "domain": args.domain,
                            "k": args.k, "c": args.c, "f": args.f, "f2": args.f2,
                            "exact": args.exact, "exact2": args.exact2, "tol": args.tol}
        try:
            io.write_json(args.out, data)
        except io.MeshFileError as exc:
            raise CliError(str(exc), EXIT_IO) from None
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_export(args):
    grid = _load_grid(args)
    pd = {}
    if args.f is not None:
        f = _expr(args.f, "--f")
        try:
            pd["f"] = sample_scalar(f, grid)
        except (ExprEvalError, ValueError) as exc:
            raise CliError(f"--f: {exc}", EXIT_COEFF) from None
    if not args.out:
        raise CliError("--out is required", EXIT_IO)
    try:
        if args.format == "vtk":
            io.write_vtk(args.out, grid, pd)
        elif pd:
            io.write_solution_json(args.out, grid, pd)
        else:
            io.write_mesh(args.out, grid)
    except io.MeshFileError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="mvd", description="Merged Voronoi-Delaunay grid solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def grid_flags(p):
        p.add_argument("--domain", default="square", help="'square' or a polygon vertex file")
        p.add_argument("--scheme", default="lattice", choices=("lattice", "jitter", "file"))
        p.add_argument("--n", type=int, default=8, help="subdivisions per side")
        p.add_argument("--alpha", type=float, default=0.2, help="jitter amplitude in units of h")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--points", help="point file for --scheme file")

    def problem_flags(p):
        p.add_argument("--problem", required=True, choices=PROBLEMS)
        p.add_argument("--k", default="1")
        p.add_argument("--c", default="1")
        p.add_argument("--f")
        p.add_argument("--f2", help="second component of a vector right-hand side")
        p.add_argument("--exact")
        p.add_argument("--exact2")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--maxit", type=int)

    p = sub.add_parser("generate", help="build a grid and write it as a mesh file")
    grid_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("check", help="admissibility report and invariant checks")
    grid_flags(p)
    p.add_argument("--mesh")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve one boundary value problem")
    grid_flags(p)
    p.add_argument("--mesh")
    problem_flags(p)
    p.add_argument("--out", help="base name for the .vtk and .json solution files")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="refinement study against an exact solution")
    grid_flags(p)
    problem_flags(p)
    p.add_argument("--levels", required=True, help="comma separated n values, e.g. 8,16,32")
    p.add_argument("--out", help="JSON table")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("export", help="write a grid as VTK or JSON")
    grid_flags(p)
    p.add_argument("--mesh")
    p.add_argument("--f", help="optional scalar field sampled at the nodes")
    p.add_argument("--format", choices=("vtk", "json"), default="vtk")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mvd {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
