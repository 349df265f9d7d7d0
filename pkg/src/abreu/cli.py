"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 input or
validation error, 3 solver non-convergence.  Every output file is written
atomically and depends only on the inputs and flags (never on the thread
count or the clock).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import fileio
from .conjugate import Conjugate, boundary_compare, hamiltonian, three_point_K, v_bound_check
from .errors import AbreuError, InputError
from .estimates import ALL_CHECKS, VerifyConfig, chi_invariant, verify
from .polytope import boundary_b, measures_and_A
from .sections import DEFAULT_RAYS, normalize_section, section_boundary, section_stats
from .solver import SolveConfig, functional_parts, solve
from .stability import affine_kernel_check, lambda_lower_bound

THREADS_ENV = "ABREU_THREADS"
log = logging.getLogger("abreu")


def default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be a positive integer", "threads") from None
        if n < 1:
            raise InputError(f"{THREADS_ENV} must be a positive integer", "threads")
        return n
    return os.cpu_count() or 1


def _point(text):
    try:
        x, y = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return np.array([x, y])


def _floats(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one number")
    return vals


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _constant_A(A, what):
    if callable(A):
        raise InputError(f"{what} needs a constant A", "constant_A")
    return float(A)


# -- commands -----------------------------------------------------------------


def cmd_check(args):
    poly = fileio.load_polygon(args.polygon)
    area, bvol, A = measures_and_A(poly)
    b = boundary_b(poly, A, origin=args.origin)
    kernel = affine_kernel_check(poly, A)
    out = {"area": area, "boundary_measure": bvol, "A": A, "b_vertex_values": list(b.vertex_values),
           "kernel_residuals": list(kernel.residuals), "polygon": poly.to_dict()}
    if args.out:
        fileio.write_json(args.out, out)
    print(f"valid polygon with {poly.n_edges} edges: A = {A:.12g}")
    return 0


def cmd_solve(args):
    poly = fileio.load_polygon(args.polygon)
    A = measures_and_A(poly)[2] if args.A is None else fileio.parse_A(args.A)
    try:
        config = SolveConfig(degree=args.degree, grid=args.grid, tol_residual=args.tol,
                             max_iter=args.max_iter, threads=args.threads)
    except ValueError as exc:
        raise InputError(str(exc), "solver_settings") from None
    result = solve(poly, A, config)
    parts = functional_parts(result.potential, A)
    meta = {"residual_rms": result.residual_rms, "residual_max": result.residual_max,
            "iterations": result.iterations, "converged": result.converged,
            "functional_F": parts.literal, "energy": parts.energy, "L": parts.L,
            "history": result.history,
            "config": {"degree": config.degree, "grid": config.grid, "tol": config.tol_residual,
                       "max_iter": config.max_iter}}
    fileio.save_solution(args.out, result.potential, A, meta)
    print(f"converged in {result.iterations} iterations: rms residual {result.residual_rms:.3e}, "
          f"F = {parts.literal:.10g}")
    return 0


def cmd_verify(args):
    pot, A, _ = fileio.load_solution(args.solution)
    checks = None if args.checks is None else [c.strip() for c in args.checks.split(",") if c.strip()]
    report = verify(pot, A, checks, VerifyConfig(threads=args.threads))
    fileio.write_json(args.report, report.to_dict())
    failed = [r.id for r in report.records if not r.passed]
    print(f"{len(report.records) - len(failed)}/{len(report.records)} checks passed"
          + (f"; failed: {', '.join(failed)}" if failed else ""))
    return 0 if not failed else 1


def cmd_chi(args):
    pots = [fileio.load_solution(p)[0] for p in args.solutions]
    polys = {repr(p.polygon) for p in pots}
    if len(polys) > 1:
        raise InputError("all solutions must share one polygon", "same_polygon")
    r = chi_invariant(pots, levels=args.levels)
    out = {"files": list(args.solutions)} | r
    if args.out:
        fileio.write_json(args.out, out)
    else:
        sys.stdout.write(fileio.dumps(out))
    flag = " (inconclusive)" if r["inconclusive"] else ""
    print(f"chi values {', '.join(f'{v:.8g}' for v in r['values'])}; spread {r['spread']:.3e}{flag}",
          file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_lambda(args):
    poly = fileio.load_polygon(args.polygon)
    A = measures_and_A(poly)[2] if args.A is None else _constant_A(fileio.parse_A(args.A), "lambda")
    report = lambda_lower_bound(poly, A, args.directions, args.offsets)
    out = report.to_dict()
    if args.out:
        fileio.write_json(args.out, out)
        print(f"lambda lower bound {report.lambda_lb:.12g}")
    else:
        sys.stdout.write(fileio.dumps(out))
    return 0


def cmd_conjugate(args):
    pot, A, _ = fileio.load_solution(args.solution)
    A = _constant_A(A, "the conjugate function")
    origin = args.origin
    field = hamiltonian(pot, A, grid=args.grid, origin=origin)
    conj = Conjugate(pot, A, origin)
    b = boundary_b(pot.polygon, A, origin=conj.origin)
    K = three_point_K(pot.polygon, b)
    vb = v_bound_check(pot, A, K, field.points, conj.origin)
    cmp = boundary_compare(conj, b)
    rows = np.column_stack([field.points, field.H, field.w])
    fileio.atomic_write_text(args.out, fileio.table_csv(("x", "y", "H", "w1", "w2"), rows))
    diag = {"K": K, "sup_grad_H": field.sup_grad_H, "sup_w": vb.sup_w, "sup_v": vb.sup_v,
            "QH_residual": field.QH_residual, "boundary_deviation": cmp.deviation,
            "boundary_flagged": cmp.flagged, "loop_closure": field.loop_closure,
            "b_vertex_values": list(b.vertex_values), "origin": conj.origin.tolist(),
            "v_bound_passed": vb.passed}
    diag_path = args.diagnostics or f"{args.out}.json"
    fileio.write_json(diag_path, diag)
    print(f"H on {len(rows)} points: K = {K:.12g}, sup|grad H| = {field.sup_grad_H:.12g}, "
          f"boundary deviation {cmp.deviation:.3e}")
    return 0


def cmd_sections(args):
    pot, _, _ = fileio.load_solution(args.solution)
    x = args.point
    if pot.polygon.distance(x) <= 0:
        raise InputError("section centre must be an interior point", "interior_point")
    stats = section_stats(pot, x, args.levels, args.rays)
    maps, polylines = [], []
    for t in stats.levels:
        sec = section_boundary(pot, x, t, args.rays)
        maps.append({"t": t, "volume": sec.volume, "shoelace_area": sec.shoelace_area,
                     "convex": sec.is_convex()} | normalize_section(sec).to_dict())
        polylines.extend([t, k, *p] for k, p in enumerate(sec.boundary))
    fileio.write_json(args.out, {"point": x.tolist(), "stats": stats.to_dict(), "sections": maps})
    if args.csv:
        fileio.atomic_write_text(args.csv, fileio.table_csv(("t", "ray", "x", "y"), polylines))
    print(f"{len(stats.levels)} sections (skipped {len(stats.skipped)}): "
          f"c1 = {stats.c1:.6g}, c2 = {stats.c2:.6g}")
    return 0


def cmd_grid(args):
    pot, _, _ = fileio.load_solution(args.solution)
    rows = fileio.write_grid(args.out, pot, args.n)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help=f"worker cap (default: ${THREADS_ENV} or the number of cores)")
    p = argparse.ArgumentParser(prog="abreu", description="Abreu's equation on convex polygons.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    s = add("check", "validate a polygon file and print A")
    s.add_argument("polygon")
    s.add_argument("--origin", type=_point, default=None, help="origin for the boundary function b")
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)

    s = add("solve", "solve S(u) = A")
    s.add_argument("polygon")
    s.add_argument("--A", default=None, help="constant or expression in x, y (default: the consistent value)")
    s.add_argument("--degree", type=int, default=SolveConfig.degree)
    s.add_argument("--grid", type=_positive_int, default=SolveConfig.grid)
    s.add_argument("--tol", type=float, default=SolveConfig.tol_residual)
    s.add_argument("--max-iter", type=_positive_int, default=SolveConfig.max_iter)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    s = add("verify", "run the estimate checks on a solution")
    s.add_argument("solution")
    s.add_argument("--checks", default=None, help=f"comma-separated subset of {', '.join(ALL_CHECKS)}")
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_verify)

    s = add("chi", "integral of |F|^2 - S^2 for one or more solutions")
    s.add_argument("solutions", nargs="+")
    s.add_argument("--levels", type=_positive_int, default=12)
    s.add_argument("--out")
    s.set_defaults(func=cmd_chi)

    s = add("lambda", "lower bound for the stability constant")
    s.add_argument("polygon")
    s.add_argument("--A", default=None)
    s.add_argument("--directions", type=_positive_int, default=180)
    s.add_argument("--offsets", type=_positive_int, default=100)
    s.add_argument("--out")
    s.set_defaults(func=cmd_lambda)

    s = add("conjugate", "the conjugate function H on a grid")
    s.add_argument("solution")
    s.add_argument("--grid", type=_positive_int, default=21)
    s.add_argument("--origin", type=_point, default=None)
    s.add_argument("--out", required=True, help="CSV of x, y, H, w1, w2")
    s.add_argument("--diagnostics", default=None, help="JSON diagnostics (default: OUT.json)")
    s.set_defaults(func=cmd_conjugate)

    s = add("sections", "section geometry at a point")
    s.add_argument("solution")
    s.add_argument("--point", type=_point, required=True)
    s.add_argument("--levels", type=_floats, required=True)
    s.add_argument("--rays", type=_positive_int, default=DEFAULT_RAYS)
    s.add_argument("--out", required=True)
    s.add_argument("--csv", default=None, help="boundary polylines")
    s.set_defaults(func=cmd_sections)

    s = add("grid", "field values on an interior grid (CSV)")
    s.add_argument("solution")
    s.add_argument("-n", "--n", type=int, required=True, help="grid points per axis")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_grid)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which is our input-error code
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads is None:
            args.threads = default_threads()
        return args.func(args)
    except AbreuError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
