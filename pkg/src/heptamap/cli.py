"""Command line: heptamap {solve, map, streamlines, capacity, verify}.

Exit codes: 0 ok, 1 input error, 2 non-convergence, 3 domain error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as hio
from . import theta
from .capacity import condenser_capacity
from .exceptions import ConvergenceError, DomainError, HeptamapError, InputError
from .mapping import MapContext
from .params import AuxParams
from .solver import SolverOptions, solve, solve_slit

log = logging.getLogger("heptamap")

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_DOMAIN = 0, 1, 2, 3


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    return EXIT_INPUT


def _tolerance(text: str) -> float:
    try:
        tol = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from None
    if not (1e-16 < tol < 1e-2):
        raise argparse.ArgumentTypeError("tolerances must lie in (1e-16, 1e-2)")
    return tol


def _emit(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _solve_params(spec, init, tol_solver):
    opts = SolverOptions() if tol_solver is None else SolverOptions(tol=tol_solver)
    return solve_slit(spec, init, opts) if spec.has_slits else solve(spec, init, opts)


# ---------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    spec = hio.read_polygon(args.polygon)
    init = None
    if args.resume:
        init, _, _ = hio.read_params(args.resume)
    out = args.out or "-"
    try:
        params = _solve_params(spec, init, args.tol_solver)
    except ConvergenceError as exc:
        # keep the best iterate so the run can be resumed or inspected
        if isinstance(exc.best, AuxParams):
            res = np.nan if exc.residual is None else float(exc.residual)
            _emit(hio.write_params(None, exc.best.with_status(converged=False, residual_norm=res), spec), out)
        raise
    text = hio.write_params(None, params, spec)
    _emit(text, out)
    log.info("solved in %d iterations, residual %.3g", params.iterations, params.residual_norm)
    return EXIT_OK


def _context_from_params(path):
    params, spec, checksum = hio.read_params(path)
    if spec is None:
        raise InputError(f"{path}: parameter file does not name its polygon")
    return MapContext(spec, params), checksum


def cmd_map(args) -> int:
    ctx, checksum = _context_from_params(args.params)
    direction = "forward" if args.forward else "inverse"
    fn = ctx.forward if args.forward else ctx.inverse
    if args.point is not None:
        z = complex(fn(hio.parse_complex(args.point)))
        if args.out is None or args.out == "-":
            print(hio.format_complex(z))
        else:
            _emit(hio.batch_csv([z], ["ok"], direction, checksum), args.out)
        return EXIT_OK
    pts = hio.read_points_csv(args.grid)
    out, status = [], []
    for p in pts:
        try:
            out.append(complex(fn(p)))
            status.append("ok")
        except DomainError as exc:
            out.append(None)
            status.append("domain: " + str(exc).replace(",", ";"))
        except ConvergenceError as exc:
            out.append(None)
            status.append("no-convergence: " + str(exc).replace(",", ";"))
    _emit(hio.batch_csv(out, status, direction, checksum), args.out)
    return EXIT_OK


def _levels(text: str):
    try:
        levels = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"levels must be comma-separated numbers, got '{text}'") from None
    if not levels:
        raise InputError("at least one streamline level is required")
    return levels


def cmd_streamlines(args) -> int:
    from .streamlines import streamlines

    levels = _levels(args.levels)
    spec = hio.read_polygon(args.polygon)
    init = hio.read_params(args.resume)[0] if args.resume else None
    params = _solve_params(spec, init, args.tol_solver)
    ctx = MapContext(spec, params)
    lines = streamlines(ctx, levels, x_range=args.x_range, samples=args.samples)
    checksum = spec.checksum()
    prefix = args.out or "streamlines"
    Path(prefix + ".csv").write_text(hio.streamlines_csv(lines, checksum))
    Path(prefix + ".svg").write_text(hio.streamlines_svg(spec, lines, checksum))
    print(f"wrote {prefix}.csv and {prefix}.svg ({len(lines)} levels, "
          f"{sum(len(sl.w) for sl in lines)} points)")
    return EXIT_OK


def cmd_capacity(args) -> int:
    cond = hio.read_condenser(args.condenser)
    cap, slots, meta = condenser_capacity(cond, method=args.method, details=True)
    doc = hio.capacity_document(cond, cap, slots, meta)
    if args.out:
        hio._write_json(args.out, doc)
    print(f"# heptamap {__version__} condenser={doc['condenser_checksum']}")
    print(f"capacity: {cap:.6f}")
    for i, (a, b) in enumerate(slots.intervals, start=1):
        print(f"slot {i}: [{a:.10f}, {b:.10f}]")
    print(f"scale: {slots.scale:.10g}")
    print(f"route: {doc['route']}  collocation nodes per slot: {doc['nodes_per_slot']}  "
          f"relative change on doubling: {doc['relative_change']:.2e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all(args.level, args.seed)
    summary = {
        "tool_version": __version__,
        "level": args.level,
        "seed": args.seed,
        "theta_tolerance": theta.default_tolerance(),
        "passed": all(r.passed for r in results),
        "suites": [r.to_dict() if args.level == "full" else
                   {k: v for k, v in r.to_dict().items() if k != "checks"} for r in results],
    }
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        extra = f" ({r.error})" if r.error else ""
        print(f"{mark} {r.name}: max residual {r.max_residual:.2e} (tol {r.tolerance:.0e}), "
              f"{r.cases} cases, {r.seconds:.1f}s{extra}", file=sys.stderr)
    text = json.dumps(summary, indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK if summary["passed"] else EXIT_CONVERGENCE


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-theta", type=_tolerance, default=None,
                        help="truncation tolerance of the theta series (default 1e-14)")
    common.add_argument("--tol-solver", type=_tolerance, default=None,
                        help="residual tolerance of the parameter solver (default 1e-11)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", default=None, help="output path ('-' for stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="heptamap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"heptamap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="solve the auxiliary parameters of a polygon")
    p.add_argument("polygon", help="polygon JSON file")
    p.add_argument("--resume", help="parameter JSON used as the Newton start")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("map", parents=[common], help="map points between half-plane and polygon")
    p.add_argument("params", help="solved parameter JSON file")
    d = p.add_mutually_exclusive_group(required=True)
    d.add_argument("--forward", action="store_true", help="polygon point w -> half-plane point x")
    d.add_argument("--inverse", action="store_true", help="half-plane point x -> polygon point w")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--point", help="single point as 're,im'")
    src.add_argument("--grid", help="CSV file of 're,im' rows")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("streamlines", parents=[common], help="trace streamlines over a landscape")
    p.add_argument("polygon", help="polygon JSON file")
    p.add_argument("--levels", required=True, help="comma-separated levels Im x = t >= 0")
    p.add_argument("--resume", help="parameter JSON used as the Newton start")
    p.add_argument("--x-range", type=float, default=10.0, help="half-width of the traced x interval")
    p.add_argument("--samples", type=int, default=64, help="base samples per streamline")
    p.set_defaults(func=cmd_streamlines)

    p = sub.add_parser("capacity", parents=[common], help="logarithmic capacity of a condenser")
    p.add_argument("condenser", help="condenser JSON file")
    p.add_argument("--method", choices=("auto", "theta", "quadrature"), default="auto")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.set_defaults(func=cmd_verify)
    return parser


def _attach_point_values(argv):
    # "--point -0.5,1" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for a in it:
        if a == "--point":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--point={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_point_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; the contract reserves 2 for non-convergence
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="heptamap: %(message)s")
    if args.tol_theta is not None:
        theta.set_default_tolerance(args.tol_theta)
    try:
        return args.func(args)
    except (HeptamapError, ValueError) as exc:
        print(f"heptamap: error: {exc}", file=sys.stderr)
        return exit_code(exc)
    finally:
        if args.tol_theta is not None:
            theta.set_default_tolerance(theta.DEFAULT_TOL)


if __name__ == "__main__":
    sys.exit(main())
