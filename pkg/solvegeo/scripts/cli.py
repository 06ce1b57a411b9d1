#!/usr/bin/env python3
"""
Command-line entry point for solvegeo.

Every subcommand writes data (CSV, JSON or OBJ) to --out or stdout.
Exit status: 0 success, 1 failed check or integrator failure, 2 usage or domain error.
"""

import argparse
import logging
import math
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from solvegeo.config.settings import Config
from solvegeo.core import cutlocus
from solvegeo.core.errors import DomainError, IntegratorError
from solvegeo.core.flow import (
    IntegratorConfig,
    cylinder_profile,
    cylinder_shift,
    flow_sphere,
    geodesic,
)
from solvegeo.core.algebra import level_value
from solvegeo.core.period import (
    beta_from_x0,
    derivative_bound_gap,
    dperiod_dx0,
    flat_direction,
    period,
    period_quadrature,
    x0_from_beta,
)
from solvegeo.core.sphere import DirectionGrid, export_mesh, geodesic_sphere
from solvegeo.core.verifier import PERIOD_TABLE, TABLE_BETA, SuiteConfig, VerificationSuite
from solvegeo.utils.precision import ratio_bound
from solvegeo.utils.reporting import emit, json_text, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def x0_range(text: str) -> Tuple[float, float, int]:
    """Parse lo:hi:n"""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    if not lo < hi or n < 1:
        raise argparse.ArgumentTypeError(f"need lo < hi and n >= 1, got {text!r}")
    return lo, hi, n


def resolution(text: str) -> Tuple[int, int]:
    try:
        n_theta, n_phi = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M, got {text!r}")
    return n_theta, n_phi


def vector(text: str) -> np.ndarray:
    try:
        values = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected u1,u2,u3, got {text!r}")
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected three components, got {text!r}")
    return np.array(values)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="Integrator tolerance (rtol = atol)")
    common.add_argument("--out", type=str, default=None, help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json", "obj"), default=None, help="Output format")

    parser = argparse.ArgumentParser(prog="solvegeo", description="Geodesics of the solvable groups G_alpha")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cylinder", parents=[common], help="Cylinder cross-section and a geodesic on it")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--length", type=float, default=30.0)
    p.add_argument("--n", type=int, default=400)

    p = sub.add_parser("flow", parents=[common], help="Structure-field flowline on the unit sphere")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--u", type=vector, required=True, help="Initial direction u1,u2,u3")
    p.add_argument("--time", type=float, default=20.0)
    p.add_argument("--n", type=int, default=400)

    p = sub.add_parser("flowline", parents=[common], help="Endpoint curve (a(t), b(t)) of a symmetric flowline")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--n", type=int, default=200)

    p = sub.add_parser("period", parents=[common], help="Period of loop level sets")
    p.add_argument("--alpha", type=float, required=True)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--beta", type=float)
    which.add_argument("--x0", type=float)
    which.add_argument("--x0-range", type=x0_range)

    sub.add_parser("table", parents=[common], help="Periods at beta = 0.999 against pi sqrt(2/alpha)")

    p = sub.add_parser("cutlocus", parents=[common], help="Endpoints of perfect symmetric geodesics")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0-range", type=x0_range, default=None)

    p = sub.add_parser("bprime", parents=[common], help="b'(t) along a symmetric flowline")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--span", type=float, default=1.0, help="Multiple of the half period to cover")
    p.add_argument("--n", type=int, default=1000)

    p = sub.add_parser("sphere", parents=[common], help="Geodesic sphere as a Wavefront OBJ mesh")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--radius", type=float, default=Config.SPHERE_RADIUS)
    p.add_argument("--res", type=resolution, default=Config.SPHERE_RESOLUTION)

    p = sub.add_parser("verify", parents=[common], help="Run the verification suite")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--config", type=str, default=None, help="Suite configuration file")

    p = sub.add_parser("g-function", parents=[common], help="Derivative bound and ratio bound for alpha = 1/2")
    p.add_argument("--x0-range", type=x0_range, default=None)
    return parser


def _grid(spec: Optional[Tuple[float, float, int]], default: np.ndarray) -> np.ndarray:
    if spec is None:
        return default
    lo, hi, n = spec
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_cylinder(args, cfg: IntegratorConfig) -> int:
    shift = cylinder_shift(args.beta, args.alpha)
    z, w_minus, w_plus = cylinder_profile(args.beta, args.alpha, args.n, shift)
    rows = [{"kind": "profile", "z": zz, "w": w} for zz, lo, hi in zip(z, w_minus, w_plus) for w in (lo, hi)]
    trajectory = geodesic(args.length * flat_direction(args.beta, args.alpha), args.alpha, cfg)
    _, path = trajectory.sample(args.n)
    root = math.sqrt(args.alpha)
    rows += [{"kind": "geodesic", "z": p[2], "w": p[0] - root * p[1]} for p in path.T]
    write_table(rows, args.out, args.format or "csv", "cylinder", columns=("kind", "z", "w"))
    return EXIT_OK


def cmd_flow(args, cfg: IntegratorConfig) -> int:
    times, states = flow_sphere(args.u, args.time, args.alpha, cfg).sample(args.n)
    rows = [{"t": t, "u1": s[0], "u2": s[1], "u3": s[2],
             "level": level_value(s, args.alpha) if args.alpha > 0 else float("nan")}
            for t, s in zip(times, states.T)]
    write_table(rows, args.out, args.format or "csv", "flow")
    return EXIT_OK


def cmd_flowline(args, cfg: IntegratorConfig) -> int:
    samples = cutlocus.lambda_curve(args.x0, args.alpha, args.n, cfg)
    logger.info(f"Box margin {cutlocus.box_margin(samples):.3e}, "
                f"triangle excess {cutlocus.triangle_excess(samples):.3e}")
    write_table([vars(s) for s in samples], args.out, args.format or "csv", "flowline")
    return EXIT_OK


def cmd_period(args, cfg: IntegratorConfig) -> int:
    if args.beta is not None:
        pairs = [(args.beta, x0_from_beta(args.beta, args.alpha))]
    else:
        x0s = [args.x0] if args.x0 is not None else _grid(args.x0_range, None)
        pairs = [(beta_from_x0(float(x0), args.alpha), float(x0)) for x0 in x0s]
    rows = [{"alpha": args.alpha, "beta": b, "x0": x0, "period": period(b, args.alpha)} for b, x0 in pairs]
    write_table(rows, args.out, args.format or "csv", "period")
    return EXIT_OK


def cmd_table(args, cfg: IntegratorConfig) -> int:
    rows = [{"alpha": a, "period": period_quadrature(TABLE_BETA, a), "limit": math.pi * math.sqrt(2.0 / a)}
            for a, _ in PERIOD_TABLE]
    write_table(rows, args.out, args.format or "csv", "table")
    return EXIT_OK


def cmd_cutlocus(args, cfg: IntegratorConfig) -> int:
    grid = _grid(args.x0_range, cutlocus.canonical_x0_grid(args.alpha, 200))
    points = cutlocus.boundary_curve(args.alpha, grid, cfg)
    write_table([vars(p) for p in points], args.out, args.format or "csv", "cutlocus")
    return EXIT_OK


def cmd_bprime(args, cfg: IntegratorConfig) -> int:
    times, values, rho = cutlocus.bprime_trace(args.x0, args.alpha, args.span, args.n, cfg)
    logger.info(f"Half period {rho:.12g}; min b' = {float(np.min(values)):.6g}")
    write_table([{"t": t, "bprime": v} for t, v in zip(times, values)], args.out, args.format or "csv", "bprime")
    return EXIT_OK


def cmd_sphere(args, cfg: IntegratorConfig) -> int:
    if args.format not in (None, "obj"):
        raise DomainError("sphere only writes OBJ")
    mesh = geodesic_sphere(args.alpha, args.radius, DirectionGrid.build(*args.res), cfg)
    data = export_mesh(mesh)
    if args.out in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        with open(args.out, "wb") as f:
            f.write(data)
        logger.info(f"Wrote {args.out}")
    return EXIT_OK if mesh.complete else EXIT_FAILED


def cmd_verify(args, cfg: IntegratorConfig) -> int:
    suite = VerificationSuite(SuiteConfig(args.config), args.alpha, cfg)
    suite.run()
    emit(json_text(suite.to_dict(), "verify"), args.out)
    return EXIT_OK if suite.passed else EXIT_FAILED


def cmd_g_function(args, cfg: IntegratorConfig) -> int:
    grid = _grid(args.x0_range, cutlocus.half_grid(1000))
    rows = [{"x0": float(x0), "G": derivative_bound_gap(float(x0)), "dP_dx0": dperiod_dx0(float(x0)),
             "ratio": ratio_bound(float(x0))} for x0 in grid]
    write_table(rows, args.out, args.format or "csv", "g-function")
    return EXIT_OK if all(r["G"] < 0.0 and r["ratio"] < 1.0 for r in rows) else EXIT_FAILED


COMMANDS = {
    "cylinder": cmd_cylinder,
    "flow": cmd_flow,
    "flowline": cmd_flowline,
    "period": cmd_period,
    "table": cmd_table,
    "cutlocus": cmd_cutlocus,
    "bprime": cmd_bprime,
    "sphere": cmd_sphere,
    "verify": cmd_verify,
    "g-function": cmd_g_function,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv and run one subcommand; returns the exit status"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        cfg = IntegratorConfig.with_tol(args.tol)
        return COMMANDS[args.command](args, cfg)
    except DomainError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except IntegratorError as e:
        logger.error(f"❌ {e}")
        emit(json_text({"pass": False, "error": str(e), "t_reached": e.t_reached}, args.command))
        return EXIT_FAILED


def main(argv: Optional[List[str]] = None):
    """Main entry point"""
    Config.validate_config()
    Config.setup_logging()
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
