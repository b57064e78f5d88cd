#!/usr/bin/env python3
"""
Dirac Bubbles - command-line entry point
Runs verification suites, single checks and profile exports
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import progress
from .calculus import default_grid, nonlinear_residual, stencil
from .clifford import build_rep
from .errors import DiracBubblesError
from .fields import CONVENTIONS, constant_field, standard_bubble
from .functionals import action, lower_bound_check
from .geometry import sphere_quadrature
from .greenkernel import kernel_G, representation_reconstruct, series_expand_kernel
from .report import CheckRecord, Report, show_report, write_report
from .suite import emit_profile, load_config, resolve_seed, run_suite, write_profile, write_profiles

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

RESIDUAL_IDENTITY = {
    "scaling": "D psi = |psi|^(2/(n-1)) psi",
    "corollary": "D psi = |psi|^(2/(n-1)) psi for the displayed closed form (reported, not enforced)",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirac-bubbles", description="Verification toolkit for critical Dirac bubbles")
    parser.add_argument("--verbose", action="store_true", help="Enable verbose logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="Run the full verification suite")
    verify.add_argument("--config", type=Path, help="Suite config (INI)")
    verify.add_argument("--out", type=Path, help="Report path (overrides [output] report)")
    verify.add_argument("--timings", action="store_true", help="Include per-check runtimes in the report")

    for name, helptext in (("residual", "Nonlinear residual of a bubble"),
                           ("action", "Action of a bubble against the ground-state level")):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--n", type=int, required=True, help="Dimension")
        cmd.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Bubble scale")
        cmd.add_argument("--center", type=float, nargs="*", help="Bubble center")
        cmd.add_argument("--amplitude-scale", type=float, default=1.0, help="Amplitude factor (1 = ground state)")
        if name == "residual":
            cmd.add_argument("--points", type=int, help="Grid points per axis")
            cmd.add_argument("--order", type=int, choices=(2, 4), default=2, help="Stencil order")
            cmd.add_argument("--tolerance", type=float, default=5e-3, help="Pass threshold for sup_rel")
        cmd.add_argument("--out", type=Path, help="Report path")

    kernel = sub.add_parser("kernel", help="Green-kernel series and reconstruction checks")
    kernel.add_argument("--n", type=int, required=True, help="Dimension")
    kernel.add_argument("--degree", type=int, default=60, help="Series degree K")
    kernel.add_argument("--ratio", type=float, default=0.3, help="|x|/|y| for the series check")
    kernel.add_argument("--order", type=int, default=40, help="Surface quadrature order")
    kernel.add_argument("--out", type=Path, help="Report path")

    profile = sub.add_parser("profile", help="Write the radial bubble profile as CSV")
    profile.add_argument("--n", type=int, required=True, help="Dimension")
    profile.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Bubble scale")
    profile.add_argument("--r-max", type=float, help="Largest radius (default 1000 lambda)")
    profile.add_argument("--samples", type=int, default=2001, help="Number of rows")
    profile.add_argument("--out", type=Path, required=True, help="CSV path")

    show = sub.add_parser("show", help="Print a saved report")
    show.add_argument("--report", type=Path, required=True, help="Report JSON")
    return parser


def _emit(report: Report, out: Optional[Path], timings: bool = False) -> int:
    if out is not None:
        write_report(report, out, timings=timings)
    else:
        sys.stdout.write(report.to_json(timings=timings))
    for record in report.failures:
        logger.error(f"Check {record.check_id} failed: {record.error or record.measured}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _bubble(args):
    center = np.asarray(args.center, dtype=float) if args.center else None
    return standard_bubble(args.n, lam=args.lam, center=center, amplitude_scale=args.amplitude_scale)


def cmd_verify(args) -> int:
    config = load_config(args.config)
    progress.configure(config.output.progress_log)
    progress.clear_progress_log()
    report = run_suite(config)
    write_profiles(config)
    return _emit(report, args.out or config.output.report, args.timings)


def cmd_residual(args) -> int:
    p = _bubble(args)
    grid = default_grid(p, m=args.points)
    records = []
    for convention in CONVENTIONS:
        norms = nonlinear_residual(p, grid, stencil(args.order), convention=convention)
        logger.info(f"{convention}: sup_rel={norms.sup_rel:.3e} l2_rel={norms.l2_rel:.3e}")
        passed = norms.sup_rel <= args.tolerance
        records.append(CheckRecord(
            check_id=f"calculus.residual.{convention}.n{p.n}", module="calculus",
            identity=RESIDUAL_IDENTITY[convention], measured=norms.sup_rel, reference=0.0,
            tolerance=args.tolerance, passed=passed if convention == "scaling" else True, dimension=p.n,
        ))
    return _emit(Report(seed=resolve_seed(0), records=records), args.out)


def cmd_action(args) -> int:
    p = _bubble(args)
    verdict = lower_bound_check(action(p), p.n)
    logger.info(str(verdict))
    record = CheckRecord(
        check_id=f"functionals.lower_bound.n{p.n}", module="functionals",
        identity="ground state attains the action bound", measured=verdict.value, reference=verdict.bound,
        tolerance=verdict.tolerance, passed=verdict.passes and verdict.ground_state, dimension=p.n,
    )
    return _emit(Report(seed=resolve_seed(0), records=[record]), args.out)


def cmd_kernel(args) -> int:
    n = args.n
    rep = build_rep(n)
    x = np.zeros(n)
    x[0] = args.ratio
    y = np.zeros(n)
    y[-1] = 1.0
    exact = kernel_G(x - y, rep)
    series_error = float(np.linalg.norm(series_expand_kernel(x, y, args.degree, rep) - exact) / np.linalg.norm(exact))
    c = np.ones(rep.N, dtype=np.complex128)
    rebuilt = representation_reconstruct(constant_field(c, n), np.zeros(n), rep, sphere_quadrature(n - 1, args.order))
    center_error = float(np.max(np.abs(rebuilt - c)))
    records = [
        CheckRecord(check_id=f"greenkernel.series.n{n}", module="greenkernel",
                    identity=f"Gegenbauer series of G(x - y), K = {args.degree}", measured=series_error,
                    reference=0.0, tolerance=1e-10, passed=series_error <= 1e-10, dimension=n),
        CheckRecord(check_id=f"greenkernel.reconstruct_center.n{n}", module="greenkernel",
                    identity="representation formula, constant at 0", measured=center_error, reference=0.0,
                    tolerance=1e-12, passed=center_error <= 1e-12, dimension=n),
    ]
    return _emit(Report(seed=resolve_seed(0), records=records), args.out)


def cmd_profile(args) -> int:
    p = standard_bubble(args.n, lam=args.lam)
    profile = emit_profile(p, args.r_max or 1e3 * args.lam, args.samples)
    write_profile(profile, args.out)
    print(f"✅ Profile with {len(profile)} rows written to {args.out}")
    return EXIT_OK


def cmd_show(args) -> int:
    return EXIT_OK if show_report(args.report) else EXIT_FAILED


COMMANDS = {
    "verify": cmd_verify,
    "residual": cmd_residual,
    "action": cmd_action,
    "kernel": cmd_kernel,
    "profile": cmd_profile,
    "show": cmd_show,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return COMMANDS[args.command](args)
    except (DiracBubblesError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
