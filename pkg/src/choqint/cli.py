"""Command line front end.

Subcommands::

    integrate  --g EXPR --m EXPR --a A --t START:STOP:POINTS [--verify]
    derive     --f EXPR --m EXPR --a A --t ...
    identify   --f EXPR --g EXPR --a A --t ...
    verify     --g EXPR --m EXPR --a A --t ...

Reports go to stdout or ``--output`` as CSV (default) or JSON; timing and
diagnostics go to stderr.  Exit codes: 0 success, 2 expression or usage
error, 3 inadmissible input (not nonnegative/nondecreasing, bad distortion,
f(a) != 0), 4 numerical failure, 5 derive found no admissible derivative,
6 verification gap above threshold.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .capacity import Distortion, certify_samples
from .choquet import (
    ChoquetProblem,
    check_hereditary,
    choquet_convolution,
    choquet_general,
    choquet_level_set,
    shift_to_origin,
    uniform_grid,
)
from .errors import (
    ChoqintError,
    DivergentIntegralError,
    DomainError,
    GVanishesError,
    InvalidDistortionError,
    InvalidIntervalError,
    NonDifferentiableError,
    NonPositiveSError,
    NotInFPlusError,
    OriginNotZeroError,
    ParseError,
)
from .exprlang import parse
from .laplace import (
    InversionConfig,
    Verdict,
    solve_problem2,
    solve_problem3,
)
from .quadrature import QuadratureConfig
from .report import RunReport

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INADMISSIBLE = 3
EXIT_NUMERICAL = 4
EXIT_NO_DERIVATIVE = 5
EXIT_VERIFY_FAILED = 6


class UsageError(ChoqintError):
    """Invalid run configuration (exits like an argparse usage error)."""


_INADMISSIBLE = (NotInFPlusError, InvalidDistortionError, OriginNotZeroError)
_NUMERICAL = (DomainError, DivergentIntegralError, InvalidIntervalError,
              NonPositiveSError, GVanishesError, NonDifferentiableError)


def _t_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected START:STOP:POINTS")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if points < 2:
        raise argparse.ArgumentTypeError("need at least 2 grid points")
    if stop <= start:
        raise argparse.ArgumentTypeError("STOP must exceed START")
    return start, stop, points


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="choqint",
        description="Choquet integral calculus on [a, t] for distorted "
                    "Lebesgue measures",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--a", type=float, default=0.0, help="interval origin (default 0)")
        p.add_argument("--t", type=_t_range, required=True, metavar="START:STOP:POINTS",
                       help="uniform evaluation grid, inclusive endpoints")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default="-", help="output path, '-' for stdout")
        p.add_argument("--subintervals", type=int, default=40)
        p.add_argument("--nodes", type=int, default=16)
        p.add_argument("--refinement-tol", type=float, default=1e-8)
        p.add_argument("--max-refinements", type=int, default=6)
        p.add_argument("--grading", type=float, default=0.5)
        p.add_argument("--stehfest-terms", type=int, default=16)
        p.add_argument("--monotone-slack", type=float, default=1e-10)
        p.add_argument("--residual-tol", type=float, default=1e-2)
        p.add_argument("--decisive-ratio", type=float, default=1e-3)

    p_int = sub.add_parser("integrate", help="forward Choquet integral of g")
    p_int.add_argument("--g", required=True, help="integrand expression in t")
    p_int.add_argument("--m", required=True, help="distortion expression in t")
    p_int.add_argument("--verify", action="store_true",
                       help="add level-set oracle values and gaps")
    common(p_int)

    p_der = sub.add_parser("derive", help="derivative of f with respect to the measure")
    p_der.add_argument("--f", required=True, help="integral expression in t")
    p_der.add_argument("--m", required=True, help="distortion expression in t")
    common(p_der)

    p_ide = sub.add_parser("identify", help="identify the distortion from f and g")
    p_ide.add_argument("--f", required=True, help="integral expression in t")
    p_ide.add_argument("--g", required=True, help="integrand expression in t")
    common(p_ide)

    p_ver = sub.add_parser("verify", help="cross-route property battery on g and m")
    p_ver.add_argument("--g", required=True, help="integrand expression in t")
    p_ver.add_argument("--m", required=True, help="distortion expression in t")
    p_ver.add_argument("--route-tol", type=float, default=1e-5)
    p_ver.add_argument("--hereditary-tol", type=float, default=1e-6)
    p_ver.add_argument("--shift-tol", type=float, default=1e-10)
    common(p_ver)

    return parser


def _quadrature(args) -> QuadratureConfig:
    return QuadratureConfig(
        subintervals=args.subintervals,
        nodes_per_subinterval=args.nodes,
        refinement_tolerance=args.refinement_tol,
        max_refinements=args.max_refinements,
        endpoint_grading=args.grading,
    )


def _inversion(args) -> InversionConfig:
    return InversionConfig(stehfest_terms=args.stehfest_terms)


def _grid(args) -> np.ndarray:
    start, stop, points = args.t
    if start < args.a:
        raise UsageError(
            f"grid start {start!r} precedes the interval origin {args.a!r}"
        )
    return uniform_grid(start, stop, points)


def _distortion(args, span: float) -> Distortion:
    return Distortion.from_expression(args.m, upper=max(span, 1.0))


def _echo_inputs(args, names: tuple[str, ...]) -> dict:
    start, stop, points = args.t
    echo: dict = {name: getattr(args, name) for name in names}
    echo.update({
        "a": args.a,
        "t_start": start,
        "t_stop": stop,
        "t_points": points,
        "subintervals": args.subintervals,
        "nodes": args.nodes,
        "refinement_tol": args.refinement_tol,
        "max_refinements": args.max_refinements,
        "grading": args.grading,
        "stehfest_terms": args.stehfest_terms,
        "monotone_slack": args.monotone_slack,
        "residual_tol": args.residual_tol,
        "decisive_ratio": args.decisive_ratio,
    })
    return echo


def _certificate_dict(cert, first_point_excluded: bool = False) -> dict:
    return {
        "verdict": cert.verdict,
        "monotone": cert.is_monotone,
        "violation_index": cert.violation_index,
        "max_violation": cert.max_violation,
        "first_point_excluded": first_point_excluded,
    }


def run_integrate(args) -> RunReport:
    started = time.perf_counter()
    grid = _grid(args)
    g = parse(args.g)
    d = _distortion(args, grid[-1] - args.a)
    cfg = _quadrature(args)
    problem = ChoquetProblem(args.a, g, d, grid)
    values = [choquet_convolution(problem, float(t), cfg) for t in grid]
    if args.verify:
        columns = ["t", "value", "oracle_value", "gap"]
        rows = []
        for t, v in zip(grid, values):
            oracle = choquet_level_set(problem, float(t), cfg)
            rows.append([float(t), v, oracle, abs(v - oracle)])
    else:
        columns = ["t", "value"]
        rows = [[float(t), v] for t, v in zip(grid, values)]
    cert = certify_samples(grid, np.array(values), args.monotone_slack)
    return RunReport(
        command="integrate",
        inputs=_echo_inputs(args, ("g", "m")),
        columns=columns,
        rows=rows,
        certificate=_certificate_dict(cert),
        duration_seconds=time.perf_counter() - started,
    )


def _monotone_flags(values: np.ndarray, slack: float) -> list[bool]:
    """Row-wise admissibility: nonnegative and no decrease from the
    predecessor (within slack)."""
    flags = []
    for i, v in enumerate(values):
        ok = v >= -slack and (i == 0 or v >= values[i - 1] - slack)
        flags.append(bool(ok))
    return flags


def run_derive(args) -> RunReport:
    started = time.perf_counter()
    grid = _grid(args)
    f = parse(args.f)
    d = _distortion(args, grid[-1] - args.a)
    report = solve_problem2(
        f, d, args.a, grid,
        quadrature=_quadrature(args),
        inversion=_inversion(args),
        residual_threshold=args.residual_tol,
        decisive_ratio=args.decisive_ratio,
    )
    flags = _monotone_flags(report.values, args.monotone_slack)
    rows = [[float(t), float(v), ok]
            for t, v, ok in zip(report.grid, report.values, flags)]
    return RunReport(
        command="derive",
        inputs=_echo_inputs(args, ("f", "m")),
        columns=["t", "value", "monotone_ok"],
        rows=rows,
        certificate=_certificate_dict(report.certificate,
                                      report.first_point_excluded),
        residual=report.residual,
        verdict=report.verdict.value,
        duration_seconds=time.perf_counter() - started,
    )


def run_identify(args) -> RunReport:
    started = time.perf_counter()
    grid = _grid(args)
    f = parse(args.f)
    g = parse(args.g)
    report = solve_problem3(
        f, g, args.a, grid,
        quadrature=_quadrature(args),
        inversion=_inversion(args),
        residual_threshold=args.residual_tol,
        decisive_ratio=args.decisive_ratio,
    )
    flags = _monotone_flags(report.values, args.monotone_slack)
    rows = [[float(u), float(v), ok]
            for u, v, ok in zip(report.grid, report.values, flags)]
    return RunReport(
        command="identify",
        inputs=_echo_inputs(args, ("f", "g")),
        columns=["t", "value", "monotone_ok"],
        rows=rows,
        certificate=_certificate_dict(report.certificate),
        residual=report.residual,
        verdict=report.verdict.value,
        duration_seconds=time.perf_counter() - started,
    )


def run_verify(args) -> RunReport:
    started = time.perf_counter()
    grid = _grid(args)
    g = parse(args.g)
    d = _distortion(args, grid[-1] - args.a)
    cfg = _quadrature(args)
    problem = ChoquetProblem(args.a, g, d, grid)
    shifted = shift_to_origin(problem)

    rows = []
    max_level_set = 0.0
    max_general = 0.0
    max_shift = 0.0
    for t in grid:
        t = float(t)
        conv = choquet_convolution(problem, t, cfg)
        oracle = choquet_level_set(problem, t, cfg)
        general = choquet_general(problem, t, cfg)
        moved = choquet_convolution(shifted, t - args.a, cfg)
        scale = 1.0 + abs(conv)
        max_level_set = max(max_level_set, abs(oracle - conv) / scale)
        max_general = max(max_general, abs(general - conv) / scale)
        max_shift = max(max_shift, abs(moved - conv) / scale)
        rows.append([t, conv, oracle, abs(conv - oracle)])

    t_final = float(grid[-1])
    split = float(grid[grid.size // 2])
    hereditary = check_hereditary(problem, split, t_final, cfg)
    hereditary_rel = hereditary.gap / (1.0 + abs(hereditary.lhs))

    passed = (max_level_set <= args.route_tol
              and max_general <= args.route_tol
              and hereditary_rel <= args.hereditary_tol
              and max_shift <= args.shift_tol)
    inputs = _echo_inputs(args, ("g", "m"))
    inputs.update({"route_tol": args.route_tol,
                   "hereditary_tol": args.hereditary_tol,
                   "shift_tol": args.shift_tol})
    return RunReport(
        command="verify",
        inputs=inputs,
        columns=["t", "value", "oracle_value", "gap"],
        rows=rows,
        verdict="Pass" if passed else "Fail",
        properties={
            "max_level_set_gap": max_level_set,
            "max_general_gap": max_general,
            "hereditary_split": split,
            "hereditary_gap": hereditary_rel,
            "max_shift_gap": max_shift,
        },
        duration_seconds=time.perf_counter() - started,
    )


_RUNNERS = {
    "integrate": run_integrate,
    "derive": run_derive,
    "identify": run_identify,
    "verify": run_verify,
}


def _emit(report: RunReport, args) -> None:
    text = report.to_json_text() if args.format == "json" else report.to_csv_text()
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(f"{report.command}: done in {report.duration_seconds:.3f}s", file=sys.stderr)


def _join_t_flag(argv: list[str]) -> list[str]:
    """Fold '--t -1:1:5' into '--t=-1:1:5' so a leading minus in the range
    is not mistaken for an option."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--t" and i + 1 < len(argv):
            out.append(f"--t={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_t_flag(sys.argv[1:] if argv is None else list(argv)))
    try:
        report = _RUNNERS[args.command](args)
    except UsageError as exc:
        print(f"choqint: usage error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ParseError as exc:
        print(f"choqint: expression error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _INADMISSIBLE as exc:
        print(f"choqint: inadmissible input: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except _NUMERICAL as exc:
        print(f"choqint: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ChoqintError as exc:  # any remaining library error
        print(f"choqint: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(report, args)
    if report.command == "derive" and report.verdict == Verdict.DOES_NOT_EXIST.value:
        return EXIT_NO_DERIVATIVE
    if report.command == "verify" and report.verdict == "Fail":
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
