# Command-line entry point: eval, verify and scan
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from heisenberg.config import settings
from heisenberg.models.params import PartialWeightParams, QuadratureSpec
from heisenberg.models.report import RunConfig
from heisenberg.services.error_service import (
    ErrorCategory, ErrorSeverity, categorize_error, create_error_context, error_service, log_error
)
from heisenberg.services.field_io import emit, profile_to_csv, reports_to_json, table_to_csv
from heisenberg.services.heatkernel import heat_kernel_values, p_twisted, q_heat
from heisenberg.services.partialweights import oscillation_scan, origin_profile, w_minus, w_plus_contour
from heisenberg.services.tolerance_manager import ToleranceManager
from heisenberg.services.twisted import weight_lambda
from heisenberg.services.verification_service import SUITES, VerificationService

logger = logging.getLogger(__name__)

EVAL_KINDS = ("k", "p_lambda", "w_lambda", "w_plus", "w_minus", "origin_profile", "q")
SCAN_HEADER = ("beta", "value", "normalized_value")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Raised when the command line violates a precondition of the requested command"""
    pass


def configure_logging(verbose: bool = False) -> None:
    """Log to stderr so CSV and JSON on stdout stay clean"""
    if verbose or settings.debug:
        level = logging.DEBUG
    else:
        level = getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heisenberg",
        description="Heat kernel transform on the Heisenberg group: evaluate, verify, scan",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--n", type=int, default=1, help="Heisenberg dimension")
        sub.add_argument("--t", type=float, default=1.0, help="heat time")
        sub.add_argument("--out", type=str, default=None, help="output file, stdout if omitted")
        sub.add_argument("--tol", type=float, default=None,
                         help="quadrature tolerance for eval, tolerance of every identity for verify")

    eval_parser = commands.add_parser(
        "eval", help="evaluate a kernel or weight at points",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    eval_parser.add_argument("kind", choices=EVAL_KINDS, help="quantity to evaluate")
    common(eval_parser)
    eval_parser.add_argument("--lambda", dest="lam", type=float, default=None, help="spectral parameter")
    eval_parser.add_argument("--eta", type=float, default=0.0, help="imaginary central coordinate")
    eval_parser.add_argument("--xi", type=float, default=0.0, help="real central coordinate")
    eval_parser.add_argument("--at", dest="points", action="append", nargs="+", type=float, default=[],
                             metavar="COORD", help="one evaluation point; repeat for more")
    eval_parser.add_argument("--quad-nodes", type=int, default=None, help="starting quadrature node count")

    verify_parser = commands.add_parser(
        "verify", help="run identity suites and emit a JSON report",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    verify_parser.add_argument("suite", nargs="?", default="all", help=f"one of {', '.join(SUITES)} or all")
    common(verify_parser)
    verify_parser.add_argument("--config", type=str, default=None, help="tolerance configuration file")

    scan_parser = commands.add_parser(
        "scan", help="sample the partial weight along 2 eta = -beta",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    common(scan_parser)
    scan_parser.add_argument("--beta-max", type=float, default=8.0, help="upper end of the scan")
    scan_parser.add_argument("--steps", type=int, default=400, help="number of samples")
    scan_parser.add_argument("--both-conventions", action="store_true",
                             help="also emit the scan of W_t^+ next to W_{t/2}^+")
    scan_parser.add_argument("--factor", choices=("stated", "heat"), default="stated",
                             help="series Gaussian: printed e^{-mu^2/4} or the weight's e^{-t mu^2}")
    return parser


def _validation_message(error: ValidationError) -> str:
    return "; ".join(str(err["msg"]).removeprefix("Value error, ") for err in error.errors())


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Validate parsed arguments into a RunConfig

    Raises:
        UsageError: If a value violates its precondition
    """
    fields = {key: value for key, value in vars(args).items() if key != "verbose" and value is not None}
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        raise UsageError(_validation_message(e))


# ---------------------------------------------------------------------------------------
# eval


def _coordinate_names(blocks: Sequence[str], n: int) -> List[str]:
    if n == 1:
        return list(blocks)
    return [f"{block}{k + 1}" for block in blocks for k in range(n)]


def _layout(kind: str, n: int, width: int) -> List[str]:
    """Column names for the coordinates of one --at point"""
    if kind == "k":
        return _coordinate_names(("x", "u"), n) + ["xi"]
    if kind == "p_lambda":
        return _coordinate_names(("y", "v"), n)
    if kind in ("w_lambda", "w_plus", "w_minus"):
        if width == 4 * n:
            return _coordinate_names(("x", "u", "y", "v"), n)
        return _coordinate_names(("y", "v"), n)
    if kind == "origin_profile":
        return ["eta"]
    return ["x"]


def _points(config: RunConfig) -> Tuple[np.ndarray, List[str]]:
    if not config.points:
        raise UsageError("--at: at least one evaluation point is required")
    widths = {len(p) for p in config.points}
    if len(widths) != 1:
        raise UsageError("--at: every point needs the same number of coordinates")
    width = widths.pop()
    names = _layout(config.kind, config.n, width)
    if width != len(names):
        raise UsageError(f"--at: {config.kind} with n={config.n} takes {len(names)} coordinates "
                         f"({','.join(names)}), got {width}")
    return np.array(config.points, dtype=float), names


def _split(points: np.ndarray, blocks: int, n: int) -> List[np.ndarray]:
    return [points[:, k * n:(k + 1) * n] for k in range(blocks)]


def _quad(config: RunConfig, nodes: int, tol: float) -> QuadratureSpec:
    return QuadratureSpec(nodes=config.quad_nodes or nodes, tol=config.tol or tol)


def _eval_k(config: RunConfig, points: np.ndarray) -> np.ndarray:
    x, u = _split(points, 2, config.n)
    r2 = np.sum(x * x, axis=-1) + np.sum(u * u, axis=-1)
    zeta = points[:, -1] + 1j * config.eta
    values = heat_kernel_values(r2, zeta, config.t, config.n, _quad(config, 64, 1e-10))
    return values if config.eta != 0 else values.real


def _eval_p_lambda(config: RunConfig, points: np.ndarray) -> np.ndarray:
    if config.lam is None:
        raise UsageError("--lambda is required for p_lambda")
    y, v = _split(points, 2, config.n)
    return np.atleast_1d(p_twisted(config.lam, config.t, y, v, config.n))


def _weight_blocks(config: RunConfig, points: np.ndarray):
    if points.shape[1] == 4 * config.n:
        return _split(points, 4, config.n)
    y, v = _split(points, 2, config.n)
    zeros = np.zeros_like(y)
    return zeros, zeros, y, v


def _eval_w_lambda(config: RunConfig, points: np.ndarray) -> np.ndarray:
    if not config.lam:
        raise UsageError("--lambda is required for w_lambda and must be non-zero")
    x, u, y, v = _weight_blocks(config, points)
    return np.atleast_1d(weight_lambda(config.t, config.lam, y, v, x, u, config.n))


def _partial_params(config: RunConfig, branch: str) -> PartialWeightParams:
    default = 1.0 if branch == "+" else -1.0
    lam = default if config.lam is None else config.lam
    try:
        return PartialWeightParams(t=config.t, lam=lam, branch=branch, quad=_quad(config, 1025, 1e-12))
    except ValidationError as e:
        name = "w_plus" if branch == "+" else "w_minus"
        raise UsageError(f"--lambda for {name}: {_validation_message(e)}")


def _eval_w_plus(config: RunConfig, points: np.ndarray) -> np.ndarray:
    x, u, y, v = _weight_blocks(config, points)
    params = _partial_params(config, "+")
    return np.atleast_1d(w_plus_contour(y, v, config.eta, config.t, params, x=x, u=u, xi=config.xi, n=config.n))


def _eval_w_minus(config: RunConfig, points: np.ndarray) -> np.ndarray:
    x, u, y, v = _weight_blocks(config, points)
    params = _partial_params(config, "-")
    return np.atleast_1d(w_minus(y, v, config.eta, config.t, params, x=x, u=u, xi=config.xi, n=config.n,
                                 tol=config.tol or 1e-8))


def _eval_origin_profile(config: RunConfig, points: np.ndarray) -> np.ndarray:
    if config.n != 1:
        raise UsageError("origin_profile is defined for n=1 only")
    return np.atleast_1d(origin_profile(points[:, 0], config.t))


def _eval_q(config: RunConfig, points: np.ndarray) -> np.ndarray:
    return np.atleast_1d(q_heat(points[:, 0], config.t))


EVALUATORS: Dict[str, Callable[[RunConfig, np.ndarray], np.ndarray]] = {
    "k": _eval_k,
    "p_lambda": _eval_p_lambda,
    "w_lambda": _eval_w_lambda,
    "w_plus": _eval_w_plus,
    "w_minus": _eval_w_minus,
    "origin_profile": _eval_origin_profile,
    "q": _eval_q,
}


def cmd_eval(config: RunConfig) -> int:
    """Evaluate config.kind at every --at point and emit coord...,value CSV"""
    if config.kind not in EVALUATORS:
        raise UsageError(f"unknown kind {config.kind!r}; choose from {', '.join(EVAL_KINDS)}")
    points, names = _points(config)
    values = EVALUATORS[config.kind](config, points)
    logger.info(f"eval {config.kind}: {len(points)} points, n={config.n}, t={config.t}")
    emit(profile_to_csv(points, values, names), config.out, sys.stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------------------
# verify


def cmd_verify(config: RunConfig) -> int:
    """Run the named suites; exit 0 iff every identity passes"""
    suite = config.suite or "all"
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}, all")

    manager = ToleranceManager(config.config)
    manager.load_configuration()
    manager.set_global_override(config.tol)

    # the report lists the errors raised by this run's checks
    error_service.clear_stats()
    reports = VerificationService(manager).run(suite)
    passed = all(report.passed for report in reports)
    payload = {
        "suites": [report.to_json_dict() for report in reports],
        "pass": passed,
        "errors": error_service.get_recent_errors(),
    }
    emit(reports_to_json(payload), config.out, sys.stdout)

    failures = [r.identity_name for report in reports for r in report.failures()]
    if failures:
        logger.warning(f"verify {suite}: {len(failures)} identities failed: {', '.join(failures)}")
        return EXIT_FAILURE
    logger.info(f"verify {suite}: all {sum(len(r.reports) for r in reports)} identities passed")
    return EXIT_OK


# ---------------------------------------------------------------------------------------
# scan


def _companion_path(out: str, convention: str) -> str:
    path = Path(out)
    return str(path.with_name(f"{path.stem}_{convention}{path.suffix}"))


def cmd_scan(config: RunConfig) -> int:
    """Emit beta,value,normalized_value along 2 eta = -beta, one CSV per time convention"""
    if config.n != 1:
        raise UsageError("scan is defined for n=1 only")
    scans = oscillation_scan(config.t, config.beta_max, config.steps, both_conventions=config.both_conventions,
                             factor=config.factor)
    texts = [table_to_csv(SCAN_HEADER, scan.rows()) for scan in scans]
    for scan in scans:
        logger.info(f"scan ({scan.convention}): sign changes at "
                    f"{', '.join(f'{b:.4g}' for b in scan.sign_changes) or 'none'}")

    if config.out is None:
        emit("\n".join(texts), None, sys.stdout)
    else:
        emit(texts[0], config.out, sys.stdout)
        for scan, text in zip(scans[1:], texts[1:]):
            emit(text, _companion_path(config.out, scan.convention), sys.stdout)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "scan": cmd_scan,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        config = run_config_from_args(args)
        return COMMANDS[config.command](config)
    except UsageError as e:
        log_error(e, ErrorCategory.VALIDATION, ErrorSeverity.LOW,
                  create_error_context(command=args.command))
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        category = categorize_error(e)
        log_error(e, category, ErrorSeverity.HIGH,
                  create_error_context(command=args.command, parameters={"argv": list(argv or sys.argv[1:])}))
        print(error_service.create_user_friendly_message(e, category), file=sys.stderr)
        return EXIT_USAGE if category == ErrorCategory.VALIDATION else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
