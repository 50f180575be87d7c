import argparse
import logging
import os
import sys
from time import time
from typing import Optional

from src.appendix_checks import run_appendix_checks
from src.config import RunConfig, load_config
from src.discrete_line import build_grid
from src.energetics import antiderivative_residual, energy_balance_residual, multiplier_identity_residuals
from src.errors import ConfigurationError, DecayLabError, InequalityFailure, PotentialValidationError
from src.evolution import prepare_run, simulate
from src.fitting import default_window, fit_decay
from src.ledger import auxiliary_checks, compute_constants, proposition_rate_floor, verify_inequalities
from src.potential import validate_V1
from src.reports import (
    read_trace_csv,
    render_report,
    render_validation,
    write_frame_csv,
    write_report_csv,
    write_svg,
    write_text,
    write_trace_csv,
)
from src.studies import run_convergence_study, run_sweep
from src.templates.report_templates import CONVERGENCE_ROW, CONVERGENCE_SUMMARY, FIT_BLOCK

logger = logging.getLogger("src.app")


def configure_logging() -> None:
    level = os.getenv("DECAY_LAB_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def cmd_validate(config: RunConfig) -> int:
    grid = build_grid(config.domain.L, config.domain.n, config.domain.bc)
    result = validate_V1(config.potential, grid)
    print(render_validation(result))
    return 0 if result.ok else PotentialValidationError.exit_code


def cmd_simulate(config: RunConfig, with_appendix_checks: bool = False) -> int:
    """
    Runs the configured problem, verifies the inequality suite and writes all outputs.

    Args:
        config (RunConfig): Validated run configuration.
        with_appendix_checks (bool): Adds the semigroup checks block to the report.

    Returns:
        int: 0 when every inequality passes, 2 for a rejected potential, 3 otherwise.
    """
    start = time()
    setup = prepare_run(config)
    validation = validate_V1(config.potential, setup.grid)
    if not validation.ok:
        print(render_validation(validation))
        return PotentialValidationError.exit_code

    trace = simulate(config, setup)
    write_trace_csv(trace, config.output.csv_path)

    ledger = compute_constants(setup.grid, config.potential, setup.u0, setup.u1)
    report = verify_inequalities(trace, ledger, tol=config.verify.tol, energy_tol=config.verify.energy_tol)
    auxiliary = auxiliary_checks(trace, ledger, tol=config.verify.tol)
    auxiliary.append(proposition_rate_floor(trace, ledger, tol=config.verify.tol))

    identities = {"energy balance": energy_balance_residual(trace)}
    identities.update(multiplier_identity_residuals(trace))
    if config.flags.antiderivative_check:
        identities["antiderivative"] = antiderivative_residual(trace, setup.system, setup.u0, setup.u1)

    fit, fit_error = None, ""
    try:
        fit = fit_decay(trace, default_window(config))
    except DecayLabError as e:
        fit_error = str(e)
        logger.warning(f"Decay fit skipped: {e}")

    appendix = None
    if with_appendix_checks or config.flags.appendix_checks:
        appendix = run_appendix_checks(setup.grid, config.potential)

    text = render_report(
        trace,
        ledger,
        report,
        auxiliary=auxiliary,
        identities=identities,
        fit=fit,
        fit_error=fit_error,
        appendix=appendix,
    )
    write_text(text, config.output.report_path)
    write_report_csv(report, config.output.resolved_report_csv_path)
    if config.output.svg_path:
        write_svg(trace, fit, config.output.svg_path)

    end = time()
    print(f"{report.pass_count}/{len(report.entries)} inequalities passed")
    print(f"Total time to process run: {end - start:.2f}s")

    if not report.all_passed:
        print(f"Failed: {', '.join(report.failures)}")
        return InequalityFailure.exit_code
    return 0


def cmd_fit(config: RunConfig) -> int:
    frame = read_trace_csv(config.output.csv_path)
    fit = fit_decay(frame, default_window(config))
    print(FIT_BLOCK.format(**fit.model_dump()).strip())
    return 0


def cmd_converge(config: RunConfig) -> int:
    study = run_convergence_study(config)
    for row in study.rows:
        print(CONVERGENCE_ROW.format(**row.model_dump()), end="")

    def order(value: Optional[float], floor: bool) -> str:
        if floor:
            return "roundoff floor"
        return f"{value:.4f}"

    print(
        CONVERGENCE_SUMMARY.format(
            spatial=order(study.spatial_order, study.spatial_roundoff_floor),
            temporal=order(study.temporal_order, study.temporal_roundoff_floor),
            doubling=study.doubling_change,
            status="pass" if study.passed else "FAIL",
        )
    )
    return 0 if study.passed else InequalityFailure.exit_code


def cmd_sweep(config: RunConfig) -> int:
    frame = run_sweep(config)
    write_frame_csv(frame, config.output.sweep_csv_path)
    print(frame.to_string(index=False))
    return int(frame["exit_code"].max()) if len(frame) else 0


COMMANDS = {
    "validate": cmd_validate,
    "fit": cmd_fit,
    "converge": cmd_converge,
    "sweep": cmd_sweep,
}


class CommandLineParser(argparse.ArgumentParser):
    """Usage errors exit with the configuration status instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigurationError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(
        prog="python -m src.app",
        description="Simulate the damped wave equation with rotational inertia and verify its decay bounds.",
    )
    parser.add_argument("command", choices=["validate", "simulate", "fit", "converge", "sweep"])
    parser.add_argument("--config", required=True, help="Path to the run configuration file")
    parser.add_argument(
        "--with-appendix-checks",
        action="store_true",
        help="Add the semigroup checks block to the simulate report",
    )
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        config = load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(config, with_appendix_checks=args.with_appendix_checks)
        return COMMANDS[args.command](config)
    except DecayLabError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
