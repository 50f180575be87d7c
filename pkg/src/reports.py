"""CSV, text report and SVG emission."""

import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.appendix_checks import AppendixReport  # noqa: E402
from src.errors import OutputError  # noqa: E402
from src.evolution import TRACE_COLUMNS, TraceSeries  # noqa: E402
from src.fitting import DecayFit  # noqa: E402
from src.ledger import ConstantLedger, VerificationEntry, VerificationReport  # noqa: E402
from src.potential import ValidationResult  # noqa: E402
from src.templates.report_templates import (  # noqa: E402
    APPENDIX_BLOCK,
    AUXILIARY_HEADER,
    CONSTANT_ROW,
    CONSTANTS_HEADER,
    FIT_BLOCK,
    IDENTITY_HEADER,
    IDENTITY_ROW,
    NO_FIT_BLOCK,
    REPAIR_NOTES,
    REPORT_HEADER,
    TABLE_HEADER,
    TABLE_ROW,
    VALIDATION_BLOCK,
    WARNINGS_BLOCK,
)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SVG_HASH_SALT = "decay-lab"


def _parent(path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create directory for {path}: {e}") from e
    return path


def write_frame_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Writes a frame with 17 significant digits, so identical runs give identical files."""
    path = _parent(Path(path))
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e
    logger.info("Wrote %s", path)
    return path


def write_trace_csv(trace: TraceSeries, path: str | Path) -> Path:
    return write_frame_csv(trace.csv_frame(), path)


def read_trace_csv(path: str | Path) -> pd.DataFrame:
    """
    Reads a trace CSV written by write_trace_csv.

    Raises:
        OutputError: If the file is missing, unreadable or lacks trace columns.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise OutputError(f"Cannot read trace {path}: {e}") from e
    missing = [name for name in TRACE_COLUMNS if name not in frame.columns]
    if missing:
        raise OutputError(f"Trace {path} lacks columns: {', '.join(missing)}")
    return frame


def write_text(text: str, path: str | Path) -> Path:
    path = _parent(Path(path))
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e
    logger.info("Wrote %s", path)
    return path


def render_validation(result: ValidationResult) -> str:
    status = "ok" if result.ok else "rejected: " + "; ".join(result.reasons)
    return VALIDATION_BLOCK.format(status=status, **result.model_dump(exclude={"ok", "reasons"}))


def render_header(trace: TraceSeries) -> str:
    meta = trace.metadata
    data = ", ".join(f"{key}={value}" for key, value in meta["data"].items())
    return REPORT_HEADER.format(
        data=data,
        rhs=meta["rhs"],
        provenance=meta["provenance"],
        **meta["grid"],
        **meta["potential"],
        **meta["time"],
    )


def _entry_rows(entries: list[VerificationEntry]) -> str:
    rows = []
    for entry in entries:
        note = "  (lhs not monotone)" if entry.monotone is False else ""
        rows.append(
            TABLE_ROW.format(
                id=entry.id,
                t=entry.t_checked,
                lhs=entry.lhs,
                rhs=entry.rhs,
                margin=entry.margin,
                status="pass" if entry.passed else "FAIL",
                note=note,
            )
        )
    return "".join(rows)


def render_report(
    trace: TraceSeries,
    ledger: Optional[ConstantLedger],
    report: Optional[VerificationReport],
    auxiliary: list[VerificationEntry] = (),
    identities: Optional[dict[str, float]] = None,
    fit: Optional[DecayFit] = None,
    fit_error: str = "window not fitted",
    appendix: Optional[AppendixReport] = None,
) -> str:
    """
    Assembles the text report: header, constants, inequality table, extras, fit.

    Args:
        trace (TraceSeries): The run's trace.
        ledger (ConstantLedger | None): Constants, None when the potential was rejected.
        report (VerificationReport | None): The 15-entry suite.
        auxiliary (list): Auxiliary bound entries.
        identities (dict | None): Multiplier identity residuals.
        fit (DecayFit | None): Decay fit of the configured window.
        fit_error (str): Reason printed when fit is None.
        appendix (AppendixReport | None): Semigroup checks, if requested.

    Returns:
        str: The report text.
    """
    parts = [render_header(trace)]
    if trace.warnings:
        parts.append(WARNINGS_BLOCK.format(warnings="\n".join(f"- {w}" for w in trace.warnings)))

    if ledger is not None:
        parts.append(REPAIR_NOTES)
        parts.append(CONSTANTS_HEADER)
        parts.append("".join(CONSTANT_ROW.format(name=name, value=value) for name, value in ledger.constants().items()))

    if report is not None:
        parts.append(
            "\n"
            + TABLE_HEADER.format(
                passed=report.pass_count,
                total=len(report.entries),
                tol=report.tol,
                id="id",
                t="t",
                lhs="lhs",
                rhs="rhs",
                margin="margin",
                status="status",
            )
        )
        parts.append(_entry_rows(report.entries))

    if auxiliary:
        parts.append(AUXILIARY_HEADER)
        parts.append(_entry_rows(list(auxiliary)))

    if identities:
        parts.append(IDENTITY_HEADER)
        parts.append("".join(IDENTITY_ROW.format(name=name, value=value) for name, value in identities.items()))

    if fit is not None:
        parts.append(FIT_BLOCK.format(**fit.model_dump()))
    else:
        parts.append(NO_FIT_BLOCK.format(reason=fit_error))

    if appendix is not None:
        status = "pass" if appendix.passed else "FAIL"
        parts.append(APPENDIX_BLOCK.format(status=status, **appendix.model_dump()))
    return "".join(parts)


def write_report_csv(report: VerificationReport, path: str | Path) -> Path:
    return write_frame_csv(report.to_frame(), path)


def write_svg(trace: TraceSeries, fit: Optional[DecayFit], path: str | Path) -> Path:
    """
    Plots log E against log(1+t) with the fitted line, and (1+t)^2 E against t.

    Args:
        trace (TraceSeries): The run's trace.
        fit (DecayFit | None): Fit drawn over its window when present.
        path (str | Path): Target SVG file.

    Returns:
        Path: The written file.
    """
    path = _parent(Path(path))
    t = trace.times
    E = trace.frame["E"].to_numpy()
    positive = E > 0

    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
        left.plot(np.log1p(t[positive]), np.log(E[positive]), color="tab:blue", label="log E")
        if fit is not None:
            x = np.log1p(np.array([fit.t_min, fit.t_max]))
            left.plot(x, fit.slope * x + fit.intercept, color="tab:red", linestyle="--", label=f"slope {fit.slope:.3f}")
        left.set_xlabel("log(1+t)")
        left.set_ylabel("log E")
        left.legend()

        right.plot(t, (1.0 + t) ** 2 * E, color="tab:green")
        right.set_xlabel("t")
        right.set_ylabel("(1+t)^2 E")
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        finally:
            plt.close(fig)
    logger.info("Wrote %s", path)
    return path
