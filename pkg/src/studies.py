"""Refinement, domain-doubling and parameter-sweep studies built on repeated runs."""

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from time import time
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.config import RunConfig
from src.errors import DecayLabError
from src.evolution import prepare_run, simulate
from src.fitting import default_window, fit_decay
from src.ledger import compute_constants, verify_inequalities, weighted_energy_sup
from src.potential import validate_V1

logger = logging.getLogger(__name__)

SPATIAL_ORDER_RANGE = (1.8, 2.2)
TEMPORAL_ORDER_RANGE = (3.5, 4.5)
DOUBLING_TOL = 1e-4
ROUNDOFF_FLOOR = 1e-13

SWEEP_COLUMNS = ["index", "family", "V0", "alpha", "amplitude", "E_T", "slope", "sup_weighted_E", "pass_count", "status", "exit_code"]


def final_energy(config: RunConfig) -> float:
    """E(T) of a run that records only the first and last samples."""
    steps = int(round(config.time.T / config.time.dt))
    quiet = config.updated("time", sample_every=max(steps, 1)).updated(
        "flags", antiderivative_check=False, appendix_checks=False
    )
    return float(simulate(quiet).frame["E"].iloc[-1])


def refined_n(n: int, bc: str, factor: int) -> int:
    """Node count whose spacing is h/factor on the same domain."""
    if bc == "periodic":
        return n * factor
    return factor * (n + 1) - 1


class ConvergenceRow(BaseModel):
    study: str
    level: str
    parameter: float
    energy: float


class ConvergenceStudy(BaseModel):
    rows: list[ConvergenceRow]
    spatial_order: Optional[float]
    temporal_order: Optional[float]
    spatial_roundoff_floor: bool
    temporal_roundoff_floor: bool
    doubling_change: float

    @property
    def passed(self) -> bool:
        lo, hi = SPATIAL_ORDER_RANGE
        spatial_ok = self.spatial_order is not None and lo <= self.spatial_order <= hi
        lo, hi = TEMPORAL_ORDER_RANGE
        temporal_ok = self.temporal_roundoff_floor or (
            self.temporal_order is not None and lo <= self.temporal_order <= hi
        )
        return spatial_ok and temporal_ok and self.doubling_change <= DOUBLING_TOL


def richardson_order(coarse: float, medium: float, fine: float) -> tuple[Optional[float], bool]:
    """
    Observed order log2(|E1 - E0| / |E2 - E1|) of three halvings.

    Returns:
        tuple: (order or None, roundoff floor flag). The floor is flagged when the
        fine difference is within 1e-13 of |E| and no ratio can be formed.
    """
    first, second = abs(medium - coarse), abs(fine - medium)
    floor = ROUNDOFF_FLOOR * max(abs(fine), 1e-300)
    if second <= floor:
        return None, True
    return float(np.log2(first / second)), False


def run_convergence_study(config: RunConfig) -> ConvergenceStudy:
    """
    Runs the (h, h/2, h/4), (dt, dt/2, dt/4) and (L, 2L) families of the base config.

    Args:
        config (RunConfig): Base configuration.

    Returns:
        ConvergenceStudy: E(T) per run, observed orders and the doubling change.
    """
    start = time()
    n, bc, L, dt = config.domain.n, config.domain.bc, config.domain.L, config.time.dt
    rows = []

    base = final_energy(config)
    spatial = [base]
    rows.append(ConvergenceRow(study="spatial", level="h", parameter=2.0 * L / (n + 1 if bc == "dirichlet" else n), energy=base))
    for factor, level in ((2, "h/2"), (4, "h/4")):
        refined = config.updated("domain", n=refined_n(n, bc, factor))
        spatial.append(final_energy(refined))
        rows.append(ConvergenceRow(study="spatial", level=level, parameter=rows[0].parameter / factor, energy=spatial[-1]))

    temporal = [base]
    rows.append(ConvergenceRow(study="temporal", level="dt", parameter=dt, energy=base))
    for factor, level in ((2, "dt/2"), (4, "dt/4")):
        temporal.append(final_energy(config.updated("time", dt=dt / factor)))
        rows.append(ConvergenceRow(study="temporal", level=level, parameter=dt / factor, energy=temporal[-1]))

    doubled = config.updated("domain", L=2.0 * L, n=refined_n(n, bc, 2))
    wide = final_energy(doubled)
    rows.append(ConvergenceRow(study="domain", level="L", parameter=L, energy=base))
    rows.append(ConvergenceRow(study="domain", level="2L", parameter=2.0 * L, energy=wide))

    spatial_order, spatial_floor = richardson_order(*spatial)
    temporal_order, temporal_floor = richardson_order(*temporal)
    if temporal_floor:
        logger.warning("Temporal refinement reached the roundoff floor; no order formed")
    study = ConvergenceStudy(
        rows=rows,
        spatial_order=spatial_order,
        temporal_order=temporal_order,
        spatial_roundoff_floor=spatial_floor,
        temporal_roundoff_floor=temporal_floor,
        doubling_change=abs(wide - base) / max(abs(base), 1e-300),
    )
    end = time()
    logger.info(f"Time to run convergence study: {end - start:.2f}s")
    return study


def sweep_points(config: RunConfig) -> list[tuple[int, dict, bool]]:
    """
    Expands the sweep lists into run configurations in deterministic order.

    Returns:
        list: (index, config mapping, is_baseline), V0-major then alpha then amplitude,
        the V = 0 baseline last.
    """
    sweep = config.sweep
    V0s = sweep.V0 or [config.potential.V0]
    alphas = sweep.alpha or [config.potential.alpha]
    amplitudes = sweep.amplitude or [config.data.amplitude]

    quiet = config.updated("flags", antiderivative_check=False, appendix_checks=False)
    points = []
    for V0, alpha, amplitude in itertools.product(V0s, alphas, amplitudes):
        point = quiet.updated("potential", V0=V0, alpha=alpha).updated("data", amplitude=amplitude)
        points.append((len(points), point.model_dump(), False))
    if sweep.baseline:
        baseline = quiet.updated("potential", family="zero", V0=0.0).updated("data", amplitude=amplitudes[0])
        points.append((len(points), baseline.model_dump(), True))
    return points


def run_sweep_point(point: tuple[int, dict, bool]) -> dict:
    """
    Runs one sweep row. Module-level so it can be shipped to worker processes.

    Args:
        point (tuple): (index, config mapping, is_baseline).

    Returns:
        dict: One aggregate row; failures are recorded in its status.
    """
    index, mapping, baseline = point
    config = RunConfig.model_validate(mapping)
    row = {
        "index": index,
        "family": config.potential.family,
        "V0": config.potential.V0,
        "alpha": config.potential.alpha,
        "amplitude": config.data.amplitude,
        "E_T": np.nan,
        "slope": np.nan,
        "sup_weighted_E": np.nan,
        "pass_count": None,
        "status": "ok",
        "exit_code": 0,
    }
    try:
        setup = prepare_run(config)
        if not baseline:
            result = validate_V1(config.potential, setup.grid)
            if not result.ok:
                row["status"] = "rejected: " + "; ".join(result.reasons)
                return row

        trace = simulate(config, setup)
        row["E_T"] = float(trace.frame["E"].iloc[-1])
        row["sup_weighted_E"] = weighted_energy_sup(trace)
        try:
            row["slope"] = fit_decay(trace, default_window(config)).slope
        except DecayLabError as e:
            row["status"] = f"ok (no fit: {e})"

        if not baseline:
            ledger = compute_constants(setup.grid, config.potential, setup.u0, setup.u1)
            report = verify_inequalities(trace, ledger, tol=config.verify.tol, energy_tol=config.verify.energy_tol)
            row["pass_count"] = report.pass_count
    except DecayLabError as e:
        row["status"] = f"error: {e}"
        row["exit_code"] = e.exit_code
    return row


def worker_count() -> Optional[int]:
    value = os.getenv("DECAY_LAB_WORKERS", None)
    return int(value) if value else None


def run_sweep(config: RunConfig, max_workers: Optional[int] = None) -> pd.DataFrame:
    """
    Runs every sweep row, concurrently when more than one worker is allowed.

    Args:
        config (RunConfig): Base configuration with its sweep section.
        max_workers (int, optional): Worker processes; DECAY_LAB_WORKERS or the
            executor default when omitted.

    Returns:
        DataFrame: One row per sweep point in sweep order.
    """
    start = time()
    points = sweep_points(config)
    workers = max_workers if max_workers is not None else worker_count()

    logger.info(f"Running {len(points)} sweep rows")
    if workers == 1 or len(points) == 1:
        rows = [run_sweep_point(point) for point in points]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(run_sweep_point, points))

    end = time()
    logger.info(f"Time to run sweep: {end - start:.2f}s")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
