"""Explicit decay constants and the inequality suite checked against a recorded trace."""

import hmac
import logging
import math
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.discrete_line import Field, Grid1D, grad_sq, inner, l2_sq, lap_sq, neg_laplacian, weighted_grad_sq
from src.energetics import initial_second_data_energy, measure
from src.errors import ConfigurationError, PotentialValidationError, ProvenanceError
from src.evolution import TraceSeries, provenance_digest
from src.potential import PotentialSpec, validate_V1, weighted_data_norm

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_ENERGY_TOL = 1e-8
DELTA = 0.25

# Entries whose lhs is expected to grow in t, so the worst margin sits at the last sample.
MONOTONE_IDS = {"L2.1", "2.11", "2.13", "L3.5", "3.19", "3.20", "3.21", "gradw"}


class ConstantLedger(BaseModel):
    """
    Every constant of the decay proof chain, computed from (u0, u1, V) only.

    I0sq, B0 and C0 are signed; the others are nonnegative.
    """

    eps: float
    Ceps: float
    delta: float
    Cdelta: float
    Vinf: float
    V1inf: float
    V2inf: float
    alpha: float
    E0: float
    Estar0: float
    wgradpot0: float
    J0sq: float
    I0sq: float
    I1sq: float
    K0sq: float
    K1sq: float
    K2sq: float
    C1sq: float
    K3sq: float
    J1sq: float
    J2sq: float
    B0: float
    C0: float
    E2zero: float
    L0sq: float
    L1sq: float
    E0sq: float
    C2sq: float
    Cstar: float
    gradweight_bound: float
    final_energy_bound: float
    final_l2_bound: float
    provenance: str = ""

    def constants(self) -> dict[str, float]:
        return self.model_dump(exclude={"provenance"})


class VerificationEntry(BaseModel):
    """
    One inequality lhs <= rhs checked at every sample.

    Attributes:
        id (str): Inequality name.
        description (str): The inequality in words.
        t_checked (float): Sample time of the smallest margin.
        lhs (float): lhs at t_checked.
        rhs (float): The bound.
        margin (float): rhs - lhs at t_checked (the minimum over samples).
        passed (bool): margin >= -tol * |rhs|.
        monotone (bool | None): For running-integral entries, whether lhs was
            nondecreasing along the trace.
    """

    id: str
    description: str
    t_checked: float
    lhs: float
    rhs: float
    margin: float
    passed: bool
    monotone: Optional[bool] = None


class VerificationReport(BaseModel):
    entries: list[VerificationEntry]
    tol: float = DEFAULT_TOL
    energy_tol: float = DEFAULT_ENERGY_TOL

    @property
    def all_passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def failures(self) -> list[str]:
        return [entry.id for entry in self.entries if not entry.passed]

    @property
    def pass_count(self) -> int:
        return sum(entry.passed for entry in self.entries)

    def entry(self, id: str) -> VerificationEntry:
        for entry in self.entries:
            if entry.id == id:
                return entry
        raise KeyError(id)

    def to_frame(self) -> pd.DataFrame:
        """The (id, lhs, rhs, margin, pass) table written as report CSV."""
        return pd.DataFrame(
            {
                "id": [e.id for e in self.entries],
                "t_checked": [e.t_checked for e in self.entries],
                "lhs": [e.lhs for e in self.entries],
                "rhs": [e.rhs for e in self.entries],
                "margin": [e.margin for e in self.entries],
                "pass": [e.passed for e in self.entries],
            }
        )


def compute_constants(grid: Grid1D, spec: PotentialSpec, u0: Field, u1: Field) -> ConstantLedger:
    """
    Evaluates the constant chain for the given data and potential.

    Args:
        grid (Grid1D): The grid the data are sampled on.
        spec (PotentialSpec): A potential passing validate_V1.
        u0 (ndarray): Initial displacement.
        u1 (ndarray): Initial velocity.

    Returns:
        ConstantLedger: All constants plus the provenance digest of the inputs.

    Raises:
        PotentialValidationError: If the potential fails |V'| <= alpha V or the smallness condition.
    """
    result = validate_V1(spec, grid)
    if not result.ok:
        raise PotentialValidationError(
            "Constant ledger unavailable: " + "; ".join(result.reasons)
        )
    u0, u1 = grid.check(u0), grid.check(u1)
    Vinf, V1, V2 = result.Vinf, result.V1inf, result.V2inf
    alpha = spec.alpha
    V_nodes, V_edges = spec.on_grid(grid)

    eps = 0.5 if V1 == 0 else min(0.5, 1.0 / (2.0 * V1))
    Ceps = 1.0 / (4.0 * eps)
    Cdelta = V2 / (4.0 * DELTA)
    split = 1.0 - eps * V1

    first = measure(grid, V_nodes, V_edges, u0, u1, 0.0)
    E0, Estar0 = first.E, first.Estar
    Lu0, Lu1 = neg_laplacian(grid, u0), neg_laplacian(grid, u1)
    wgradpot0 = weighted_grad_sq(grid, u0, V_edges)
    grad_u0, grad_u01 = grad_sq(grid, u0), inner(grid, Lu0, u1)

    J0sq = 0.5 * (l2_sq(grid, u0) + grad_u0) + 0.5 * weighted_data_norm(grid, spec, u0, u1) ** 2
    I0sq = inner(grid, u0, u1) + grad_u01 + 0.5 * l2_sq(grid, u0)
    I1sq = 0.5 * grad_sq(grid, u1) + 0.5 * lap_sq(grid, u1) + 0.5 * lap_sq(grid, u0)
    K0sq = I1sq + 0.5 * wgradpot0 + Ceps * V1 * J0sq
    K2sq = K0sq / split
    K1sq = I0sq + E0 + (I1sq + wgradpot0) / split + Ceps * V1 * J0sq / split
    C1sq = 2.0 * E0 + Vinf * J0sq + K2sq + K1sq
    K3sq = E0 + 0.5 * (E0 + K2sq + K1sq + Vinf * J0sq)
    J1sq = E0 + 0.5 * J0sq
    J2sq = I1sq + 0.5 * wgradpot0 + Ceps * V1 * J0sq
    B0 = grad_u01 - 0.5 * grad_u0 + inner(grid, u1, u0)
    C0 = grad_u01 + inner(grid, Lu1, Lu0) + 0.5 * grad_u0

    E2zero = initial_second_data_energy(grid, u0, u1)
    L0sq = (
        E2zero
        + V2**2 / (4.0 * DELTA) * J0sq
        + 2.0 * V1**2 / (4.0 * DELTA) * K1sq
        + 0.5 * inner(grid, V_nodes * Lu0, Lu0)
    )
    L1sq = C0 + E0 + L0sq + K2sq + 0.5 * Vinf**2 * J0sq + I1sq + 0.5 * Vinf * (J0sq + 2.0 * L0sq)
    E0sq = B0 + 3.0 * C1sq + J1sq + 2.0 * Estar0 + wgradpot0 + Vinf * K1sq + K3sq
    C2sq = K2sq + L0sq + L1sq
    Cstar = 1.0 / (1.0 - alpha**2 * Vinf)
    weighted_tail = E0sq + 2.0 * C2sq
    gradweight_bound = (
        2.0 * Estar0 + wgradpot0 + 2.0 * C2sq + 2.0 * Vinf * K1sq + alpha**2 * Vinf * Cstar * weighted_tail
    )
    final_energy_bound = E0 + K3sq + gradweight_bound + E0sq + 2.0 * C2sq + Cstar * weighted_tail
    final_l2_bound = 4.0 * (B0 + 3.0 * C1sq + J1sq + gradweight_bound + K3sq)

    ledger = ConstantLedger(
        eps=eps,
        Ceps=Ceps,
        delta=DELTA,
        Cdelta=Cdelta,
        Vinf=Vinf,
        V1inf=V1,
        V2inf=V2,
        alpha=alpha,
        E0=E0,
        Estar0=Estar0,
        wgradpot0=wgradpot0,
        J0sq=J0sq,
        I0sq=I0sq,
        I1sq=I1sq,
        K0sq=K0sq,
        K1sq=K1sq,
        K2sq=K2sq,
        C1sq=C1sq,
        K3sq=K3sq,
        J1sq=J1sq,
        J2sq=J2sq,
        B0=B0,
        C0=C0,
        E2zero=E2zero,
        L0sq=L0sq,
        L1sq=L1sq,
        E0sq=E0sq,
        C2sq=C2sq,
        Cstar=Cstar,
        gradweight_bound=gradweight_bound,
        final_energy_bound=final_energy_bound,
        final_l2_bound=final_l2_bound,
        provenance=provenance_digest(grid, spec, u0, u1),
    )
    bad = [name for name, value in ledger.constants().items() if not math.isfinite(value)]
    if bad:
        raise ConfigurationError(f"Non-finite ledger constants: {', '.join(bad)}")
    logger.debug("Ledger built: final energy bound %.6e", final_energy_bound)
    return ledger


def theorem_bounds(ledger: ConstantLedger) -> tuple[float, float]:
    """(energy coefficient, L^2 coefficient) of the (1+t)^-2 and (1+t)^-1 decay bounds."""
    return ledger.final_energy_bound, ledger.final_l2_bound


def _check(id: str, description: str, t, lhs, rhs: float, tol: float) -> VerificationEntry:
    lhs = np.asarray(lhs, dtype=np.float64)
    margins = rhs - lhs
    k = int(np.argmin(margins))
    margin = float(margins[k])
    monotone = None
    if id in MONOTONE_IDS:
        scale = max(float(np.max(np.abs(lhs))), 1e-300)
        monotone = bool(np.all(np.diff(lhs) >= -1e-12 * scale))
    return VerificationEntry(
        id=id,
        description=description,
        t_checked=float(t[k]),
        lhs=float(lhs[k]),
        rhs=float(rhs),
        margin=margin,
        passed=margin >= -tol * abs(rhs),
        monotone=monotone,
    )


def _check_provenance(trace: TraceSeries, ledger: ConstantLedger) -> None:
    digest = trace.metadata.get("provenance", "")
    if not ledger.provenance or not hmac.compare_digest(digest, ledger.provenance):
        raise ProvenanceError("Trace and ledger were built from different grid, potential or data")


def verify_inequalities(
    trace: TraceSeries,
    ledger: ConstantLedger,
    tol: float = DEFAULT_TOL,
    energy_tol: float = DEFAULT_ENERGY_TOL,
) -> VerificationReport:
    """
    Checks the 15 inequalities of the decay proof chain at every sample.

    Args:
        trace (TraceSeries): A completed trace.
        ledger (ConstantLedger): Constants built from the same inputs.
        tol (float): Relative slack of the pass rule.
        energy_tol (float): Acceptance level of the relative energy-balance defect.

    Returns:
        VerificationReport: One entry per inequality, in proof-chain order.

    Raises:
        ProvenanceError: If trace and ledger come from different inputs.
    """
    _check_provenance(trace, ledger)
    f = trace.frame
    t = f["t"].to_numpy()
    E = f["E"].to_numpy()
    w = 1.0 + t
    c = ledger
    tail = c.E0sq + 2.0 * c.C2sq

    checks = [
        ("L2.1", "||u||^2 + ∫||u||^2 <= J0^2", f["l2u"] + f["acc_u"], c.J0sq),
        ("E-balance", "|E(t) + ∫||u_s||^2 - E(0)| <= energy_tol E(0)", np.abs(E + f["acc_us"] - E[0]), energy_tol * E[0]),
        ("P2.1", "(1+t) E(t) <= C1^2", w * E, c.C1sq),
        ("2.13", "∫||∇u_s||^2 <= K2^2", f["acc_grad_us"], c.K2sq),
        ("2.11", "∫||∇u||^2 <= K1^2", f["acc_grad_u"], c.K1sq),
        ("L3.1", "∫(1+s)||u_s||^2 <= K3^2", f["acc_w_us"], c.K3sq),
        ("L3.3", "½||Δu||^2 <= J2^2", 0.5 * f["lapu"], c.J2sq),
        ("L3.4", "½||Δu_t||^2 + ½∫||Δu_s||^2 <= L0^2", 0.5 * f["lapv"] + 0.5 * f["acc_lap_us"], c.L0sq),
        ("L3.5", "∫||Δu||^2 <= L1^2", f["acc_lap_u"], c.L1sq),
        ("3.19", "∫E* <= C2^2", f["acc_Estar"], c.C2sq),
        ("3.20", "∫(1+s)||sqrt(V) u||^2 <= C* (E0^2 + 2 C2^2)", f["acc_w_wpot_u"], c.Cstar * tail),
        ("3.21", "∫(1+s)||∇u||^2 <= E0^2 + 2 C2^2", f["acc_w_grad_u"], tail),
        ("gradw", "∫(1+s)||∇u_s||^2 <= gradient-weight bound", f["acc_w_grad_us"], c.gradweight_bound),
        ("T1.1-E", "(1+t)^2 E(t) <= final energy bound", w**2 * E, c.final_energy_bound),
        ("T1.1-L2", "(1+t)||u||^2 <= final L^2 bound", w * f["l2u"], c.final_l2_bound),
    ]
    entries = [_check(id, text, t, lhs, rhs, tol) for id, text, lhs, rhs in checks]
    report = VerificationReport(entries=entries, tol=tol, energy_tol=energy_tol)
    for entry in entries:
        if entry.monotone is False:
            logger.warning("lhs of %s decreased along the trace", entry.id)
    if not report.all_passed:
        logger.warning("Failed inequalities: %s", ", ".join(report.failures))
    return report


def auxiliary_checks(trace: TraceSeries, ledger: ConstantLedger, tol: float = DEFAULT_TOL) -> list[VerificationEntry]:
    """
    Intermediate bounds of the proof chain, reported beside the main suite.

    Args:
        trace (TraceSeries): A completed trace.
        ledger (ConstantLedger): Constants built from the same inputs.
        tol (float): Relative slack of the pass rule.

    Returns:
        list: Entries "K(t)", "L3.2-live" and "3.18".
    """
    _check_provenance(trace, ledger)
    f = trace.frame
    t = f["t"].to_numpy()
    c = ledger
    return [
        _check("K(t)", "½||∇u||^2 + ½||u||^2 + ½∫||u||^2 <= J1^2", t, 0.5 * (f["gradu"] + f["l2u"] + f["acc_u"]), c.J1sq, tol),
        _check(
            "L3.2-live",
            "∫(1+s)||sqrt(V) u||^2 <= C* (E0^2 + 2∫E*)",
            t,
            f["acc_w_wpot_u"] - c.Cstar * 2.0 * f["acc_Estar"],
            c.Cstar * c.E0sq,
            tol,
        ),
        _check("3.18", "½||Δu||^2 <= I1^2 + ½||V|| (J0^2 + 2 L0^2)", t, 0.5 * f["lapu"], c.I1sq + 0.5 * c.Vinf * (c.J0sq + 2.0 * c.L0sq), tol),
    ]


def proposition_rate_floor(trace: TraceSeries, ledger: ConstantLedger, tol: float = DEFAULT_TOL) -> VerificationEntry:
    """The (1+t)^-1 decay floor: sup (1+t) E(t) against C1^2."""
    _check_provenance(trace, ledger)
    t = trace.times
    return _check("P2.1-rate", "sup (1+t) E(t) <= C1^2", t, (1.0 + t) * trace.frame["E"].to_numpy(), ledger.C1sq, tol)


def weighted_energy_sup(trace: TraceSeries) -> float:
    """Measured sup (1+t) E(t), available with or without a ledger."""
    t = trace.times
    return float(np.max((1.0 + t) * trace.frame["E"].to_numpy()))
