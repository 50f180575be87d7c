"""Energy functionals and proof-device diagnostics evaluated on states and traces."""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from src.discrete_line import (
    Field,
    Grid1D,
    grad_sq,
    inner,
    l2_sq,
    lap_sq,
    lapgrad_sq,
    neg_laplacian,
    weighted_grad_sq,
)
from src.errors import ConfigurationError
from src.potential import PotentialSpec, antiderivative_source

if TYPE_CHECKING:
    from src.evolution import SemidiscreteSystem, StateVector, TraceSeries

TINY = 1e-300


@dataclass(frozen=True)
class EnergyRecord:
    """
    Every norm tracked at one sample time.

    Squared norms: l2u = ||u||^2, l2v = ||u_t||^2, gradu = ||∇u||^2,
    gradv = ||∇u_t||^2, lapu = ||Δu||^2, lapv = ||Δu_t||^2, wpot = ||sqrt(V) u||^2,
    wgradpot = ∫V|∇u|^2 (edge-midpoint V). cross_uv = (u_t, u) and
    cross_grad_uv = (∇u_t, ∇u) feed the multiplier identities.
    """

    t: float
    E: float
    Estar: float
    l2u: float
    l2v: float
    gradu: float
    gradv: float
    lapu: float
    lapv: float
    wpot: float
    wgradpot: float
    cross_uv: float
    cross_grad_uv: float


def measure(grid: Grid1D, V_nodes: Field, V_edges: Field, u: Field, v: Field, t: float) -> EnergyRecord:
    """
    Evaluates all tracked norms of the state (u, v = u_t).

    Args:
        grid (Grid1D): The grid.
        V_nodes (ndarray): Potential at the nodes.
        V_edges (ndarray): Potential at the edge midpoints.
        u (ndarray): Displacement.
        v (ndarray): Velocity.
        t (float): Sample time.

    Returns:
        EnergyRecord: The record, with E and E* recomposed from their summands.
    """
    l2u, l2v = l2_sq(grid, u), l2_sq(grid, v)
    gradu, gradv = grad_sq(grid, u), grad_sq(grid, v)
    lapu, lapv = lap_sq(grid, u), lap_sq(grid, v)
    wpot = inner(grid, V_nodes * u, u)
    return EnergyRecord(
        t=t,
        E=0.5 * (l2v + gradv + gradu + wpot),
        Estar=0.5 * (gradv + lapv + lapu),
        l2u=l2u,
        l2v=l2v,
        gradu=gradu,
        gradv=gradv,
        lapu=lapu,
        lapv=lapv,
        wpot=wpot,
        wgradpot=weighted_grad_sq(grid, u, V_edges),
        cross_uv=inner(grid, v, u),
        cross_grad_uv=inner(grid, neg_laplacian(grid, v), u),
    )


def first_energy(grid: Grid1D, spec: PotentialSpec, state: "StateVector") -> float:
    """E = ½(||u_t||^2 + ||∇u_t||^2 + ||∇u||^2 + ||sqrt(V) u||^2)."""
    u, v = grid.check(state.u), grid.check(state.v)
    V_nodes = spec.evaluate(grid.nodes)[0]
    l2v, gradv, gradu = l2_sq(grid, v), grad_sq(grid, v), grad_sq(grid, u)
    wpot = inner(grid, V_nodes * u, u)
    return 0.5 * (l2v + gradv + gradu + wpot)


def second_energy(grid: Grid1D, state: "StateVector") -> float:
    """E* = ½(||∇u_t||^2 + ||Δu_t||^2 + ||Δu||^2)."""
    u, v = grid.check(state.u), grid.check(state.v)
    return 0.5 * (grad_sq(grid, v) + lap_sq(grid, v) + lap_sq(grid, u))


def initial_second_data_energy(grid: Grid1D, u0: Field, u1: Field) -> float:
    """E2(0) = ½(||Δu1||^2 + ||Δ(u1)_x||^2 + ||Δ(u0)_x||^2)."""
    return 0.5 * (lap_sq(grid, u1) + lapgrad_sq(grid, u1) + lapgrad_sq(grid, u0))


def weighted_grad_energy(grid: Grid1D, spec: PotentialSpec, f: Field) -> float:
    """∫V|∇f|^2 with V sampled at edge midpoints."""
    return weighted_grad_sq(grid, f, spec.on_grid(grid)[1])


def energy_balance_residual(trace: "TraceSeries") -> float:
    """
    Computes the discrete energy-balance defect.

    Args:
        trace (TraceSeries): A completed trace.

    Returns:
        float: max_t |E(t) + ∫||u_s||^2 - E(0)| / max(E(0), 1e-300).
    """
    frame = trace.frame
    if frame.empty:
        raise ConfigurationError("Energy balance requested on an empty trace")
    E = frame["E"].to_numpy()
    defect = np.abs(E + frame["acc_us"].to_numpy() - E[0])
    return float(np.max(defect) / max(E[0], TINY))


def antiderivative_residual(trace: "TraceSeries", system: "SemidiscreteSystem", u0: Field, u1: Field) -> float:
    """
    Checks the equation solved by w = ∫_0^t u at every stored sample.

    The residual M w_tt + L_h w + V w + w_t - (u0 + u1 - Δu1) uses w_tt = u_t and
    w_t = u read from the state, so no time differencing of w is involved.

    Args:
        trace (TraceSeries): Trace recorded with the antiderivative accumulator.
        system (SemidiscreteSystem): The system the trace was produced with.
        u0 (ndarray): Initial displacement.
        u1 (ndarray): Initial velocity.

    Returns:
        float: Max node-wise residual over samples, scaled by max |source|.
    """
    if not trace.snapshots or trace.snapshots[0].w is None:
        raise ConfigurationError(
            "Antiderivative residual needs flags.antiderivative_check = true"
        )
    grid = system.grid
    source = system.forcing if system.forcing is not None else antiderivative_source(grid, u0, u1)
    scale = float(np.max(np.abs(source)))
    if scale == 0.0:
        return 0.0

    worst = 0.0
    for state in trace.snapshots:
        residual = (
            system.solver.apply(state.v)
            + neg_laplacian(grid, state.w)
            + system.vpot * state.w
            + state.u
            - source
        )
        worst = max(worst, float(np.max(np.abs(residual))))
    return worst / scale


def multiplier_identity_residuals(trace: "TraceSeries") -> dict[str, float]:
    """
    Residuals of the three exact multiplier identities behind the decay proofs.

    The data constants I0^2 = (u0,u1) + (∇u0,∇u1) + ½||u0||^2 and
    B0 = (∇u1,∇u0) - ½||∇u0||^2 + (u1,u0) are read from the first sample.

    Args:
        trace (TraceSeries): A completed trace.

    Returns:
        dict: "u-multiplier", "weighted-energy" and "weighted-u-multiplier" residuals,
        each max over samples and scaled by max(E(0), 1e-300).
    """
    f = trace.frame
    t = f["t"].to_numpy()
    E = f["E"].to_numpy()
    scale = max(E[0], TINY)
    first = f.iloc[0]
    I0sq = first["cross_uv"] + first["cross_grad_uv"] + 0.5 * first["l2u"]
    B0 = first["cross_grad_uv"] - 0.5 * first["gradu"] + first["cross_uv"]

    u_multiplier = (
        f["cross_uv"] + f["cross_grad_uv"] + f["acc_grad_u"] + f["acc_wpot_u"] + 0.5 * f["l2u"]
        - (I0sq + f["acc_us"] + f["acc_grad_us"])
    )
    integral_E = 0.5 * (f["acc_us"] + f["acc_grad_us"] + f["acc_grad_u"] + f["acc_wpot_u"])
    weighted_energy = (1.0 + t) * E + f["acc_w_us"] - (E[0] + integral_E)
    weighted_u_multiplier = (
        0.5 * (1.0 + t) * f["l2u"] + f["acc_w_grad_u"] + f["acc_w_wpot_u"]
        - (
            B0
            - (1.0 + t) * f["cross_uv"]
            + f["acc_w_us"]
            - (1.0 + t) * f["cross_grad_uv"]
            + 0.5 * f["gradu"]
            + f["acc_w_grad_us"]
            + 0.5 * f["acc_u"]
            + 0.5 * f["l2u"]
        )
    )
    return {
        "u-multiplier": float(np.max(np.abs(u_multiplier))) / scale,
        "weighted-energy": float(np.max(np.abs(weighted_energy))) / scale,
        "weighted-u-multiplier": float(np.max(np.abs(weighted_u_multiplier))) / scale,
    }
