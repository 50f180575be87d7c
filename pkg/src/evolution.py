"""The semidiscrete damped wave system, its RK4 integrator and the recorded trace."""

import hashlib
import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from time import time
from typing import TYPE_CHECKING, Literal, Optional

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from src.discrete_line import Field, Grid1D, HelmholtzSolver, build_grid, helmholtz_solver, neg_laplacian
from src.energetics import EnergyRecord, measure
from src.errors import ConfigurationError, IntegrationBlowupError
from src.initial_data import DataSpec, sample_initial_data
from src.potential import PotentialSpec, antiderivative_source

if TYPE_CHECKING:
    from src.config import RunConfig

logger = logging.getLogger(__name__)

# Running integrals carried as extra ODE components, in this order.
ACCUMULATORS = (
    "acc_us",
    "acc_grad_us",
    "acc_lap_us",
    "acc_u",
    "acc_grad_u",
    "acc_wpot_u",
    "acc_lap_u",
    "acc_Estar",
    "acc_w_us",
    "acc_w_grad_us",
    "acc_w_grad_u",
    "acc_w_wpot_u",
)
N_ACC = len(ACCUMULATORS)

NORM_COLUMNS = ("E", "Estar", "l2u", "l2v", "gradu", "gradv", "lapu", "lapv", "wpot")
TRACE_COLUMNS = ("t",) + NORM_COLUMNS + ACCUMULATORS + ("e_balance_residual",)
# Recorded beside the CSV columns for the multiplier identities and the ledger.
EXTRA_COLUMNS = ("wgradpot", "cross_uv", "cross_grad_uv")

RhsForm = Literal["direct", "semigroup"]


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Solution snapshot with the running integrals.

    Attributes:
        u (ndarray): Displacement.
        v (ndarray): Velocity u_t.
        acc (ndarray): The 12 accumulators, ordered as ACCUMULATORS.
        t (float): Time of the snapshot.
        w (ndarray | None): Antiderivative ∫_0^t u, only tracked when requested.
    """

    u: Field
    v: Field
    acc: NDArray[np.float64] = field(default_factory=lambda: np.zeros(N_ACC))
    t: float = 0.0
    w: Optional[Field] = None

    @classmethod
    def initial(cls, u0: Field, u1: Field, track_antiderivative: bool = False) -> "StateVector":
        u0 = np.array(u0, dtype=np.float64)
        u1 = np.array(u1, dtype=np.float64)
        w = np.zeros_like(u0) if track_antiderivative else None
        return cls(u=u0, v=u1, acc=np.zeros(N_ACC), t=0.0, w=w)

    def pack(self) -> NDArray[np.float64]:
        parts = [self.u, self.v, self.acc]
        if self.w is not None:
            parts.append(self.w)
        return np.concatenate(parts)

    @classmethod
    def unpack(cls, y: NDArray[np.float64], n: int, t: float, with_w: bool) -> "StateVector":
        y = y.copy()
        w = y[2 * n + N_ACC :] if with_w else None
        return cls(u=y[:n], v=y[n : 2 * n], acc=y[2 * n : 2 * n + N_ACC], t=t, w=w)


class RightHandSide(ABC):
    """
    A realization of the acceleration v' of the semidiscrete system.

    Methods:
        acceleration: Returns v' given u, v and the precomputed L_h u and V u.
    """

    name: str

    @abstractmethod
    def acceleration(self, solver: HelmholtzSolver, u: Field, v: Field, Lu: Field, Vu: Field) -> Field:
        """
        Evaluates v'.

        Args:
            solver (HelmholtzSolver): Factorized I + L_h.
            u (ndarray): Displacement.
            v (ndarray): Velocity.
            Lu (ndarray): L_h u.
            Vu (ndarray): V u (nodewise).

        Returns:
            ndarray: The acceleration.
        """
        pass


class DirectRHS(RightHandSide):
    """v' = M^{-1}(-L_h u - V u - v) with M = I + L_h."""

    name = "direct"

    def acceleration(self, solver, u, v, Lu, Vu):
        return solver.solve(-(Lu + Vu + v))


class SemigroupRHS(RightHandSide):
    """v' = -u + J_h u - J_h(V u) - J_h v, the generator form with J_h = (I + L_h)^{-1}."""

    name = "semigroup"

    def acceleration(self, solver, u, v, Lu, Vu):
        return -u + solver.solve(u - Vu - v)


RHS_FORMS: dict[str, RightHandSide] = {"direct": DirectRHS(), "semigroup": SemigroupRHS()}


@dataclass(frozen=True, eq=False)
class SemidiscreteSystem:
    """
    M u'' + L_h u + V u + u' = 0, with M = I + L_h factorized once.

    Attributes:
        grid (Grid1D): The grid.
        potential (PotentialSpec): The potential.
        vpot (ndarray): V at the nodes.
        vpot_edges (ndarray): V at the edge midpoints.
        solver (HelmholtzSolver): Factorization of M.
        rhs (RightHandSide): Direct or semigroup realization of the acceleration.
        forcing (ndarray | None): Constant source u0 + u1 - Δu1 of the equation
            satisfied by w = ∫u. Set only when w is tracked; it never drives (u, v).
    """

    grid: Grid1D
    potential: PotentialSpec
    vpot: Field
    vpot_edges: Field
    solver: HelmholtzSolver
    rhs: RightHandSide
    forcing: Optional[Field] = None

    def acceleration(self, u: Field, v: Field, Lu: Optional[Field] = None) -> Field:
        if Lu is None:
            Lu = neg_laplacian(self.grid, u)
        return self.rhs.acceleration(self.solver, u, v, Lu, self.vpot * u)

    def derivative(self, t: float, y: NDArray[np.float64], with_w: bool) -> NDArray[np.float64]:
        """
        Time derivative of the packed extended state [u, v, acc, (w)].

        The accumulator derivatives are the integrands evaluated at the stage
        state, with (1 + t) weights taken from the stage time.
        """
        n, h = self.grid.n, self.grid.h
        u = y[:n]
        v = y[n : 2 * n]
        Lu = neg_laplacian(self.grid, u)
        Lv = neg_laplacian(self.grid, v)
        Vu = self.vpot * u

        dy = np.empty_like(y)
        dy[:n] = v
        dy[n : 2 * n] = self.acceleration(u, v, Lu)

        l2v = h * np.dot(v, v)
        gradv = h * np.dot(v, Lv)
        lapv = h * np.dot(Lv, Lv)
        l2u = h * np.dot(u, u)
        gradu = h * np.dot(u, Lu)
        wpot = h * np.dot(Vu, u)
        lapu = h * np.dot(Lu, Lu)
        weight = 1.0 + t

        dy[2 * n : 2 * n + N_ACC] = (
            l2v,
            gradv,
            lapv,
            l2u,
            gradu,
            wpot,
            lapu,
            0.5 * (gradv + lapv + lapu),
            weight * l2v,
            weight * gradv,
            weight * gradu,
            weight * wpot,
        )
        if with_w:
            dy[2 * n + N_ACC :] = u
        return dy


def assemble_system(
    grid: Grid1D,
    spec: PotentialSpec,
    rhs: RhsForm = "direct",
    forcing: Optional[Field] = None,
) -> SemidiscreteSystem:
    """
    Assembles the semidiscrete system for a grid and a potential.

    Args:
        grid (Grid1D): The grid.
        spec (PotentialSpec): The potential.
        rhs (str): "direct" or "semigroup".
        forcing (ndarray, optional): Source of the antiderivative equation.

    Returns:
        SemidiscreteSystem: The system, sharing the cached factorization of the grid.
    """
    if rhs not in RHS_FORMS:
        raise ConfigurationError(f"Unknown right-hand side form: {rhs!r}")
    V_nodes, V_edges = spec.on_grid(grid)
    if forcing is not None:
        forcing = grid.check(forcing)
    return SemidiscreteSystem(
        grid=grid,
        potential=spec,
        vpot=V_nodes,
        vpot_edges=V_edges,
        solver=helmholtz_solver(grid),
        rhs=RHS_FORMS[rhs],
        forcing=forcing,
    )


def direct_rhs(system: SemidiscreteSystem, state: StateVector) -> tuple[Field, Field]:
    """(u', v') with the direct acceleration M^{-1}(-L_h u - V u - v)."""
    u, v = system.grid.check(state.u), system.grid.check(state.v)
    Lu = neg_laplacian(system.grid, u)
    return v.copy(), RHS_FORMS["direct"].acceleration(system.solver, u, v, Lu, system.vpot * u)


def semigroup_rhs(system: SemidiscreteSystem, state: StateVector) -> tuple[Field, Field]:
    """
    Evaluates the generator form of the right-hand side.

    Args:
        system (SemidiscreteSystem): The system.
        state (StateVector): State on the system's grid.

    Returns:
        tuple: (du, dv) with du = v and dv = -u + J_h u - J_h(V u) - J_h v.
    """
    u, v = system.grid.check(state.u), system.grid.check(state.v)
    Lu = neg_laplacian(system.grid, u)
    return v.copy(), RHS_FORMS["semigroup"].acceleration(system.solver, u, v, Lu, system.vpot * u)


def _rk4_update(system: SemidiscreteSystem, t: float, y, dt: float, with_w: bool):
    k1 = system.derivative(t, y, with_w)
    k2 = system.derivative(t + 0.5 * dt, y + 0.5 * dt * k1, with_w)
    k3 = system.derivative(t + 0.5 * dt, y + 0.5 * dt * k2, with_w)
    k4 = system.derivative(t + dt, y + dt * k3, with_w)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(system: SemidiscreteSystem, state: StateVector, dt: float) -> StateVector:
    """
    Advances the extended state by one classical RK4 step.

    Args:
        system (SemidiscreteSystem): The system.
        state (StateVector): Current state.
        dt (float): Time step, positive.

    Returns:
        StateVector: The state at t + dt.

    Raises:
        IntegrationBlowupError: If the new state is not finite.
    """
    if not dt > 0:
        raise ConfigurationError(f"Time step must be positive, got dt = {dt}")
    with_w = state.w is not None
    y = _rk4_update(system, state.t, state.pack(), dt, with_w)
    t = state.t + dt
    if not np.all(np.isfinite(y)):
        raise IntegrationBlowupError(t)
    return StateVector.unpack(y, system.grid.n, t, with_w)


@dataclass
class TraceSeries:
    """
    Time series of every tracked norm and running integral of one run.

    Attributes:
        frame (DataFrame): One row per sample, columns TRACE_COLUMNS then EXTRA_COLUMNS.
        metadata (dict): Grid, potential and data descriptors, provenance digest, warnings.
        snapshots (list[StateVector]): Full states at the samples, kept only for the
            antiderivative check.
    """

    frame: pd.DataFrame
    metadata: dict = field(default_factory=dict)
    snapshots: list[StateVector] = field(default_factory=list)

    @property
    def times(self) -> NDArray[np.float64]:
        return self.frame["t"].to_numpy()

    @property
    def warnings(self) -> list[str]:
        return self.metadata.setdefault("warnings", [])

    def csv_frame(self) -> pd.DataFrame:
        return self.frame.loc[:, list(TRACE_COLUMNS)]

    def __len__(self) -> int:
        return len(self.frame)


@dataclass(frozen=True, eq=False)
class RunSetup:
    """Everything derived from a run configuration before time stepping."""

    grid: Grid1D
    potential: PotentialSpec
    data: DataSpec
    u0: Field
    u1: Field
    system: SemidiscreteSystem


def provenance_digest(grid: Grid1D, spec: PotentialSpec, u0: Field, u1: Field) -> str:
    """sha256 over the grid and potential descriptors and the sampled initial data."""
    digest = hashlib.sha256()
    digest.update(json.dumps({"grid": grid.descriptor(), "potential": spec.descriptor()}, sort_keys=True).encode())
    digest.update(np.ascontiguousarray(u0, dtype=np.float64).tobytes())
    digest.update(np.ascontiguousarray(u1, dtype=np.float64).tobytes())
    return digest.hexdigest()


def prepare_run(config: "RunConfig") -> RunSetup:
    """
    Builds the grid, samples the data and assembles the system of a configuration.

    Args:
        config (RunConfig): Validated run configuration.

    Returns:
        RunSetup: The assembled run inputs.
    """
    grid = build_grid(config.domain.L, config.domain.n, config.domain.bc)
    u0, u1 = sample_initial_data(grid, config.data)
    forcing = antiderivative_source(grid, u0, u1) if config.flags.antiderivative_check else None
    rhs = "semigroup" if config.flags.semigroup_rhs else "direct"
    system = assemble_system(grid, config.potential, rhs=rhs, forcing=forcing)
    if forcing is not None:
        logger.debug("Tracking the antiderivative of u, source max %.3e", np.max(np.abs(forcing)))
    return RunSetup(grid=grid, potential=config.potential, data=config.data, u0=u0, u1=u1, system=system)


def _record_row(record: EnergyRecord, acc, e0: float) -> dict:
    row = {"t": record.t}
    for name in NORM_COLUMNS:
        row[name] = getattr(record, name)
    row.update(zip(ACCUMULATORS, acc))
    row["e_balance_residual"] = abs(record.E + acc[0] - e0) / max(e0, 1e-300)
    for name in EXTRA_COLUMNS:
        row[name] = getattr(record, name)
    return row


def truncation_warning(config: "RunConfig") -> Optional[str]:
    """Returns a warning when the dirichlet domain is too short for the run length."""
    if config.domain.bc != "dirichlet":
        return None
    needed = config.data.support_radius(config.domain.L) + config.time.T + 10.0
    if config.domain.L < needed:
        return (
            f"Domain half-width L = {config.domain.L:g} is below data radius + T + 10 = "
            f"{needed:g}; truncation may pollute the late-time decay"
        )
    return None


def _monotone_energy_warning(frame: pd.DataFrame) -> Optional[str]:
    E = frame["E"].to_numpy()
    if len(E) < 2:
        return None
    e0 = max(E[0], 1e-300)
    slack = 2.0 * frame["e_balance_residual"].max() * e0 + 1e-14 * e0
    rise = np.diff(E)
    if np.max(rise) > slack:
        k = int(np.argmax(rise)) + 1
        return (
            f"Energy increased by {rise[k - 1]:.3e} at t = {frame['t'].iloc[k]:.6g}, "
            f"beyond the energy-balance slack {slack:.3e}"
        )
    return None


def simulate(config: "RunConfig", setup: Optional[RunSetup] = None) -> TraceSeries:
    """
    Integrates the configured problem from t = 0 to T with fixed steps.

    Args:
        config (RunConfig): Validated run configuration.
        setup (RunSetup, optional): Prebuilt run inputs, built from config when omitted.

    Returns:
        TraceSeries: Samples every `time.sample_every` steps plus the final step.

    Raises:
        IntegrationBlowupError: If a step produces a non-finite state.
    """
    start = time()
    if setup is None:
        setup = prepare_run(config)
    grid, system = setup.grid, setup.system
    dt, T, every = config.time.dt, config.time.T, config.time.sample_every

    n_steps = int(round(T / dt))
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * T:
        raise ConfigurationError(f"time.T = {T} is not an integer multiple of time.dt = {dt}")

    with_w = config.flags.antiderivative_check
    state = StateVector.initial(setup.u0, setup.u1, track_antiderivative=with_w)
    y = state.pack()
    n = grid.n

    metadata = {
        "grid": grid.descriptor(),
        "potential": setup.potential.descriptor(),
        "data": setup.data.descriptor(),
        "time": {"dt": dt, "T": T, "sample_every": every, "steps": n_steps},
        "rhs": system.rhs.name,
        "provenance": provenance_digest(grid, setup.potential, setup.u0, setup.u1),
        "warnings": [],
    }
    warning = truncation_warning(config)
    if warning:
        logger.warning(warning)
        metadata["warnings"].append(warning)

    first = measure(grid, system.vpot, system.vpot_edges, setup.u0, setup.u1, 0.0)
    e0 = first.E
    rows = [_record_row(first, state.acc, e0)]
    snapshots = [state] if with_w else []

    logger.info("Integrating %d steps of dt = %g on %d nodes (%s rhs)", n_steps, dt, n, system.rhs.name)
    for k in range(1, n_steps + 1):
        t_prev = (k - 1) * dt
        y = _rk4_update(system, t_prev, y, dt, with_w)
        t = k * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationBlowupError(t)
        if k % every == 0 or k == n_steps:
            u, v = y[:n], y[n : 2 * n]
            acc = y[2 * n : 2 * n + N_ACC]
            rows.append(_record_row(measure(grid, system.vpot, system.vpot_edges, u, v, t), acc, e0))
            if with_w:
                snapshots.append(StateVector.unpack(y, n, t, with_w))

    frame = pd.DataFrame(rows, columns=list(TRACE_COLUMNS + EXTRA_COLUMNS))
    warning = _monotone_energy_warning(frame)
    if warning:
        logger.warning(warning)
        metadata["warnings"].append(warning)

    end = time()
    logger.info(f"Time to simulate: {end - start:.2f}s")
    return TraceSeries(frame=frame, metadata=metadata, snapshots=snapshots)


def fourier_mode_oracle(k: float, V0: float, t: float, a0: float, a1: float) -> tuple[float, float]:
    """
    Closed-form amplitude of one Fourier mode under constant V.

    The amplitude solves (1 + k^2) a'' + a' + (k^2 + V0) a = 0. Pass the discrete
    symbol kappa(k) to compare with a periodic grid, the exact wavenumber otherwise.

    Args:
        k (float): Wavenumber (or discrete symbol).
        V0 (float): Constant potential.
        t (float): Time.
        a0 (float): a(0).
        a1 (float): a'(0).

    Returns:
        tuple: (a(t), a'(t)).
    """
    mass = 1.0 + k * k
    stiffness = k * k + V0
    disc = 1.0 - 4.0 * mass * stiffness
    sigma = -0.5 / mass

    if abs(disc) <= 1e-14 * max(1.0, 4.0 * mass * stiffness):
        growth = np.exp(sigma * t)
        slope = a1 - sigma * a0
        a = (a0 + slope * t) * growth
        return float(a), float(slope * growth + sigma * a)

    if disc < 0:
        omega = np.sqrt(-disc) / (2.0 * mass)
        growth = np.exp(sigma * t)
        c, s = np.cos(omega * t), np.sin(omega * t)
        b = (a1 - sigma * a0) / omega
        a = growth * (a0 * c + b * s)
        adot = sigma * a + growth * omega * (b * c - a0 * s)
        return float(a), float(adot)

    root = np.sqrt(disc) / (2.0 * mass)
    r1, r2 = sigma + root, sigma - root
    c1 = (a1 - r2 * a0) / (r1 - r2)
    c2 = a0 - c1
    e1, e2 = np.exp(r1 * t), np.exp(r2 * t)
    return float(c1 * e1 + c2 * e2), float(r1 * c1 * e1 + r2 * c2 * e2)
