"""Discrete checks of the semigroup formulation: skew generator, bounded perturbation, Yosida identities."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel
from scipy.sparse.linalg import splu

from src.discrete_line import Field, Grid1D, helmholtz_solver, inner, laplacian_matrix, neg_laplacian
from src.evolution import StateVector, assemble_system, direct_rhs, semigroup_rhs
from src.potential import PotentialSpec

logger = logging.getLogger(__name__)

SKEW_TOL = 1e-12
YOSIDA_TOL = 1e-12
RESOLVENT_TOL = 1e-13
RHS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """A point (u, v) of the phase space H^2 x H^2."""

    u: Field
    v: Field

    def __add__(self, other: "PhaseVector") -> "PhaseVector":
        return PhaseVector(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "PhaseVector") -> "PhaseVector":
        return PhaseVector(self.u - other.u, self.v - other.v)


def h2_inner(grid: Grid1D, f: Field, g: Field) -> float:
    """(f, g)_{H^2,h} = (f, g)_h + (L_h f, L_h g)_h."""
    return inner(grid, f, g) + inner(grid, neg_laplacian(grid, f), neg_laplacian(grid, g))


def phase_inner(grid: Grid1D, a: PhaseVector, b: PhaseVector) -> float:
    return h2_inner(grid, a.u, b.u) + h2_inner(grid, a.v, b.v)


def phase_norm(grid: Grid1D, a: PhaseVector) -> float:
    return float(np.sqrt(phase_inner(grid, a, a)))


def apply_A(grid: Grid1D, pv: PhaseVector) -> PhaseVector:
    """
    Applies the skew part of the generator.

    Args:
        grid (Grid1D): The grid.
        pv (PhaseVector): (u, v) on the grid.

    Returns:
        PhaseVector: (v, -u), since J_h (I + L_h) u = u.
    """
    u, v = grid.check(pv.u), grid.check(pv.v)
    return PhaseVector(v.copy(), -u)


def apply_LV_F(grid: Grid1D, spec: PotentialSpec, pv: PhaseVector) -> PhaseVector:
    """
    Applies the bounded part of the generator, potential and damping together.

    The potential enters as -J_h(V u), which makes A + (this map) equal to the
    semigroup right-hand side.

    Args:
        grid (Grid1D): The grid.
        spec (PotentialSpec): The potential.
        pv (PhaseVector): (u, v) on the grid.

    Returns:
        PhaseVector: (0, -J_h(V u) - J_h(v - u)).
    """
    u, v = grid.check(pv.u), grid.check(pv.v)
    solver = helmholtz_solver(grid)
    V_nodes = spec.on_grid(grid)[0]
    return PhaseVector(np.zeros(grid.n), -solver.solve(V_nodes * u) - solver.solve(v - u))


def check_resolvent_surjectivity(grid: Grid1D, rhs: PhaseVector) -> PhaseVector:
    """Solves (I - A) U = G in block form: u = (f + g)/2, v = (g - f)/2."""
    f, g = grid.check(rhs.u), grid.check(rhs.v)
    return PhaseVector(0.5 * (f + g), 0.5 * (g - f))


def estimate_LV_norm(grid: Grid1D, spec: PotentialSpec, iterations: int = 500, seed: int = 0) -> float:
    """
    Power iteration for the norm of U -> (0, -J_h(V u)) in the H^2 x H^2 norm.

    With Gram matrix G = I + L_h^2 and B = J_h diag(V), the squared norm is the
    top eigenvalue of G^{-1} B^T G B.

    Args:
        grid (Grid1D): The grid.
        spec (PotentialSpec): The potential.
        iterations (int): Iteration cap.
        seed (int): Seed of the random start.

    Returns:
        float: The estimated operator norm.
    """
    L = laplacian_matrix(grid)
    gram = (sp.identity(grid.n, format="csr") + L @ L).tocsc()
    gram_lu = splu(gram)
    solver = helmholtz_solver(grid)
    V_nodes = spec.on_grid(grid)[0]

    x = np.random.default_rng(seed).standard_normal(grid.n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        y = gram_lu.solve(V_nodes * solver.solve(gram @ solver.solve(V_nodes * x)))
        size = np.linalg.norm(y)
        if size == 0.0:
            return 0.0
        previous, estimate = estimate, float(x @ (gram @ y)) / float(x @ (gram @ x))
        x = y / size
        if abs(estimate - previous) <= 1e-12 * max(estimate, 1e-300):
            break
    return float(np.sqrt(max(estimate, 0.0)))


class AppendixReport(BaseModel):
    """Worst cases of the semigroup checks over the random states."""

    n_random: int
    seed: int
    skew: float
    yosida_identity: float
    yosida_contraction: float
    resolvent_residual: float
    rhs_agreement: float
    generator_residual: float
    lv_norm: float
    lv_norm_bound: float

    @property
    def passed(self) -> bool:
        return (
            self.skew <= SKEW_TOL
            and self.yosida_identity <= YOSIDA_TOL
            and self.yosida_contraction <= 1.0
            and self.resolvent_residual <= RESOLVENT_TOL
            and self.rhs_agreement <= RHS_TOL
            and self.generator_residual <= RHS_TOL
            and self.lv_norm <= self.lv_norm_bound
        )


def _relative(a: Field, b: Field, scale: float) -> float:
    return float(np.max(np.abs(a - b))) / max(scale, 1e-300)


def run_appendix_checks(grid: Grid1D, spec: PotentialSpec, n_random: int = 100, seed: int = 0) -> AppendixReport:
    """
    Runs every semigroup check on seeded random states.

    Args:
        grid (Grid1D): The grid.
        spec (PotentialSpec): The potential.
        n_random (int): Number of random states.
        seed (int): Seed of the generator.

    Returns:
        AppendixReport: Maximum residual of each check.
    """
    rng = np.random.default_rng(seed)
    solver = helmholtz_solver(grid)
    system = assemble_system(grid, spec)
    n = grid.n

    skew = yosida = contraction = resolvent = agreement = generator = 0.0
    for _ in range(n_random):
        U = PhaseVector(rng.standard_normal(n), rng.standard_normal(n))
        skew = max(skew, abs(phase_inner(grid, apply_A(grid, U), U)) / phase_inner(grid, U, U))

        w = rng.standard_normal(n)
        Jw = solver.solve(w)
        yosida = max(yosida, _relative(neg_laplacian(grid, Jw), w - Jw, np.max(np.abs(w))))
        contraction = max(contraction, np.sqrt(inner(grid, Jw, Jw) / inner(grid, w, w)))

        G = PhaseVector(rng.standard_normal(n), rng.standard_normal(n))
        X = check_resolvent_surjectivity(grid, G)
        back = X - apply_A(grid, X)
        scale = max(np.max(np.abs(G.u)), np.max(np.abs(G.v)))
        resolvent = max(resolvent, _relative(back.u, G.u, scale), _relative(back.v, G.v, scale))

        state = StateVector(u=U.u, v=U.v)
        _, dv_semigroup = semigroup_rhs(system, state)
        _, dv_direct = direct_rhs(system, state)
        agreement = max(agreement, _relative(dv_semigroup, dv_direct, np.max(np.abs(dv_direct))))

        generated = apply_A(grid, U) + apply_LV_F(grid, spec, U)
        generator = max(
            generator,
            _relative(generated.u, U.v, np.max(np.abs(U.v))),
            _relative(generated.v, dv_semigroup, np.max(np.abs(dv_semigroup))),
        )

    Vinf = spec.impl.sup_norms(spec.V0, spec.alpha)[0]
    report = AppendixReport(
        n_random=n_random,
        seed=seed,
        skew=skew,
        yosida_identity=yosida,
        yosida_contraction=contraction,
        resolvent_residual=resolvent,
        rhs_agreement=agreement,
        generator_residual=generator,
        lv_norm=estimate_LV_norm(grid, spec, seed=seed),
        lv_norm_bound=3.0 * (1.0 + Vinf),
    )
    logger.info("Semigroup checks on %d random states: passed = %s", n_random, report.passed)
    return report
