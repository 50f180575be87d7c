from abc import ABC, abstractmethod
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as ModelField

from src.discrete_line import Field, Grid1D, neg_laplacian
from src.errors import PotentialValidationError

# Nodal minimum below which 1/sqrt(V) is treated as undefined.
V_FLOOR = 1e-300
FINE_SAMPLING = 16

PotentialFamilyName = Literal["algebraic", "constant", "gaussian", "zero"]


class PotentialFamily(ABC):
    """
    A family of potentials parametrized by an amplitude V0 and an exponent alpha.

    Methods:
        evaluate: Returns V, V' and V'' at the given coordinates.
        sup_norms: Returns ||V||_inf, ||V'||_inf and ||V''||_inf.
        ratio_sup: Returns sup |V'(x)|/V(x) over the grid's extent.
    """

    @abstractmethod
    def evaluate(self, x, V0: float, alpha: float) -> tuple:
        pass

    @abstractmethod
    def sup_norms(self, V0: float, alpha: float) -> tuple[float, float, float]:
        pass

    def ratio_sup(self, V0: float, alpha: float, grid: Grid1D) -> float:
        """
        Estimates sup |V'|/V by sampling at 16x the grid resolution.

        Args:
            V0 (float): Amplitude.
            alpha (float): Exponent.
            grid (Grid1D): Grid whose extent [-L, L] is sampled.

        Returns:
            float: The sampled supremum (inf if V vanishes at a sample).
        """
        x = np.linspace(-grid.L, grid.L, FINE_SAMPLING * (grid.n + 1) + 1)
        V, Vp, _ = self.evaluate(x, V0, alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(Vp) / V
        ratio = np.where(np.isnan(ratio), np.inf, ratio)
        return float(np.max(ratio))


class AlgebraicPotential(PotentialFamily):
    """V(x) = V0 (1 + x^2)^(-alpha/2), the short-range family with |V'| <= alpha V."""

    def evaluate(self, x, V0, alpha):
        x = np.asarray(x, dtype=np.float64)
        r = 1.0 + x * x
        V = V0 * r ** (-0.5 * alpha)
        Vp = -V0 * alpha * x * r ** (-0.5 * alpha - 1.0)
        Vpp = V0 * alpha * r ** (-0.5 * alpha - 2.0) * ((alpha + 1.0) * x * x - 1.0)
        return V, Vp, Vpp

    def sup_norms(self, V0, alpha):
        # |V'| peaks at x^2 = 1/(alpha+1); |V''| is the larger of its value at
        # x = 0 and at the positive critical point s* of (1+s)^-q ((alpha+1)s - 1).
        x1 = 1.0 / np.sqrt(alpha + 1.0)
        V1inf = V0 * alpha * x1 * (1.0 + x1 * x1) ** (-0.5 * alpha - 1.0)

        q = 0.5 * alpha + 2.0
        s = (alpha + 1.0 + q) / ((alpha + 1.0) * (q - 1.0))
        lobe = (1.0 + s) ** (-q) * ((alpha + 1.0) * s - 1.0)
        V2inf = V0 * alpha * max(1.0, abs(lobe))
        return float(V0), float(V1inf), float(V2inf)

    def ratio_sup(self, V0, alpha, grid):
        # |V'|/V = alpha |x| / (1 + x^2), maximal at |x| = 1.
        return 0.5 * alpha if grid.L >= 1.0 else alpha * grid.L / (1.0 + grid.L**2)


class ConstantPotential(PotentialFamily):
    """V(x) = V0."""

    def evaluate(self, x, V0, alpha):
        x = np.asarray(x, dtype=np.float64)
        return np.full_like(x, V0), np.zeros_like(x), np.zeros_like(x)

    def sup_norms(self, V0, alpha):
        return float(V0), 0.0, 0.0

    def ratio_sup(self, V0, alpha, grid):
        return 0.0


class GaussianPotential(PotentialFamily):
    """V(x) = V0 exp(-x^2). |V'|/V = 2|x| is unbounded, so no alpha bounds it."""

    def evaluate(self, x, V0, alpha):
        x = np.asarray(x, dtype=np.float64)
        V = V0 * np.exp(-x * x)
        return V, -2.0 * x * V, (4.0 * x * x - 2.0) * V

    def sup_norms(self, V0, alpha):
        return float(V0), float(V0 * np.sqrt(2.0) * np.exp(-0.5)), float(2.0 * V0)


class ZeroPotential(PotentialFamily):
    """V = 0, the potential-free baseline. Never passes validation."""

    def evaluate(self, x, V0, alpha):
        x = np.asarray(x, dtype=np.float64)
        return np.zeros_like(x), np.zeros_like(x), np.zeros_like(x)

    def sup_norms(self, V0, alpha):
        return 0.0, 0.0, 0.0

    def ratio_sup(self, V0, alpha, grid):
        return 0.0


FAMILIES: dict[str, PotentialFamily] = {
    "algebraic": AlgebraicPotential(),
    "constant": ConstantPotential(),
    "gaussian": GaussianPotential(),
    "zero": ZeroPotential(),
}


class PotentialSpec(BaseModel):
    """
    A potential family with its parameters.

    Attributes:
        family (str): "algebraic", "constant", "gaussian" or "zero".
        V0 (float): Amplitude, positive except for the zero family.
        alpha (float): Decay exponent of |V'| <= alpha V, used in every ledger constant.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: PotentialFamilyName = "algebraic"
    V0: float = ModelField(default=0.5, ge=0.0)
    alpha: float = ModelField(default=1.0, gt=0.0)

    @property
    def impl(self) -> PotentialFamily:
        return FAMILIES[self.family]

    def evaluate(self, x):
        return self.impl.evaluate(x, self.V0, self.alpha)

    def on_grid(self, grid: Grid1D) -> tuple[Field, Field]:
        """Returns V sampled at the nodes and at the edge midpoints."""
        V_nodes = self.evaluate(grid.nodes)[0]
        V_edges = self.evaluate(grid.edge_midpoints)[0]
        return V_nodes, V_edges

    def descriptor(self) -> dict:
        return self.model_dump()


class ValidationResult(BaseModel):
    ok: bool
    family: str
    alpha: float
    alpha_eff: float
    Vinf: float
    V1inf: float
    V2inf: float
    smallness: float
    reasons: list[str] = []


def eval_potential(spec: PotentialSpec, x) -> tuple:
    """
    Evaluates V, V' and V'' of the family in closed form.

    Args:
        spec (PotentialSpec): The potential.
        x (float or ndarray): Coordinates.

    Returns:
        tuple: (V, Vp, Vpp) with the shape of x.
    """
    V, Vp, Vpp = spec.evaluate(x)
    if np.ndim(V) == 0:
        return float(V), float(Vp), float(Vpp)
    return V, Vp, Vpp


def validate_V1(spec: PotentialSpec, grid: Grid1D) -> ValidationResult:
    """
    Checks |V'| <= alpha V pointwise and the smallness condition alpha^2 ||V||_inf < 1.

    Args:
        spec (PotentialSpec): The potential to check.
        grid (Grid1D): Grid on which positivity is checked.

    Returns:
        ValidationResult: ok is true iff V > 0 at every node, alpha_eff <= alpha
        and alpha^2 ||V||_inf < 1.
    """
    Vinf, V1inf, V2inf = spec.impl.sup_norms(spec.V0, spec.alpha)
    alpha_eff = spec.impl.ratio_sup(spec.V0, spec.alpha, grid)
    smallness = spec.alpha**2 * Vinf

    reasons = []
    V_nodes = spec.evaluate(grid.nodes)[0]
    if not np.min(V_nodes) > 0:
        reasons.append("V is not positive at every node")
    elif np.min(V_nodes) < V_FLOOR:
        reasons.append(f"nodal minimum of V is below {V_FLOOR:g}")
    if not alpha_eff <= spec.alpha:
        reasons.append(
            f"|V'|/V reaches {alpha_eff:.6g} > alpha = {spec.alpha:.6g}"
        )
    if not smallness < 1.0:
        reasons.append(f"alpha^2 ||V||_inf = {smallness:.6g} is not < 1")

    return ValidationResult(
        ok=not reasons,
        family=spec.family,
        alpha=spec.alpha,
        alpha_eff=alpha_eff,
        Vinf=Vinf,
        V1inf=V1inf,
        V2inf=V2inf,
        smallness=smallness,
        reasons=reasons,
    )


def weighted_data_norm(grid: Grid1D, spec: PotentialSpec, u0: Field, u1: Field) -> float:
    """
    Computes ||(u0 + u1 - Δu1)/sqrt(V)||_h, the data norm entering the decay constants.

    Args:
        grid (Grid1D): The grid.
        spec (PotentialSpec): The potential.
        u0 (ndarray): Initial displacement.
        u1 (ndarray): Initial velocity.

    Returns:
        float: The discrete weighted L^2 norm.
    """
    source = antiderivative_source(grid, u0, u1)
    V_nodes = spec.evaluate(grid.nodes)[0]
    if not np.min(V_nodes) >= V_FLOOR:
        raise PotentialValidationError(
            "Weighted data norm undefined: nodal minimum of V is below "
            f"{V_FLOOR:g}"
        )
    return float(np.sqrt(grid.h * np.sum(source * source / V_nodes)))


def antiderivative_source(grid: Grid1D, u0: Field, u1: Field) -> Field:
    """The constant source u0 + u1 - Δu1 of the equation satisfied by w = ∫u."""
    return grid.check(u0) + grid.check(u1) + neg_laplacian(grid, u1)
