"""Grid, stencil operators, banded Helmholtz solve and discrete norms on the truncated line."""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.linalg import cho_solve_banded, cholesky_banded

from src.errors import ConfigurationError, FactorizationError, GridMismatchError

logger = logging.getLogger(__name__)

Field = NDArray[np.float64]
BoundaryRule = Literal["dirichlet", "periodic"]


@dataclass(frozen=True)
class Grid1D:
    """
    Uniform discretization of [-L, L].

    Attributes:
        L (float): Half-width of the domain.
        n (int): Number of unknown nodes.
        h (float): Node spacing.
        bc (str): "dirichlet" (zero values just outside the nodes) or "periodic".
        nodes (ndarray): The n node coordinates, strictly increasing.
    """

    L: float
    n: int
    h: float
    bc: BoundaryRule
    nodes: Field = field(compare=False, repr=False)

    @property
    def edge_midpoints(self) -> Field:
        """Midpoints of the edges used by the difference quotients (n+1 for dirichlet, n for periodic)."""
        if self.bc == "periodic":
            return self.nodes + 0.5 * self.h
        return -self.L + self.h * (np.arange(self.n + 1) + 0.5)

    def check(self, f) -> Field:
        """
        Returns f as a float array after checking that it lives on this grid.

        Raises:
            GridMismatchError: If f is not a 1D array of length n.
        """
        f = np.asarray(f, dtype=np.float64)
        if f.shape != (self.n,):
            raise GridMismatchError(
                f"Field of shape {f.shape} does not match grid with n = {self.n}"
            )
        return f

    def descriptor(self) -> dict:
        return {"L": self.L, "n": self.n, "h": self.h, "bc": self.bc}


def build_grid(L: float, n: int, bc: BoundaryRule = "dirichlet") -> Grid1D:
    """
    Builds the grid of the truncated line [-L, L].

    Args:
        L (float): Half-width of the domain, must be positive.
        n (int): Node count, at least 3.
        bc (str): Boundary rule, "dirichlet" or "periodic".

    Returns:
        Grid1D: dirichlet nodes are -L + i*h (i = 1..n) with h = 2L/(n+1);
        periodic nodes are -L + (i-1)*h with h = 2L/n.
    """
    if not L > 0:
        raise ConfigurationError(f"Domain half-width must be positive, got L = {L}")
    if int(n) != n or n < 3:
        raise ConfigurationError(f"Node count must be an integer >= 3, got n = {n}")
    n = int(n)

    if bc == "dirichlet":
        h = 2.0 * L / (n + 1)
        nodes = -L + h * np.arange(1, n + 1)
    elif bc == "periodic":
        h = 2.0 * L / n
        nodes = -L + h * np.arange(n)
    else:
        raise ConfigurationError(f"Unknown boundary rule: {bc!r}")

    nodes.setflags(write=False)
    return Grid1D(L=float(L), n=n, h=h, bc=bc, nodes=nodes)


def _neighbours(grid: Grid1D, f: Field) -> tuple[Field, Field]:
    if grid.bc == "periodic":
        return np.roll(f, 1), np.roll(f, -1)
    left = np.empty_like(f)
    right = np.empty_like(f)
    left[0] = 0.0
    left[1:] = f[:-1]
    right[-1] = 0.0
    right[:-1] = f[1:]
    return left, right


def neg_laplacian(grid: Grid1D, f: Field) -> Field:
    """
    Applies L_h, the 3-point realization of -Δ.

    Args:
        grid (Grid1D): The grid f lives on.
        f (ndarray): Nodal values.

    Returns:
        ndarray: (2 f_i - f_{i-1} - f_{i+1}) / h^2 with zero or wrap-around neighbours.
    """
    f = grid.check(f)
    left, right = _neighbours(grid, f)
    return (2.0 * f - left - right) / grid.h**2


def edge_differences(grid: Grid1D, f: Field) -> Field:
    """Forward difference quotients (f_{i+1} - f_i)/h over every edge, boundary edges included."""
    f = grid.check(f)
    if grid.bc == "periodic":
        return (np.roll(f, -1) - f) / grid.h
    padded = np.concatenate(([0.0], f, [0.0]))
    return np.diff(padded) / grid.h


def laplacian_matrix(grid: Grid1D) -> sp.csr_matrix:
    """Explicitly assembled sparse L_h (corner entries included for periodic grids)."""
    n, h2 = grid.n, grid.h**2
    off = -np.ones(n - 1) / h2
    matrix = sp.diags([off, 2.0 * np.ones(n) / h2, off], [-1, 0, 1], format="lil")
    if grid.bc == "periodic":
        matrix[0, n - 1] = -1.0 / h2
        matrix[n - 1, 0] = -1.0 / h2
    return matrix.tocsr()


class HelmholtzSolver:
    """
    Factorized M = I + L_h, built once per grid and reused for every solve.

    Dirichlet grids use a banded Cholesky factorization of the tridiagonal
    matrix. Periodic grids factor the tridiagonal part of a rank-one modified
    matrix and restore the corner entries with the Sherman-Morrison formula.

    Attributes:
        grid (Grid1D): The grid the operator is assembled on.
        pivots (ndarray): Diagonal of the Cholesky factor, all positive.
    """

    def __init__(self, grid: Grid1D):
        self.grid = grid
        n, h2 = grid.n, grid.h**2
        diag = np.full(n, 1.0 + 2.0 / h2)
        off = -1.0 / h2

        self._correction = None
        if grid.bc == "periodic":
            gamma = -diag[0]
            diag[0] -= gamma
            diag[-1] -= off * off / gamma
            u = np.zeros(n)
            u[0], u[-1] = gamma, off
            v = np.zeros(n)
            v[0], v[-1] = 1.0, off / gamma

        banded = np.zeros((2, n))
        banded[0, 1:] = off
        banded[1, :] = diag
        try:
            self._factor = cholesky_banded(banded, lower=False)
        except np.linalg.LinAlgError as e:
            raise FactorizationError(f"Factorization of I + L_h failed: {e}") from e

        self.pivots = self._factor[1].copy()
        if not np.all(self.pivots > 0):
            raise FactorizationError("Non-positive pivot in the factorization of I + L_h")

        if grid.bc == "periodic":
            z = self._banded_solve(u)
            self._correction = (v, z, 1.0 + v @ z)

        logger.debug("Factorized I + L_h on %s", grid)

    def _banded_solve(self, b: Field) -> Field:
        return cho_solve_banded((self._factor, False), b, check_finite=False)

    def solve(self, b: Field) -> Field:
        """
        Solves (I + L_h) x = b.

        Args:
            b (ndarray): Right-hand side on the solver's grid.

        Returns:
            ndarray: The solution x = J_h b.
        """
        b = self.grid.check(b)
        y = self._banded_solve(b)
        if self._correction is None:
            return y
        v, z, denominator = self._correction
        return y - z * ((v @ y) / denominator)

    def apply(self, x: Field) -> Field:
        """Applies M = I + L_h."""
        return x + neg_laplacian(self.grid, x)


@lru_cache(maxsize=32)
def helmholtz_solver(grid: Grid1D) -> HelmholtzSolver:
    return HelmholtzSolver(grid)


def solve_helmholtz(grid: Grid1D, b: Field) -> Field:
    """Discrete Yosida resolvent J_h b = (I + L_h)^{-1} b, using the cached factorization of the grid."""
    return helmholtz_solver(grid).solve(b)


def inner(grid: Grid1D, f: Field, g: Field) -> float:
    """Discrete L^2 inner product (f, g)_h = h * sum f_i g_i."""
    f = grid.check(f)
    g = grid.check(g)
    return float(grid.h * np.dot(f, g))


def l2_sq(grid: Grid1D, f: Field) -> float:
    return inner(grid, f, f)


def grad_sq(grid: Grid1D, f: Field) -> float:
    """||∇f||_h^2 in summation-by-parts form; equals (L_h f, f)_h."""
    d = edge_differences(grid, f)
    return float(grid.h * np.dot(d, d))


def lap_sq(grid: Grid1D, f: Field) -> float:
    lf = neg_laplacian(grid, f)
    return float(grid.h * np.dot(lf, lf))


def lapgrad_sq(grid: Grid1D, f: Field) -> float:
    """||Δf_x||_h^2, the edge-difference norm of L_h f."""
    return grad_sq(grid, neg_laplacian(grid, f))


def weighted_grad_sq(grid: Grid1D, f: Field, weight_edges: Field) -> float:
    """h * sum_e w_e (Df)_e^2 with a weight sampled at edge midpoints; nonnegative for w >= 0."""
    d = edge_differences(grid, f)
    return float(grid.h * np.dot(weight_edges, d * d))


class Norms(NamedTuple):
    l2: float
    grad: float
    lap: float


def norms(grid: Grid1D, f: Field) -> Norms:
    """
    Computes ||f||_h, ||∇f||_h and ||Δf||_h.

    Args:
        grid (Grid1D): The grid f lives on.
        f (ndarray): Nodal values.

    Returns:
        Norms: The three (unsquared) norms.
    """
    return Norms(
        l2=float(np.sqrt(l2_sq(grid, f))),
        grad=float(np.sqrt(grad_sq(grid, f))),
        lap=float(np.sqrt(lap_sq(grid, f))),
    )


def discrete_symbol(k: float, h: float) -> float:
    """kappa(k) = 2 sin(kh/2)/h, so that L_h e^{ikx} = kappa^2 e^{ikx} on periodic grids."""
    return 2.0 * np.sin(0.5 * k * h) / h
