from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as ModelField

from src.discrete_line import Field, Grid1D

# Gaussian tails are below 1e-16 of the peak beyond this many sigmas.
GAUSSIAN_RADIUS_SIGMAS = float(np.sqrt(2.0 * np.log(1e16)))


class DataSpec(BaseModel):
    """
    Initial data (u0, u1) of the Cauchy problem.

    Attributes:
        family (str): u0 family, "bump", "gaussian", "zero" or "fourier-mode".
        amplitude (float): Peak scale A of u0 (and of the u1 gaussian-derivative).
        radius (float): Support radius R of the bump.
        sigma (float): Width of the gaussian families.
        k (int): Mode number m of the fourier-mode family, wavenumber pi*m/L.
        u1 (str): "zero" or "gaussian-derivative".
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["bump", "gaussian", "zero", "fourier-mode"] = "bump"
    amplitude: float = 1.0
    radius: float = ModelField(default=5.0, gt=0.0)
    sigma: float = ModelField(default=1.0, gt=0.0)
    k: int = ModelField(default=1, ge=0)
    u1: Literal["zero", "gaussian-derivative"] = "zero"

    def support_radius(self, L: float) -> float:
        """Radius outside which the data vanish to double precision."""
        if self.family == "bump":
            radius = self.radius
        elif self.family == "gaussian":
            radius = GAUSSIAN_RADIUS_SIGMAS * self.sigma
        elif self.family == "fourier-mode":
            radius = L
        else:
            radius = 0.0
        if self.u1 == "gaussian-derivative":
            radius = max(radius, GAUSSIAN_RADIUS_SIGMAS * self.sigma)
        return radius

    def wavenumber(self, L: float) -> float:
        return np.pi * self.k / L

    def descriptor(self) -> dict:
        return self.model_dump()


def bump(x, amplitude: float, radius: float):
    """A * exp(-1/(1 - (x/R)^2)) for |x| < R, zero outside."""
    x = np.asarray(x, dtype=np.float64)
    s = x / radius
    inside = np.abs(s) < 1.0
    out = np.zeros_like(x)
    out[inside] = amplitude * np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def gaussian(x, amplitude: float, sigma: float):
    x = np.asarray(x, dtype=np.float64)
    return amplitude * np.exp(-0.5 * (x / sigma) ** 2)


def gaussian_derivative(x, amplitude: float, sigma: float):
    x = np.asarray(x, dtype=np.float64)
    return -amplitude * x / sigma**2 * np.exp(-0.5 * (x / sigma) ** 2)


def sample_initial_data(grid: Grid1D, data: DataSpec) -> tuple[Field, Field]:
    """
    Samples the configured initial data on the grid nodes.

    Args:
        grid (Grid1D): Target grid.
        data (DataSpec): Data family and parameters.

    Returns:
        tuple: (u0, u1) as nodal arrays.
    """
    x = grid.nodes
    if data.family == "bump":
        u0 = bump(x, data.amplitude, data.radius)
    elif data.family == "gaussian":
        u0 = gaussian(x, data.amplitude, data.sigma)
    elif data.family == "fourier-mode":
        u0 = data.amplitude * np.cos(data.wavenumber(grid.L) * x)
    else:
        u0 = np.zeros(grid.n)

    if data.u1 == "gaussian-derivative":
        u1 = gaussian_derivative(x, data.amplitude, data.sigma)
    else:
        u1 = np.zeros(grid.n)
    return u0, u1
