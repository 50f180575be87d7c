"""
Decay-rate fitting of log E against log(1 + t).
"""

import logging
from typing import TYPE_CHECKING, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.errors import ConfigurationError

if TYPE_CHECKING:
    from src.config import RunConfig
    from src.evolution import TraceSeries

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10
# Fraction of 1/V(L) beyond which the truncation gap dominates the decay.
TRUNCATION_HORIZON = 0.2


class DecayFit(BaseModel):
    t_min: float
    t_max: float
    slope: float
    intercept: float
    residual_rms: float
    n_samples: int


def default_window(config: "RunConfig") -> tuple[float, float]:
    """
    Fitting window [t_min, min(T, 0.2/V(L))] unless fit.t_max is set.

    Args:
        config (RunConfig): Run configuration.

    Returns:
        tuple: (t_min, t_max).
    """
    t_min, T = config.fit.t_min, config.time.T
    if config.fit.t_max is not None:
        return t_min, config.fit.t_max

    V_edge = float(config.potential.evaluate(config.domain.L)[0])
    t_max = T if V_edge <= 0 else min(T, TRUNCATION_HORIZON / V_edge)
    if t_max <= t_min:
        logger.warning(
            "Truncation horizon %.4g does not exceed fit.t_min = %.4g; fitting up to T = %.4g",
            t_max,
            t_min,
            T,
        )
        t_max = T
    return t_min, t_max


def fit_decay(trace: Union["TraceSeries", pd.DataFrame], window: tuple[float, float]) -> DecayFit:
    """
    Least-squares line through (log(1+t), log E) over the window samples.

    Args:
        trace (TraceSeries | DataFrame): Trace or frame with "t" and "E" columns.
        window (tuple): (t_min, t_max), inside the trace's time range.

    Returns:
        DecayFit: Slope, intercept and residual RMS of the fit.

    Raises:
        ConfigurationError: If the window is empty, outside the trace, holds fewer
            than 10 samples, or E is not positive on it.
    """
    frame = trace if isinstance(trace, pd.DataFrame) else trace.frame
    t_min, t_max = window
    if not t_min < t_max:
        raise ConfigurationError(f"Fit window needs t_min < t_max, got [{t_min}, {t_max}]")

    t = frame["t"].to_numpy()
    E = frame["E"].to_numpy()
    slack = 1e-9 * max(1.0, abs(t[-1]))
    if t_min < t[0] - slack or t_max > t[-1] + slack:
        raise ConfigurationError(
            f"Fit window [{t_min:g}, {t_max:g}] is outside the trace [{t[0]:g}, {t[-1]:g}]"
        )

    mask = (t >= t_min - slack) & (t <= t_max + slack)
    n_samples = int(np.count_nonzero(mask))
    if n_samples < MIN_SAMPLES:
        raise ConfigurationError(
            f"Fit window [{t_min:g}, {t_max:g}] holds {n_samples} samples, need {MIN_SAMPLES}"
        )
    if not np.all(E[mask] > 0):
        raise ConfigurationError(f"Energy is not positive on the fit window [{t_min:g}, {t_max:g}]")

    x = np.log1p(t[mask])
    y = np.log(E[mask])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    return DecayFit(
        t_min=t_min,
        t_max=t_max,
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        n_samples=n_samples,
    )

