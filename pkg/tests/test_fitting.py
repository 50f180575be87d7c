import numpy as np
import pandas as pd
import pytest

from src.errors import ConfigurationError
from src.fitting import default_window, fit_decay


def power_law(exponent: float, scale: float = 3.0) -> pd.DataFrame:
    t = np.linspace(0.0, 100.0, 1001)
    return pd.DataFrame({"t": t, "E": scale * (1.0 + t) ** exponent})


def test_recovers_a_power_law():
    fit = fit_decay(power_law(-2.0), (10.0, 100.0))
    assert fit.slope == pytest.approx(-2.0, abs=1e-10)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-10)
    assert fit.residual_rms <= 1e-10
    assert fit.n_samples == 901


def test_constant_energy_has_zero_slope():
    fit = fit_decay(power_law(0.0), (0.0, 50.0))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("window", [(50.0, 50.0), (60.0, 20.0), (-1.0, 50.0), (10.0, 200.0), (10.0, 10.5)])
def test_unusable_windows(window):
    with pytest.raises(ConfigurationError):
        fit_decay(power_law(-2.0), window)


def test_nonpositive_energy_cannot_be_fitted():
    frame = power_law(-2.0)
    frame.loc[500, "E"] = 0.0
    with pytest.raises(ConfigurationError, match="not positive"):
        fit_decay(frame, (10.0, 100.0))


def test_fit_of_a_simulated_trace(coarse_run):
    _, _, trace = coarse_run
    fit = fit_decay(trace, (0.0, 5.0))
    assert fit.slope < 0.0
    assert fit.n_samples == len(trace)


def test_default_window_uses_the_truncation_horizon(config_factory):
    config = config_factory(domain={"L": 80.0, "n": 799}, time={"dt": 0.1, "T": 50.0})
    t_min, t_max = default_window(config)
    assert t_min == 10.0
    assert t_max == pytest.approx(0.4 * np.sqrt(1.0 + 80.0**2))


def test_configured_window_wins(config_factory):
    config = config_factory(time={"dt": 0.1, "T": 50.0}, fit={"t_min": 5.0, "t_max": 40.0})
    assert default_window(config) == (5.0, 40.0)


def test_short_horizon_falls_back_to_final_time(config_factory):
    assert default_window(config_factory()) == (10.0, 5.0)


def test_zero_potential_fits_up_to_final_time(config_factory):
    config = config_factory(potential={"family": "zero", "V0": 0.0}, time={"dt": 0.1, "T": 50.0})
    assert default_window(config) == (10.0, 50.0)
