"""Desk-scale runs of the shipped configurations. Each takes from seconds to minutes."""

from pathlib import Path

import numpy as np
import pytest

from src.appendix_checks import run_appendix_checks
from src.config import load_config
from src.discrete_line import build_grid
from src.energetics import antiderivative_residual, energy_balance_residual, multiplier_identity_residuals
from src.evolution import prepare_run, simulate
from src.fitting import fit_decay
from src.ledger import compute_constants, verify_inequalities
from src.potential import PotentialSpec, validate_V1
from src.studies import run_convergence_study, run_sweep

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="module")
def canonical():
    config = load_config(CONFIGS / "canonical.cfg")
    setup = prepare_run(config)
    return config, setup, simulate(config, setup)


@pytest.fixture(scope="module")
def canonical_long():
    config = load_config(CONFIGS / "canonical_long.cfg")
    setup = prepare_run(config)
    trace = simulate(config, setup)
    return config, trace, compute_constants(setup.grid, setup.potential, setup.u0, setup.u1)


def test_canonical_energy_balance(canonical):
    _, _, trace = canonical
    assert energy_balance_residual(trace) <= 1e-8
    for name, value in multiplier_identity_residuals(trace).items():
        assert value <= 1e-8, name


def test_energy_balance_defect_is_high_order_in_dt():
    # measured above the roundoff floor of the canonical grid
    config = load_config(CONFIGS / "canonical.cfg").updated("flags", antiderivative_check=False)
    coarse = simulate(config.updated("time", dt=0.02, sample_every=5))
    fine = simulate(config.updated("time", dt=0.01, sample_every=10))
    ratio = energy_balance_residual(coarse) / energy_balance_residual(fine)
    assert 8.0 <= ratio <= 32.0


def test_canonical_antiderivative_device(canonical):
    _, setup, trace = canonical
    assert antiderivative_residual(trace, setup.system, setup.u0, setup.u1) <= 1e-10


def test_full_suite_to_t_100(canonical_long):
    _, trace, ledger = canonical_long
    report = verify_inequalities(trace, ledger)
    assert report.pass_count == 15, report.failures


def test_decay_shape_to_t_100(canonical_long):
    _, trace, ledger = canonical_long
    t = trace.times
    E = trace.frame["E"].to_numpy()
    assert np.all((1.0 + t) ** 2 * E <= ledger.final_energy_bound)
    assert np.all((1.0 + t) * trace.frame["l2u"].to_numpy() <= ledger.final_l2_bound)
    assert fit_decay(trace, (10.0, 100.0)).slope <= -1.0


def test_potential_gate():
    grid = build_grid(80.0, 3199)
    assert validate_V1(PotentialSpec(V0=0.5, alpha=1.0), grid).ok
    assert not validate_V1(PotentialSpec(V0=2.0, alpha=1.0), grid).ok
    assert not validate_V1(PotentialSpec(family="gaussian", V0=0.5, alpha=1.0), grid).ok


def test_convergence_study_at_t_20():
    study = run_convergence_study(load_config(CONFIGS / "converge.cfg"))
    assert study.passed, study


def test_semigroup_checks_on_100_states():
    config = load_config(CONFIGS / "canonical.cfg")
    grid = build_grid(config.domain.L, config.domain.n)
    assert run_appendix_checks(grid, config.potential, n_random=100).passed


def test_sweep_baseline_decays_more_slowly():
    config = load_config(CONFIGS / "sweep.cfg")
    config = config.updated("sweep", V0=[0.5, 2.0])
    frame = run_sweep(config)
    with_potential, rejected, baseline = (frame.iloc[i] for i in range(3))
    assert with_potential["status"] == "ok"
    assert rejected["status"].startswith("rejected")
    assert baseline["slope"] > with_potential["slope"]
