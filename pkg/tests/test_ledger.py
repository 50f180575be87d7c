import numpy as np
import pytest

from src.errors import PotentialValidationError, ProvenanceError
from src.evolution import TraceSeries, prepare_run, simulate
from src.ledger import (
    auxiliary_checks,
    compute_constants,
    proposition_rate_floor,
    theorem_bounds,
    verify_inequalities,
    weighted_energy_sup,
)
from src.potential import PotentialSpec

SUITE = ["L2.1", "E-balance", "P2.1", "2.13", "2.11", "L3.1", "L3.3", "L3.4", "L3.5", "3.19", "3.20", "3.21", "gradw", "T1.1-E", "T1.1-L2"]
POTENTIAL_ONLY = {"eps", "Ceps", "delta", "Cdelta", "Vinf", "V1inf", "V2inf", "alpha", "Cstar"}


@pytest.fixture(scope="module")
def ledger(coarse_run):
    _, setup, _ = coarse_run
    return compute_constants(setup.grid, setup.potential, setup.u0, setup.u1)


def test_potential_constants_of_the_canonical_family(ledger):
    assert ledger.eps == 0.5
    assert ledger.Ceps == pytest.approx(0.5)
    assert ledger.delta == 0.25
    assert ledger.Cdelta == pytest.approx(0.5)
    assert ledger.Cstar == pytest.approx(2.0)
    assert ledger.V1inf == pytest.approx(0.5 / np.sqrt(2.0) * 1.5**-1.5)


def test_constant_ordering(ledger):
    values = ledger.constants()
    for name in ("J0sq", "I1sq", "K0sq", "K1sq", "K2sq", "C1sq", "K3sq", "J1sq", "J2sq", "E2zero", "L0sq", "L1sq", "C2sq"):
        assert values[name] >= 0.0, name
    assert ledger.K2sq >= ledger.K0sq
    assert ledger.C1sq >= 2.0 * ledger.E0
    assert ledger.C2sq >= ledger.L0sq
    assert ledger.final_energy_bound >= ledger.C1sq
    assert ledger.final_energy_bound >= ledger.E0
    assert theorem_bounds(ledger) == (ledger.final_energy_bound, ledger.final_l2_bound)


def test_zero_data_constants(grid, algebraic):
    zero = np.zeros(grid.n)
    ledger = compute_constants(grid, algebraic, zero, zero)
    for name, value in ledger.constants().items():
        if name not in POTENTIAL_ONLY:
            assert value == 0.0, name
    assert theorem_bounds(ledger) == (0.0, 0.0)


def test_constants_are_quadratic_in_the_data(config_factory):
    single = prepare_run(config_factory())
    double = prepare_run(config_factory(data={"amplitude": 2.0}))
    a = compute_constants(single.grid, single.potential, single.u0, single.u1).constants()
    b = compute_constants(double.grid, double.potential, double.u0, double.u1).constants()
    for name in a:
        expected = a[name] if name in POTENTIAL_ONLY else 4.0 * a[name]
        assert b[name] == pytest.approx(expected, rel=1e-12), name


def test_constant_potential_has_no_gradient_terms(grid):
    spec = PotentialSpec(family="constant", V0=0.25)
    u0 = np.exp(-grid.nodes**2)
    ledger = compute_constants(grid, spec, u0, np.zeros(grid.n))
    assert ledger.V1inf == 0.0 and ledger.eps == 0.5
    assert ledger.K0sq == ledger.I1sq + 0.5 * ledger.wgradpot0
    assert ledger.Cdelta == 0.0


def test_rejected_potential_has_no_ledger(grid):
    with pytest.raises(PotentialValidationError):
        compute_constants(grid, PotentialSpec(V0=2.0), np.ones(grid.n), np.zeros(grid.n))


def test_suite_passes_on_a_coarse_run(coarse_run, ledger):
    _, _, trace = coarse_run
    report = verify_inequalities(trace, ledger, energy_tol=1e-6)
    assert [entry.id for entry in report.entries] == SUITE
    assert report.all_passed, report.failures
    assert report.pass_count == 15
    for entry in report.entries:
        assert entry.margin >= -report.tol * abs(entry.rhs)
        assert entry.margin == pytest.approx(entry.rhs - entry.lhs, abs=1e-12 * max(1.0, abs(entry.rhs)))


def test_running_integrals_are_flagged_monotone(coarse_run, ledger):
    _, _, trace = coarse_run
    report = verify_inequalities(trace, ledger, energy_tol=1e-6)
    for id in ("2.11", "2.13", "L3.5", "3.19", "3.20", "3.21", "gradw"):
        entry = report.entry(id)
        assert entry.monotone is True, id
        assert entry.t_checked == pytest.approx(trace.times[-1]), id
    assert report.entry("P2.1").monotone is None


def test_report_frame(coarse_run, ledger):
    _, _, trace = coarse_run
    frame = verify_inequalities(trace, ledger, energy_tol=1e-6).to_frame()
    assert list(frame.columns) == ["id", "t_checked", "lhs", "rhs", "margin", "pass"]
    assert list(frame["id"]) == SUITE
    assert frame["pass"].all()


def test_suite_passes_on_zero_data(config_factory):
    config = config_factory(data={"family": "zero"})
    setup = prepare_run(config)
    trace = simulate(config, setup)
    report = verify_inequalities(trace, compute_constants(setup.grid, setup.potential, setup.u0, setup.u1))
    assert report.all_passed


def test_inflated_energy_fails_the_final_bound(coarse_run, ledger):
    _, _, trace = coarse_run
    frame = trace.frame.copy()
    frame["E"] = frame["E"] * (10.0 * ledger.final_energy_bound / ledger.E0)
    report = verify_inequalities(TraceSeries(frame=frame, metadata=trace.metadata), ledger, energy_tol=1e-6)
    assert not report.all_passed
    assert "T1.1-E" in report.failures
    assert report.entry("T1.1-E").margin < 0


def test_mismatched_ledger_is_refused(coarse_run):
    _, setup, trace = coarse_run
    other = compute_constants(setup.grid, setup.potential, 2.0 * setup.u0, setup.u1)
    with pytest.raises(ProvenanceError):
        verify_inequalities(trace, other)
    with pytest.raises(ProvenanceError):
        auxiliary_checks(trace, other)


def test_auxiliary_bounds_hold(coarse_run, ledger):
    _, _, trace = coarse_run
    entries = auxiliary_checks(trace, ledger)
    assert [entry.id for entry in entries] == ["K(t)", "L3.2-live", "3.18"]
    assert all(entry.passed for entry in entries)
    times = set(trace.times.tolist())
    assert all(entry.t_checked in times for entry in entries)

    rate = proposition_rate_floor(trace, ledger)
    assert rate.id == "P2.1-rate" and rate.passed
    assert rate.lhs == pytest.approx(weighted_energy_sup(trace))


def test_weighted_energy_sup(coarse_run):
    _, _, trace = coarse_run
    t = trace.times
    E = trace.frame["E"].to_numpy()
    assert weighted_energy_sup(trace) == pytest.approx(np.max((1.0 + t) * E))
    assert weighted_energy_sup(trace) >= E[0]
