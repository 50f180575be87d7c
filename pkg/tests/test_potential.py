import numpy as np
import pytest
from pydantic import ValidationError

from src.discrete_line import build_grid, l2_sq, neg_laplacian
from src.errors import PotentialValidationError
from src.initial_data import DataSpec, sample_initial_data
from src.potential import (
    PotentialFamily,
    PotentialSpec,
    antiderivative_source,
    eval_potential,
    validate_V1,
    weighted_data_norm,
)


def test_algebraic_values_at_origin(algebraic):
    assert eval_potential(algebraic, 0.0) == pytest.approx((0.5, 0.0, -0.5))


def test_constant_family():
    spec = PotentialSpec(family="constant", V0=0.3)
    V, Vp, Vpp = eval_potential(spec, np.array([-2.0, 0.0, 7.0]))
    np.testing.assert_array_equal(V, 0.3)
    np.testing.assert_array_equal(Vp, 0.0)
    np.testing.assert_array_equal(Vpp, 0.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0])
def test_derivatives_match_finite_differences(alpha):
    spec = PotentialSpec(V0=0.5, alpha=alpha)
    x = np.array([-3.0, -0.7, 0.4, 2.5])
    step = 1e-5
    V, Vp, Vpp = eval_potential(spec, x)
    Vplus, Vpplus, _ = eval_potential(spec, x + step)
    Vminus, Vpminus, _ = eval_potential(spec, x - step)
    np.testing.assert_allclose(Vp, (Vplus - Vminus) / (2 * step), atol=1e-8)
    np.testing.assert_allclose(Vpp, (Vpplus - Vpminus) / (2 * step), atol=1e-8)


def test_algebraic_potential_decays():
    spec = PotentialSpec(V0=0.5, alpha=1.0)
    V = eval_potential(spec, np.linspace(0.0, 100.0, 101))[0]
    assert np.all(np.diff(V) < 0)
    assert V[-1] == pytest.approx(0.5 / np.sqrt(1.0 + 100.0**2))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 4.0])
def test_sup_norms_match_dense_sampling(alpha):
    spec = PotentialSpec(V0=0.7, alpha=alpha)
    x = np.linspace(-50.0, 50.0, 200001)
    V, Vp, Vpp = eval_potential(spec, x)
    Vinf, V1inf, V2inf = spec.impl.sup_norms(spec.V0, spec.alpha)
    assert Vinf == pytest.approx(np.max(np.abs(V)), rel=1e-12)
    assert V1inf == pytest.approx(np.max(np.abs(Vp)), rel=1e-6)
    assert V2inf == pytest.approx(np.max(np.abs(Vpp)), rel=1e-6)


def test_sup_norms_grow_with_amplitude():
    small = PotentialSpec(V0=0.2).impl.sup_norms(0.2, 1.0)
    large = PotentialSpec(V0=0.6).impl.sup_norms(0.6, 1.0)
    assert all(a < b for a, b in zip(small, large))


def test_canonical_potential_is_accepted(grid, algebraic):
    result = validate_V1(algebraic, grid)
    assert result.ok
    assert result.reasons == []
    assert result.alpha_eff == pytest.approx(0.5)
    assert result.smallness == pytest.approx(0.5)


def test_sampled_ratio_stays_below_alpha(grid, algebraic):
    sampled = PotentialFamily.ratio_sup(algebraic.impl, algebraic.V0, algebraic.alpha, grid)
    assert sampled == pytest.approx(0.5, abs=1e-6)
    assert sampled <= 0.5 + 1e-12


def test_large_amplitude_fails_smallness(grid):
    result = validate_V1(PotentialSpec(V0=2.0, alpha=1.0), grid)
    assert not result.ok
    assert result.smallness == pytest.approx(2.0)
    assert any("alpha^2" in reason for reason in result.reasons)


def test_gaussian_is_rejected(grid):
    result = validate_V1(PotentialSpec(family="gaussian", V0=0.5, alpha=1.0), grid)
    assert not result.ok


def test_zero_potential_is_rejected(grid):
    result = validate_V1(PotentialSpec(family="zero", V0=0.0), grid)
    assert not result.ok
    assert any("positive" in reason for reason in result.reasons)


def test_constant_potential_is_accepted(grid):
    assert validate_V1(PotentialSpec(family="constant", V0=0.25, alpha=1.0), grid).ok


def test_unknown_family_and_negative_amplitude_are_invalid():
    with pytest.raises(ValidationError):
        PotentialSpec(family="yukawa")
    with pytest.raises(ValidationError):
        PotentialSpec(V0=-1.0)


def test_weighted_data_norm_for_constant_potential(grid, rng):
    spec = PotentialSpec(family="constant", V0=0.25)
    u0, u1 = rng.standard_normal(grid.n), rng.standard_normal(grid.n)
    source = u0 + u1 + neg_laplacian(grid, u1)
    expected = np.sqrt(l2_sq(grid, source) / 0.25)
    assert weighted_data_norm(grid, spec, u0, u1) == pytest.approx(expected, rel=1e-12)


def test_weighted_data_norm_is_homogeneous(grid, algebraic, rng):
    u0 = rng.standard_normal(grid.n)
    u1 = np.zeros(grid.n)
    assert weighted_data_norm(grid, algebraic, u1, u1) == 0.0
    assert weighted_data_norm(grid, algebraic, 3.0 * u0, u1) == pytest.approx(3.0 * weighted_data_norm(grid, algebraic, u0, u1))


def test_weighted_data_norm_of_a_bump_matches_a_refined_grid(algebraic):
    data = DataSpec(family="bump", amplitude=1.0, radius=5.0)

    def norm_on(n):
        grid = build_grid(10.0, n)
        u0, u1 = sample_initial_data(grid, data)
        return grid.h, weighted_data_norm(grid, algebraic, u0, u1)

    h, coarse = norm_on(399)
    h_fine, fine = norm_on(8 * 400 - 1)
    assert h == pytest.approx(0.05)
    assert h_fine == pytest.approx(h / 8)
    assert fine > 0.0
    assert coarse == pytest.approx(fine, rel=1e-2)


def test_weighted_data_norm_needs_positive_potential(grid):
    with pytest.raises(PotentialValidationError):
        weighted_data_norm(grid, PotentialSpec(family="zero", V0=0.0), np.ones(grid.n), np.zeros(grid.n))


def test_antiderivative_source_without_velocity():
    grid = build_grid(2.0, 3)
    u0 = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(antiderivative_source(grid, u0, np.zeros(3)), u0)


def test_acceptance_is_monotone_in_amplitude(grid):
    verdicts = [validate_V1(PotentialSpec(V0=V0, alpha=1.0), grid).ok for V0 in (0.1, 0.5, 0.9, 0.99, 1.0, 1.5)]
    assert verdicts == [True, True, True, True, False, False]
