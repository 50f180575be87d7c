import numpy as np
import pytest

from src.discrete_line import (
    build_grid,
    discrete_symbol,
    edge_differences,
    grad_sq,
    helmholtz_solver,
    inner,
    l2_sq,
    lap_sq,
    laplacian_matrix,
    neg_laplacian,
    norms,
    solve_helmholtz,
    weighted_grad_sq,
)
from src.errors import ConfigurationError, GridMismatchError


def test_dirichlet_grid_nodes():
    grid = build_grid(2.0, 3)
    assert grid.h == 1.0
    np.testing.assert_array_equal(grid.nodes, [-1.0, 0.0, 1.0])
    assert len(grid.edge_midpoints) == 4


def test_periodic_grid_nodes():
    grid = build_grid(np.pi, 4, "periodic")
    assert grid.h == pytest.approx(np.pi / 2)
    np.testing.assert_allclose(grid.nodes, [-np.pi, -np.pi / 2, 0.0, np.pi / 2])
    assert len(grid.edge_midpoints) == 4


def test_canonical_spacing():
    grid = build_grid(80.0, 3199)
    assert grid.h == pytest.approx(0.05, rel=1e-12)
    assert np.all(np.diff(grid.nodes) > 0)


@pytest.mark.parametrize("L, n, bc", [(0.0, 10, "dirichlet"), (-1.0, 10, "dirichlet"), (1.0, 2, "dirichlet"), (1.0, 10, "neumann")])
def test_invalid_grids_are_rejected(L, n, bc):
    with pytest.raises(ConfigurationError):
        build_grid(L, n, bc)


def test_field_length_is_checked():
    grid = build_grid(2.0, 3)
    with pytest.raises(GridMismatchError):
        neg_laplacian(grid, np.zeros(4))


def test_stencil_of_a_spike():
    grid = build_grid(2.0, 3)
    np.testing.assert_array_equal(neg_laplacian(grid, [0.0, 1.0, 0.0]), [-1.0, 2.0, -1.0])


def test_stencil_is_exact_on_quadratics():
    grid = build_grid(3.0, 59)
    Lf = neg_laplacian(grid, grid.nodes**2)
    # boundary rows see the zero extension
    np.testing.assert_allclose(Lf[1:-1], -2.0, atol=1e-9)


def test_periodic_stencil_annihilates_constants(periodic_grid):
    np.testing.assert_allclose(neg_laplacian(periodic_grid, np.ones(periodic_grid.n)), 0.0, atol=1e-12)


def test_stencil_is_second_order():
    def error(n):
        grid = build_grid(10.0, n)
        x = grid.nodes
        f = np.exp(-x * x)
        exact = -(4.0 * x * x - 2.0) * f
        return np.max(np.abs(neg_laplacian(grid, f) - exact))

    ratio = error(199) / error(399)
    assert 3.5 <= ratio <= 4.5


def test_assembled_matrix_matches_stencil(small_grid, periodic_grid, rng):
    for grid in (small_grid, periodic_grid):
        f = rng.standard_normal(grid.n)
        np.testing.assert_allclose(laplacian_matrix(grid) @ f, neg_laplacian(grid, f), rtol=1e-12, atol=1e-9)


def test_helmholtz_solve_small_example():
    grid = build_grid(2.0, 3)
    np.testing.assert_allclose(solve_helmholtz(grid, [2.0, 1.0, 2.0]), [1.0, 1.0, 1.0], rtol=1e-14)


@pytest.mark.parametrize("bc", ["dirichlet", "periodic"])
def test_helmholtz_solve_matches_dense(bc, rng):
    grid = build_grid(5.0, 50, bc)
    b = rng.standard_normal(grid.n)
    dense = np.eye(grid.n) + laplacian_matrix(grid).toarray()
    x = solve_helmholtz(grid, b)
    expected = np.linalg.solve(dense, b)
    assert np.linalg.norm(x - expected) <= 1e-12 * np.linalg.norm(expected)
    np.testing.assert_allclose(helmholtz_solver(grid).apply(x), b, atol=1e-10)


def test_helmholtz_factor_is_cached_with_positive_pivots(grid):
    solver = helmholtz_solver(grid)
    assert solver is helmholtz_solver(build_grid(30.0, 299))
    assert np.all(solver.pivots > 0)


def test_resolvent_is_a_contraction(small_grid, rng):
    for _ in range(10):
        w = rng.standard_normal(small_grid.n)
        Jw = solve_helmholtz(small_grid, w)
        assert l2_sq(small_grid, Jw) <= l2_sq(small_grid, w)
        np.testing.assert_allclose(neg_laplacian(small_grid, Jw), w - Jw, atol=1e-12 * np.max(np.abs(w)) * 1e2)


def test_inner_product_examples():
    grid = build_grid(2.0, 3)
    assert inner(grid, np.ones(3), np.ones(3)) == 3.0
    half = build_grid(1.0, 3)
    assert inner(half, [2.0, 0.0, 0.0], [0.0, 3.0, 0.0]) == 0.0


def test_inner_product_integrates_a_gaussian():
    grid = build_grid(10.0, 1999)
    f = np.exp(-0.5 * grid.nodes**2)
    assert inner(grid, f, f) == pytest.approx(np.sqrt(np.pi), rel=1e-6)


def test_norms_of_a_spike():
    grid = build_grid(2.0, 3)
    result = norms(grid, np.array([0.0, 1.0, 0.0]))
    assert result.l2 == pytest.approx(1.0)
    assert result.grad == pytest.approx(np.sqrt(2.0))
    assert result.lap == pytest.approx(np.sqrt(6.0))


@pytest.mark.parametrize("bc", ["dirichlet", "periodic"])
def test_summation_by_parts(bc, rng):
    grid = build_grid(5.0, 40, bc)
    f, g = rng.standard_normal(grid.n), rng.standard_normal(grid.n)
    assert grad_sq(grid, f) == pytest.approx(inner(grid, neg_laplacian(grid, f), f), rel=1e-12)
    assert inner(grid, neg_laplacian(grid, f), g) == pytest.approx(inner(grid, f, neg_laplacian(grid, g)), rel=1e-10, abs=1e-9)
    assert grad_sq(grid, f) >= 0.0
    assert len(edge_differences(grid, f)) == len(grid.edge_midpoints)


def test_weighted_gradient_with_unit_weight(small_grid, rng):
    f = rng.standard_normal(small_grid.n)
    weight = np.ones(len(small_grid.edge_midpoints))
    assert weighted_grad_sq(small_grid, f, weight) == pytest.approx(grad_sq(small_grid, f), rel=1e-14)


def test_periodic_mode_is_an_eigenvector():
    grid = build_grid(np.pi, 32, "periodic")
    k = 3.0
    f = np.sin(k * grid.nodes)
    kappa = discrete_symbol(k, grid.h)
    np.testing.assert_allclose(neg_laplacian(grid, f), kappa**2 * f, atol=1e-12)
    assert grad_sq(grid, f) / l2_sq(grid, f) == pytest.approx(kappa**2, rel=1e-12)
    assert lap_sq(grid, f) / l2_sq(grid, f) == pytest.approx(kappa**4, rel=1e-12)


def test_discrete_symbol_approaches_wavenumber():
    k = 2.0
    assert discrete_symbol(k, 0.05) == pytest.approx(k, rel=1e-3)
    assert discrete_symbol(k, 0.05) < k
