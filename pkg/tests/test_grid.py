"""Discrete calculus: adjointness, operator compatibility, quadrature."""

import numpy as np
import pytest

from melab.grid import (
    ContractViolationError,
    Grid2D,
    ParameterError,
    ScalarField,
    VectorField2,
    bilinear_a1,
    bilinear_a2,
    divergence,
    grad_edge_inner,
    gradient,
    inner,
    lame_apply,
    laplacian_neumann,
    load_scalar_csv,
    load_vector_csv,
    mean,
    norm_l2,
    pin_boundary,
    save_scalar_csv,
    save_vector_csv,
)


def random_scalar(grid, rng, bc="neumann"):
    return ScalarField(grid, rng.standard_normal(grid.shape), bc)


def random_vector(grid, rng):
    ux = pin_boundary(rng.standard_normal(grid.shape))
    uy = pin_boundary(rng.standard_normal(grid.shape))
    return VectorField2(grid, ux, uy, bc="dirichlet_zero")


@pytest.fixture
def grid():
    return Grid2D(17, 13, 1.3, 0.9)


def test_grid_validation():
    with pytest.raises(ParameterError):
        Grid2D(3, 8, 1.0, 1.0)
    with pytest.raises(ParameterError):
        Grid2D(8, 8, -1.0, 1.0)


def test_weights_integrate_constants(grid):
    one = ScalarField(grid, np.ones(grid.shape))
    assert inner(one, one) == pytest.approx(grid.lx * grid.ly, rel=1e-14)
    assert mean(one) == pytest.approx(1.0, rel=1e-14)


def test_gradient_divergence_adjointness(grid):
    """(grad h, w) = -(h, div w) for boundary-zero vector fields."""
    rng = np.random.default_rng(11)
    for _ in range(20):
        h = random_scalar(grid, rng, bc="none")
        w = random_vector(grid, rng)
        lhs = inner(gradient(h), w)
        rhs = -inner(h, divergence(w))
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-13 * scale


def test_neumann_laplacian_pairs_with_edge_form(grid):
    """(lap h, g) = -grad_edge_inner(h, g): the flux Laplacian is the
    operator of the edge-difference quadrature."""
    rng = np.random.default_rng(4)
    for _ in range(10):
        h = random_scalar(grid, rng)
        g = random_scalar(grid, rng)
        lhs = inner(laplacian_neumann(h), g)
        rhs = -grad_edge_inner(h.values, g.values, grid)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_neumann_laplacian_conserves_mass(grid):
    rng = np.random.default_rng(5)
    h = random_scalar(grid, rng)
    lap = laplacian_neumann(h)
    assert abs(float(np.sum(lap.values * grid.weights))) <= 1e-12


def test_laplacian_requires_neumann_tag(grid):
    h = ScalarField(grid, np.ones(grid.shape), bc="none")
    with pytest.raises(ContractViolationError):
        laplacian_neumann(h)


def test_neumann_eigenmode_convergence():
    """cos(pi x) eigenmode error of the Neumann Laplacian decays at
    second order."""
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(n, n, 1.0, 1.0)
        x, _ = g.xy
        h = ScalarField(g, np.cos(np.pi * x), bc="neumann")
        lap = laplacian_neumann(h)
        errs.append(float(np.max(np.abs(lap.values + np.pi**2 * h.values))))
    assert errs[0] / errs[1] > 3.5
    assert errs[1] / errs[2] > 3.5


def test_lame_symmetry_and_a2_consistency(grid):
    rng = np.random.default_rng(7)
    for _ in range(10):
        u = random_vector(grid, rng)
        w = random_vector(grid, rng)
        luw = inner(lame_apply(u, 1.0, 0.7), w)
        lwu = inner(lame_apply(w, 1.0, 0.7), u)
        assert abs(luw - lwu) <= 1e-12 * max(1.0, abs(luw))
        a2 = bilinear_a2(u, w, 1.0, 0.7)
        assert abs(luw - a2) <= 1e-12 * max(1.0, abs(a2))


def test_a2_coercive(grid):
    rng = np.random.default_rng(8)
    u = random_vector(grid, rng)
    assert bilinear_a2(u, u, 1.0, 0.5) > 0
    assert bilinear_a1(random_scalar(grid, rng), random_scalar(grid, rng), 0.1) is not None


def test_a1_symmetric_positive(grid):
    rng = np.random.default_rng(9)
    h = random_scalar(grid, rng)
    g2 = random_scalar(grid, rng)
    assert bilinear_a1(h, g2, 0.3) == pytest.approx(bilinear_a1(g2, h, 0.3), rel=1e-12)
    assert bilinear_a1(h, h, 0.3) >= norm_l2(h) ** 2 - 1e-12


def test_csv_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(10)
    h = random_scalar(grid, rng, bc="none")
    save_scalar_csv(tmp_path / "h.csv", h)
    h2 = load_scalar_csv(tmp_path / "h.csv", grid)
    assert np.array_equal(h.values, h2.values)
    u = random_vector(grid, rng)
    save_vector_csv(tmp_path / "u.csv", u)
    u2 = load_vector_csv(tmp_path / "u.csv", grid, bc="dirichlet_zero")
    assert np.array_equal(u.ux, u2.ux) and np.array_equal(u.uy, u2.uy)
    header = (tmp_path / "h.csv").read_text().splitlines()[0]
    assert header == "x,y,value"
    header = (tmp_path / "u.csv").read_text().splitlines()[0]
    assert header == "x,y,vx,vy"


def test_vector_boundary_enforced(grid):
    bad = np.ones(grid.shape)
    with pytest.raises(ContractViolationError):
        VectorField2(grid, bad, bad, bc="dirichlet_zero")
