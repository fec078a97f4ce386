"""Physics assembly: coupling cancellation, dissipation laws, eigenbasis."""

import numpy as np
import pytest

from melab.grid import Grid2D, ParameterError, ScalarField, VectorField2, inner, mean, norm_l2, pin_boundary
from melab.model import (
    DissipationSpec,
    Forcing,
    GalerkinBasis,
    MaterialParams,
    State,
    build_galerkin_basis,
    dissipation_eval,
    induction_term,
    lorentz_force,
    params_from_json,
    params_to_json,
    project,
    random_state,
    reconstruct,
    rhs,
    validate_h2,
    validate_kc,
)


PARAMS = MaterialParams(rho_m=1.2, mu=1.0, lam=0.5, nu1=0.1, mu0=0.8, b0=1.5)


@pytest.fixture(scope="module")
def grid():
    return Grid2D(14, 12, 1.0, 1.2)


@pytest.fixture(scope="module")
def basis(grid):
    return build_galerkin_basis(grid, PARAMS, m=6, m_magnetic=6)


def test_coupling_energy_cancellation(grid):
    """(lorentz(h), w) + mu0 * (induction(w, h), h) = 0: the semi-discrete
    coupling terms exchange energy exactly."""
    rng = np.random.default_rng(0)
    for _ in range(10):
        h = ScalarField(grid, rng.standard_normal(grid.shape), bc="neumann")
        w = VectorField2(
            grid,
            pin_boundary(rng.standard_normal(grid.shape)),
            pin_boundary(rng.standard_normal(grid.shape)),
            bc="dirichlet_zero",
        )
        lhs = inner(lorentz_force(h, PARAMS), w)
        rhs_ = PARAMS.mu0 * inner(induction_term(w, h, PARAMS), h)
        assert abs(lhs + rhs_) <= 1e-11 * max(1.0, abs(lhs))


def test_induction_mean_free(grid):
    rng = np.random.default_rng(1)
    h = ScalarField(grid, rng.standard_normal(grid.shape), bc="neumann")
    w = VectorField2(
        grid,
        pin_boundary(rng.standard_normal(grid.shape)),
        pin_boundary(rng.standard_normal(grid.shape)),
        bc="dirichlet_zero",
    )
    assert abs(mean(ScalarField(grid, induction_term(w, h, PARAMS).values))) <= 1e-13


def test_material_validation():
    with pytest.raises(ParameterError):
        MaterialParams(rho_m=-1.0, mu=1.0, lam=0.5, nu1=0.1, mu0=1.0, b0=1.0)
    with pytest.raises(ParameterError):
        MaterialParams(rho_m=1.0, mu=0.0, lam=0.5, nu1=0.1, mu0=1.0, b0=1.0)


def test_dissipation_laws():
    lin = DissipationSpec(kind="linear", alpha=0.7)
    zx, zy = lin.pointwise(np.array([2.0]), np.array([-1.0]))
    assert zx[0] == pytest.approx(1.4) and zy[0] == pytest.approx(-0.7)
    pw = DissipationSpec(kind="power", alpha=0.1, k0=0.5, k1=1.0, p=3.0, r_rho=1.0, k_c=0.1)
    assert pw.q_exponent == pytest.approx(5.0 / 4.0)
    with pytest.raises(ParameterError):
        DissipationSpec(kind="power", p=5.0)
    with pytest.raises(ParameterError):
        DissipationSpec(kind="linear", alpha=0.0)


def test_validate_h2_power_law():
    # (rho(z), z) = alpha|z|^2 + k1|z|^{p+2} >= k0|z|^{p+2} needs k0 <= k1
    # on small shells, plus slack from the linear term
    spec = DissipationSpec(kind="power", alpha=0.2, k0=0.9, k1=1.0, p=3.0, r_rho=1.0, k_c=0.2)
    rep = validate_h2(spec, n_samples=4000, seed=3)
    assert rep["passed"]
    assert rep["q"] == pytest.approx((spec.p + 2) / (spec.p + 1))


def test_validate_kc_linear_tight():
    spec = DissipationSpec(kind="linear", alpha=0.4, k_c=0.4)
    rep = validate_kc(spec, n_samples=4000, seed=2)
    assert rep["passed"]
    # claiming more than alpha must fail with a witness
    bad = DissipationSpec(kind="linear", alpha=0.4, k_c=0.5)
    rep = validate_kc(bad, n_samples=4000, seed=2)
    assert not rep["passed"] and "witness" in rep


def test_forcing_profiles(grid):
    f = Forcing(period=2.0, terms=[
        {"target": "f2", "g": {"a0": 0.0, "cos": [1.0], "sin": []},
         "shape": {"jx": 1, "jy": 1, "amplitude": 0.3, "component": 0}},
        {"target": "f1", "g": {"a0": 1.0, "cos": [], "sin": [0.5]},
         "shape": {"jx": 1, "jy": 0, "amplitude": 0.2}},
    ])
    v = f.f2(grid, 0.0)
    assert np.all(v.ux[0, :] == 0) and np.all(v.ux[-1, :] == 0)
    s = f.f1(grid, 0.3)
    assert abs(mean(ScalarField(grid, s.values))) <= 1e-13
    assert f.l1_l2_norm(grid) > 0
    assert not f.is_zero
    assert Forcing.zero().is_zero


def test_forcing_periodicity(grid):
    f = Forcing(period=1.5, terms=[
        {"target": "f2", "g": {"a0": 0.2, "cos": [1.0, 0.3], "sin": [0.5]},
         "shape": {"jx": 2, "jy": 1, "amplitude": 1.0, "component": 1}},
    ])
    a = f.f2(grid, 0.4)
    b = f.f2(grid, 0.4 + 1.5)
    assert np.allclose(a.uy, b.uy, atol=1e-13)


def test_state_contracts(grid):
    with pytest.raises(Exception):
        State(
            VectorField2.zeros(grid, bc="dirichlet_zero"),
            VectorField2.zeros(grid, bc="dirichlet_zero"),
            ScalarField.zeros(grid, bc="none"),
        )
    z = State.zero(grid)
    assert z.scaled(3.0).u.ux.max() == 0.0


def test_basis_orthonormal(grid, basis):
    for j in range(basis.m):
        for k in range(j, basis.m):
            ip = inner(basis.elastic_mode(j), basis.elastic_mode(k))
            assert ip == pytest.approx(1.0 if j == k else 0.0, abs=1e-10)
    for j in range(basis.m_magnetic):
        for k in range(j, basis.m_magnetic):
            ip = inner(basis.magnetic_mode(j), basis.magnetic_mode(k))
            assert ip == pytest.approx(1.0 if j == k else 0.0, abs=1e-10)


def test_basis_eigenvalue_ordering(grid, basis):
    assert np.all(np.diff(basis.elastic_vals) >= -1e-10)
    assert np.all(basis.elastic_vals > 0)
    # magnetic form a1 = nu1*(grad, grad) + mass: constant mode has value 1
    assert basis.magnetic_vals[0] == pytest.approx(1.0, abs=1e-10)


def test_projection_roundtrip(grid, basis):
    rng = np.random.default_rng(6)
    c = rng.standard_normal(basis.m)
    u = reconstruct(basis, c, "elastic")
    assert np.allclose(project(basis, u), c, atol=1e-10)
    ch = rng.standard_normal(basis.m_magnetic)
    h = reconstruct(basis, ch, "magnetic")
    assert np.allclose(project(basis, h), ch, atol=1e-10)


def test_basis_cache_roundtrip(tmp_path, grid, basis):
    basis.save(tmp_path / "b.npz")
    again = GalerkinBasis.load(tmp_path / "b.npz", grid)
    assert np.array_equal(again.elastic_vals, basis.elastic_vals)
    other = Grid2D(10, 10, 1.0, 1.0)
    with pytest.raises(Exception):
        GalerkinBasis.load(tmp_path / "b.npz", other)


def test_random_state_mean_zero(grid, basis):
    st = random_state(grid, basis, seed=9, amplitude=0.1)
    assert abs(mean(ScalarField(grid, st.h.values))) <= 1e-12
    st2 = random_state(grid, basis, seed=9, amplitude=0.1)
    assert np.array_equal(st.h.values, st2.h.values)


def test_rhs_assembles(grid, basis):
    st = random_state(grid, basis, seed=4, amplitude=0.1)
    acc, hdot = rhs(st, PARAMS, DissipationSpec(kind="linear", alpha=0.5), Forcing.zero())
    assert np.all(np.isfinite(acc.ux)) and np.all(np.isfinite(hdot.values))
    assert np.all(acc.ux[0, :] == 0)


def test_params_json_roundtrip():
    spec = DissipationSpec(kind="power", alpha=0.1, k0=0.5, k1=1.0, p=3.5, r_rho=2.0, k_c=0.1)
    f = Forcing(period=2.0, terms=[
        {"target": "f1", "g": {"a0": 1.0, "cos": [], "sin": []},
         "shape": {"jx": 1, "jy": 1, "amplitude": 0.1}},
    ])
    text = params_to_json(PARAMS, spec, f)
    assert '"lambda"' in text
    m2, s2, f2 = params_from_json(text)
    assert m2 == PARAMS and s2 == spec and f2.period == f.period
