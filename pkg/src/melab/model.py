"""Physical parameters, dissipation laws, forcing, right-hand sides and the
spectral (eigenbasis) reduction of the coupled magnetoelastic system.

The governing equations on the rectangle are

    rho_m u'' = -L u - rho(u') - mu0 (b0 + h) grad h + f2
    h'        = nu1 Lap h - div((b0 + h) u') + f1

with L the elastic operator of :func:`melab.grid.lame_apply`, u clamped on
the boundary and h carrying zero normal flux.  The coupling terms are
assembled from the mimetic operators so their energy contributions cancel
exactly at the semi-discrete level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.linalg

from .grid import (
    ContractViolationError,
    DomainMismatchError,
    Grid2D,
    MelabError,
    ParameterError,
    ScalarField,
    VectorField2,
    divergence,
    gradient,
    inner,
    interior_mask,
    lame_apply,
    lame_operator_matrix,
    laplacian_neumann,
    neumann_laplacian_matrix,
    norm_l2,
    pack_interior,
    pin_boundary,
    unpack_interior,
    grad_edge_inner,
)


class DivergedStateError(MelabError):
    """A field or right-hand-side term stopped being finite."""

    def __init__(self, term: str, t: float | None = None):
        self.term = term
        self.t = t
        where = f" at t={t:g}" if t is not None else ""
        super().__init__(f"non-finite values in term '{term}'{where}")


@dataclass(frozen=True)
class MaterialParams:
    rho_m: float = 1.0
    mu: float = 1.0
    lam: float = 1.0
    nu1: float = 1.0
    mu0: float = 1.0
    b0: float = 1.0

    def __post_init__(self):
        if min(self.rho_m, self.mu, self.lam, self.nu1, self.mu0) <= 0:
            raise ParameterError(
                "rho_m, mu, lam, nu1, mu0 must all be positive"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MaterialParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass(frozen=True)
class DissipationSpec:
    """Mechanical dissipation law rho(z).

    kind 'none': 0; 'linear': alpha*z; 'power': alpha*z + k1*|z|^p z
    (pointwise Euclidean norm), a concrete law compatible with the
    polynomial growth hypotheses and the monotonicity constant k_c = alpha.
    """

    kind: str = "none"
    alpha: float = 0.0
    k0: float = 1.0
    k1: float = 1.0
    p: float = 3.0
    r_rho: float = 1.0
    k_c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "linear", "power"):
            raise ParameterError(f"unknown dissipation kind {self.kind!r}")
        if self.kind == "linear" and self.alpha <= 0:
            raise ParameterError("linear dissipation requires alpha > 0")
        if self.kind == "power":
            if self.k0 <= 0 or self.k1 < 0 or self.r_rho <= 0:
                raise ParameterError("power dissipation requires k0 > 0, k1 >= 0, r_rho > 0")
            if not (3.0 <= self.p <= 4.0):
                raise ParameterError("power exponent p must lie in [3, 4]")

    @property
    def q_exponent(self) -> float:
        """Conjugate-type exponent (p+2)/(p+1) of the forcing space."""
        return (self.p + 2.0) / (self.p + 1.0)

    def pointwise(self, zx: np.ndarray, zy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "none":
            return np.zeros_like(zx), np.zeros_like(zy)
        if self.kind == "linear":
            return self.alpha * zx, self.alpha * zy
        mag = np.sqrt(zx * zx + zy * zy)
        fac = self.alpha + self.k1 * mag**self.p
        return fac * zx, fac * zy

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DissipationSpec":
        return cls(**d)


@dataclass(frozen=True)
class TrigPoly:
    """Trigonometric polynomial in 2*pi*t/T; exactly T-periodic."""

    a0: float = 0.0
    cos: tuple = ()
    sin: tuple = ()

    def __call__(self, t: float, period: float) -> float:
        w = 2.0 * np.pi * t / period
        val = self.a0
        for k, a in enumerate(self.cos, start=1):
            val += a * np.cos(k * w)
        for k, b in enumerate(self.sin, start=1):
            val += b * np.sin(k * w)
        return val

    def to_dict(self) -> dict:
        return {"a0": self.a0, "cos": list(self.cos), "sin": list(self.sin)}

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        return cls(d.get("a0", 0.0), tuple(d.get("cos", ())), tuple(d.get("sin", ())))


def _shape_scalar(grid: Grid2D, shape: dict) -> np.ndarray:
    """Spatial profile for the scalar forcing: cosine modes are mean-zero
    unless (jx, jy) = (0, 0)."""
    x, y = grid.xy
    jx, jy = int(shape.get("jx", 1)), int(shape.get("jy", 0))
    amp = float(shape.get("amplitude", 1.0))
    return amp * np.cos(jx * np.pi * x / grid.lx) * np.cos(jy * np.pi * y / grid.ly)


def _shape_vector(grid: Grid2D, shape: dict) -> tuple[np.ndarray, np.ndarray]:
    """Spatial profile for the vector forcing: sine products, zero on the
    boundary by construction."""
    x, y = grid.xy
    jx, jy = int(shape.get("jx", 1)), int(shape.get("jy", 1))
    amp = float(shape.get("amplitude", 1.0))
    mode = amp * np.sin(jx * np.pi * x / grid.lx) * np.sin(jy * np.pi * y / grid.ly)
    comp = shape.get("component", "x")
    zero = np.zeros(grid.shape)
    return (mode, zero) if comp == "x" else (zero, mode)


@dataclass
class Forcing:
    """T-periodic forcing as a sum of separable terms g(t)*phi(x, y).

    Each term is {"target": "f1"|"f2", "g": TrigPoly dict, "shape": {...}}.
    """

    period: float
    terms: list = field(default_factory=list)

    def __post_init__(self):
        if self.period <= 0:
            raise ParameterError("forcing period must be positive")
        for term in self.terms:
            if term.get("target") not in ("f1", "f2"):
                raise ParameterError("forcing term target must be 'f1' or 'f2'")

    @classmethod
    def zero(cls, period: float = 1.0) -> "Forcing":
        return cls(period=period, terms=[])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def f1(self, grid: Grid2D, t: float) -> ScalarField:
        acc = np.zeros(grid.shape)
        for term in self.terms:
            if term["target"] != "f1":
                continue
            g = TrigPoly.from_dict(term.get("g", {}))(t, self.period)
            acc += g * _shape_scalar(grid, term.get("shape", {}))
        return ScalarField(grid, acc, bc="none")

    def f2(self, grid: Grid2D, t: float) -> VectorField2:
        ax = np.zeros(grid.shape)
        ay = np.zeros(grid.shape)
        for term in self.terms:
            if term["target"] != "f2":
                continue
            g = TrigPoly.from_dict(term.get("g", {}))(t, self.period)
            px, py = _shape_vector(grid, term.get("shape", {}))
            ax += g * px
            ay += g * py
        return VectorField2(grid, ax, ay, bc="none")

    def l1_l2_norm(self, grid: Grid2D, n_steps: int = 200) -> float:
        """Time-trapezoid approximation of int_0^T |f(t)|_L2 dt over one
        period (both components combined)."""
        ts = np.linspace(0.0, self.period, n_steps + 1)
        vals = []
        for t in ts:
            v = norm_l2(self.f2(grid, t)) ** 2 + norm_l2(self.f1(grid, t)) ** 2
            vals.append(np.sqrt(v))
        return float(np.trapezoid(vals, ts))

    def l1_h1_norm(self, grid: Grid2D, n_steps: int = 200) -> float:
        """int_0^T ||f(t)||_H1 dt with the discrete H1 norm."""
        ts = np.linspace(0.0, self.period, n_steps + 1)
        vals = []
        for t in ts:
            s = self.f1(grid, t)
            v = self.f2(grid, t)
            sq = (
                norm_l2(s) ** 2
                + grad_edge_inner(s.values, s.values, grid)
                + norm_l2(v) ** 2
                + grad_edge_inner(v.ux, v.ux, grid)
                + grad_edge_inner(v.uy, v.uy, grid)
            )
            vals.append(np.sqrt(sq))
        return float(np.trapezoid(vals, ts))

    def to_dict(self) -> dict:
        return {"period": self.period, "terms": self.terms}

    @classmethod
    def from_dict(cls, d: dict) -> "Forcing":
        return cls(period=float(d["period"]), terms=list(d.get("terms", [])))


@dataclass
class State:
    """Snapshot (u, u', h, t) of the coupled system."""

    u: VectorField2
    ut: VectorField2
    h: ScalarField
    t: float = 0.0

    def __post_init__(self):
        if not (self.u.grid == self.ut.grid == self.h.grid):
            raise DomainMismatchError("state fields live on different grids")
        if self.u.bc != "dirichlet_zero" or self.ut.bc != "dirichlet_zero":
            raise ContractViolationError("u, u' must be dirichlet_zero")
        if self.h.bc != "neumann":
            raise ContractViolationError("h must be neumann")

    @property
    def grid(self) -> Grid2D:
        return self.u.grid

    def copy(self) -> "State":
        return State(self.u.copy(), self.ut.copy(), self.h.copy(), self.t)

    def with_time(self, t: float) -> "State":
        return State(self.u.copy(), self.ut.copy(), self.h.copy(), t)

    def scaled(self, factor: float) -> "State":
        g = self.grid
        return State(
            VectorField2(g, factor * self.u.ux, factor * self.u.uy, bc="dirichlet_zero"),
            VectorField2(g, factor * self.ut.ux, factor * self.ut.uy, bc="dirichlet_zero"),
            ScalarField(g, factor * self.h.values, bc="neumann"),
            self.t,
        )

    @classmethod
    def zero(cls, grid: Grid2D, t: float = 0.0) -> "State":
        return cls(
            VectorField2.zeros(grid, bc="dirichlet_zero"),
            VectorField2.zeros(grid, bc="dirichlet_zero"),
            ScalarField.zeros(grid, bc="neumann"),
            t,
        )


# ---------------------------------------------------------------------------
# coupling terms

def lorentz_force(h: ScalarField, params: MaterialParams) -> VectorField2:
    """Magnetic body-force contribution -mu0*(b0 + h)*grad h on the
    right-hand side of the elastic equation."""
    if h.bc != "neumann":
        raise ContractViolationError("lorentz_force requires a Neumann field")
    g = gradient(h)
    fac = -params.mu0 * (params.b0 + h.values)
    return VectorField2(h.grid, fac * g.ux, fac * g.uy, bc="none")


def induction_term(ut: VectorField2, h: ScalarField, params: MaterialParams) -> ScalarField:
    """Right-hand-side contribution -div((b0 + h) u') of the magnetic
    equation; integrates to zero because the flux vanishes on the boundary."""
    if ut.bc != "dirichlet_zero":
        raise ContractViolationError("induction_term requires dirichlet_zero u'")
    fac = params.b0 + h.values
    flux = VectorField2(ut.grid, fac * ut.ux, fac * ut.uy, bc="dirichlet_zero")
    d = divergence(flux)
    return ScalarField(ut.grid, -d.values, bc="none")


def dissipation_eval(spec: DissipationSpec, w: VectorField2) -> VectorField2:
    """Pointwise dissipation law applied to a velocity field."""
    rx, ry = spec.pointwise(w.ux, w.uy)
    if w.bc == "dirichlet_zero":
        rx, ry = pin_boundary(rx), pin_boundary(ry)
    return VectorField2(w.grid, rx, ry, bc=w.bc)


# ---------------------------------------------------------------------------
# dissipation-law validators

def _sample_shells(rng: np.random.Generator, n: int, r_max: float) -> np.ndarray:
    """Random 2-vectors with radii spread over (0, r_max]."""
    radii = r_max * (np.arange(1, n + 1) / n)
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def validate_h2(spec: DissipationSpec, n_samples: int = 10_000, seed: int = 0) -> dict:
    """Sampled check of the polynomial dissipation hypotheses

        (rho(z), z) >= k0 |z|^{p+2}        for all z,
        |rho(z)|   <= k1_bound |z|^{p+1}   for |z| >= r_rho,

    over shells |z| in (0, 10*r_rho].  The upper bound is checked against
    the law's k1 plus the linear part's worst-case contribution.
    """
    if spec.kind != "power":
        raise ParameterError("validate_h2 applies to power-law dissipation")
    rng = np.random.default_rng(seed)
    z = _sample_shells(rng, n_samples, 10.0 * spec.r_rho)
    rx, ry = spec.pointwise(z[:, 0], z[:, 1])
    mag = np.hypot(z[:, 0], z[:, 1])
    pair = rx * z[:, 0] + ry * z[:, 1]
    lower = pair - spec.k0 * mag ** (spec.p + 2.0)
    i_lo = int(np.argmin(lower))
    k1_bound = spec.k1 + spec.alpha / spec.r_rho**spec.p
    outer = mag >= spec.r_rho
    rho_mag = np.hypot(rx, ry)
    upper = np.where(outer, k1_bound * mag ** (spec.p + 1.0) - rho_mag, np.inf)
    i_up = int(np.argmin(upper))
    report = {
        "q": spec.q_exponent,
        "margin_lower": float(lower.min()),
        "worst_shell_lower": float(mag[i_lo]),
        "margin_upper": float(upper[i_up]) if np.isfinite(upper[i_up]) else None,
        "worst_shell_upper": float(mag[i_up]) if np.isfinite(upper[i_up]) else None,
        "k1_bound": k1_bound,
        "n_samples": n_samples,
    }
    report["passed"] = bool(
        lower.min() >= -1e-12 and (report["margin_upper"] is None or report["margin_upper"] >= -1e-12)
    )
    return report


def validate_kc(spec: DissipationSpec, n_samples: int = 10_000, seed: int = 0) -> dict:
    """Sampled check of the monotonicity condition

        (rho(u + w) - rho(u), z) >= k_c (w, z)

    with the increment direction z = w (the pairing used in the decay
    argument; a literal all-z statement only admits linear laws).  The
    linear law satisfies it with equality at k_c = alpha.
    """
    rng = np.random.default_rng(seed)
    r_scale = 5.0 * (spec.r_rho if spec.kind == "power" else 1.0)
    u = _sample_shells(rng, n_samples, r_scale)
    w = _sample_shells(rng, n_samples, r_scale)[rng.permutation(n_samples)]
    rux, ruy = spec.pointwise(u[:, 0], u[:, 1])
    rvx, rvy = spec.pointwise(u[:, 0] + w[:, 0], u[:, 1] + w[:, 1])
    lhs = (rvx - rux) * w[:, 0] + (rvy - ruy) * w[:, 1]
    rhs_ = spec.k_c * (w[:, 0] ** 2 + w[:, 1] ** 2)
    margin = lhs - rhs_
    i = int(np.argmin(margin))
    scale = max(1.0, float(np.abs(rhs_).max()))
    passed = bool(margin[i] >= -1e-12 * scale)
    report = {
        "k_c": spec.k_c,
        "margin": float(margin[i]),
        "passed": passed,
        "n_samples": n_samples,
    }
    if not passed:
        report["witness"] = {
            "u": [float(u[i, 0]), float(u[i, 1])],
            "w": [float(w[i, 0]), float(w[i, 1])],
            "z": [float(w[i, 0]), float(w[i, 1])],
        }
    return report


# ---------------------------------------------------------------------------
# right-hand side

def rhs(
    state: State,
    params: MaterialParams,
    spec: DissipationSpec,
    forcing: Forcing,
) -> tuple[VectorField2, ScalarField]:
    """Assembled right-hand side (acceleration, dh/dt) of the full system."""
    g = state.grid
    terms_v = {
        "elastic": lame_apply(state.u, params.mu, params.lam),
        "dissipation": dissipation_eval(spec, state.ut),
        "lorentz": lorentz_force(state.h, params),
        "f2": forcing.f2(g, state.t),
    }
    terms_s = {
        "diffusion": laplacian_neumann(state.h),
        "induction": induction_term(state.ut, state.h, params),
        "f1": forcing.f1(g, state.t),
    }
    for name, term in terms_v.items():
        if not (np.all(np.isfinite(term.ux)) and np.all(np.isfinite(term.uy))):
            raise DivergedStateError(name, state.t)
    for name, term in terms_s.items():
        if not np.all(np.isfinite(term.values)):
            raise DivergedStateError(name, state.t)
    acc_x = (
        -terms_v["elastic"].ux
        - terms_v["dissipation"].ux
        + terms_v["lorentz"].ux
        + terms_v["f2"].ux
    ) / params.rho_m
    acc_y = (
        -terms_v["elastic"].uy
        - terms_v["dissipation"].uy
        + terms_v["lorentz"].uy
        + terms_v["f2"].uy
    ) / params.rho_m
    acc = VectorField2(g, pin_boundary(acc_x), pin_boundary(acc_y), bc="dirichlet_zero")
    hdot = ScalarField(
        g,
        params.nu1 * terms_s["diffusion"].values
        + terms_s["induction"].values
        + terms_s["f1"].values,
        bc="none",
    )
    return acc, hdot


# ---------------------------------------------------------------------------
# Galerkin eigenbasis

MAX_DENSE_DOF = 5000


@dataclass
class GalerkinBasis:
    """Leading eigenpairs of the elastic and magnetic bilinear forms,
    mass-orthonormal under the trapezoid quadrature."""

    grid: Grid2D
    m: int
    m_magnetic: int
    elastic_vals: np.ndarray       # (m,)
    elastic_vecs: np.ndarray       # (2*n_interior, m), packed interior DOFs
    magnetic_vals: np.ndarray      # (m_magnetic,)
    magnetic_vecs: np.ndarray      # (n_nodes, m_magnetic)

    def elastic_mode(self, j: int) -> VectorField2:
        return unpack_interior(self.grid, self.elastic_vecs[:, j])

    def magnetic_mode(self, k: int) -> ScalarField:
        return ScalarField(self.grid, self.magnetic_vecs[:, k].reshape(self.grid.shape), bc="neumann")

    def save(self, path) -> None:
        np.savez(
            path,
            signature=self.grid.signature(),
            grid=np.array([self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly]),
            m=self.m,
            m_magnetic=self.m_magnetic,
            elastic_vals=self.elastic_vals,
            elastic_vecs=self.elastic_vecs,
            magnetic_vals=self.magnetic_vals,
            magnetic_vecs=self.magnetic_vecs,
        )

    @classmethod
    def load(cls, path, grid: Grid2D) -> "GalerkinBasis":
        data = np.load(path, allow_pickle=False)
        if str(data["signature"]) != grid.signature():
            raise DomainMismatchError("basis cache was built for a different grid")
        return cls(
            grid=grid,
            m=int(data["m"]),
            m_magnetic=int(data["m_magnetic"]),
            elastic_vals=data["elastic_vals"],
            elastic_vecs=data["elastic_vecs"],
            magnetic_vals=data["magnetic_vals"],
            magnetic_vecs=data["magnetic_vecs"],
        )


def build_galerkin_basis(
    grid: Grid2D,
    params: MaterialParams,
    m: int,
    m_magnetic: int | None = None,
) -> GalerkinBasis:
    """First m eigenpairs of the elastic form and m_magnetic of the
    magnetic form against the quadrature mass.  Dense symmetric solve;
    limited to MAX_DENSE_DOF interior unknowns."""
    if m_magnetic is None:
        m_magnetic = m
    ni = grid.n_interior
    n_nodes = grid.n_nodes
    if 2 * ni > MAX_DENSE_DOF or n_nodes > MAX_DENSE_DOF:
        raise ParameterError(f"grid too large for dense eigensolve (limit {MAX_DENSE_DOF} DOF)")
    if m < 1 or m > 2 * ni:
        raise ParameterError(f"need 1 <= m <= {2 * ni} elastic modes")
    if m_magnetic < 1 or m_magnetic > n_nodes:
        raise ParameterError(f"need 1 <= m_magnetic <= {n_nodes} magnetic modes")

    mask = interior_mask(grid)
    wv = np.concatenate([grid.weights[mask], grid.weights[mask]])
    a_op = lame_operator_matrix(grid, params.mu, params.lam)
    k_el = wv[:, None] * a_op
    k_el = 0.5 * (k_el + k_el.T)
    vals, vecs = scipy.linalg.eigh(k_el, np.diag(wv), subset_by_index=(0, m - 1))

    ws = grid.weights.ravel()
    lap = neumann_laplacian_matrix(grid)
    k_mag = ws[:, None] * (params.nu1 * (-lap))
    k_mag = 0.5 * (k_mag + k_mag.T) + np.diag(ws)
    mvals, mvecs = scipy.linalg.eigh(k_mag, np.diag(ws), subset_by_index=(0, m_magnetic - 1))

    return GalerkinBasis(
        grid=grid,
        m=m,
        m_magnetic=m_magnetic,
        elastic_vals=vals,
        elastic_vecs=vecs,
        magnetic_vals=mvals,
        magnetic_vecs=mvecs,
    )


def project(basis: GalerkinBasis, field_) -> np.ndarray:
    """Mass-orthogonal coefficients of a field in the basis span."""
    if isinstance(field_, VectorField2):
        if field_.grid != basis.grid:
            raise DomainMismatchError("field grid does not match basis grid")
        mask = interior_mask(basis.grid)
        wv = np.concatenate([basis.grid.weights[mask], basis.grid.weights[mask]])
        return basis.elastic_vecs.T @ (wv * pack_interior(field_))
    if isinstance(field_, ScalarField):
        if field_.grid != basis.grid:
            raise DomainMismatchError("field grid does not match basis grid")
        ws = basis.grid.weights.ravel()
        return basis.magnetic_vecs.T @ (ws * field_.values.ravel())
    raise DomainMismatchError("project() accepts ScalarField or VectorField2")


def reconstruct(basis: GalerkinBasis, coeffs: np.ndarray, kind: str = "elastic"):
    """Field represented by the coefficient vector."""
    coeffs = np.asarray(coeffs, dtype=float)
    if kind == "elastic":
        if coeffs.shape != (basis.m,):
            raise DomainMismatchError(f"expected {basis.m} elastic coefficients")
        return unpack_interior(basis.grid, basis.elastic_vecs @ coeffs)
    if kind == "magnetic":
        if coeffs.shape != (basis.m_magnetic,):
            raise DomainMismatchError(f"expected {basis.m_magnetic} magnetic coefficients")
        return ScalarField(
            basis.grid, (basis.magnetic_vecs @ coeffs).reshape(basis.grid.shape), bc="neumann"
        )
    raise ParameterError("kind must be 'elastic' or 'magnetic'")


def random_state(
    grid: Grid2D,
    basis: GalerkinBasis,
    seed: int,
    amplitude: float = 1.0,
    n_modes: int | None = None,
    mean_zero_h: bool = True,
) -> State:
    """Random eigenmode combination with controlled energy scale."""
    rng = np.random.default_rng(seed)
    mel = n_modes or basis.m
    mmag = n_modes or basis.m_magnetic
    mel = min(mel, basis.m)
    mmag = min(mmag, basis.m_magnetic)
    cu = np.zeros(basis.m)
    cv = np.zeros(basis.m)
    ch = np.zeros(basis.m_magnetic)
    cu[:mel] = rng.standard_normal(mel) / np.sqrt(np.maximum(basis.elastic_vals[:mel], 1.0))
    cv[:mel] = rng.standard_normal(mel)
    ch[:mmag] = rng.standard_normal(mmag)
    if mean_zero_h:
        ch[0] = 0.0  # drop the constant magnetic mode
    u = reconstruct(basis, amplitude * cu, "elastic")
    ut = reconstruct(basis, amplitude * cv, "elastic")
    h = reconstruct(basis, amplitude * ch, "magnetic")
    return State(u, ut, h, 0.0)


# ---------------------------------------------------------------------------
# parameter files

def params_to_json(
    material: MaterialParams,
    dissipation: DissipationSpec,
    forcing: Forcing,
) -> str:
    return json.dumps(
        {
            "material": material.to_dict(),
            "dissipation": dissipation.to_dict(),
            "forcing": forcing.to_dict(),
        },
        indent=2,
    )


def params_from_json(text: str) -> tuple[MaterialParams, DissipationSpec, Forcing]:
    obj = json.loads(text)
    return (
        MaterialParams.from_dict(obj.get("material", {})),
        DissipationSpec.from_dict(obj.get("dissipation", {})),
        Forcing.from_dict(obj.get("forcing", {"period": 1.0})),
    )
