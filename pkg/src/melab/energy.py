"""Energy functionals, inequality constants and decay diagnostics.

All quadratic forms use the edge-compatible gradient quadrature of
:mod:`melab.grid`, so the reported dissipation pairs exactly with the
discrete diffusion operator and the per-step energy balance closes to the
integrator's truncation error rather than to the mesh width.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Grid2D,
    MelabError,
    ParameterError,
    ScalarField,
    VectorField2,
    bilinear_a2,
    divergence,
    grad_edge_inner,
    inner,
    lame_apply,
    laplacian_neumann,
    norm_l2,
)
from .model import (
    DissipationSpec,
    Forcing,
    MaterialParams,
    State,
    build_galerkin_basis,
    dissipation_eval,
)


@dataclass
class EnergySample:
    t: float
    e_total: float
    e1: float
    e_p: float = 0.0
    g_eps: float = 0.0
    grad_h_sq: float = 0.0
    lh_tilde_sq: float = 0.0

    def row(self, residual: float = 0.0) -> list[float]:
        return [
            self.t, self.e_total, self.e1, self.e_p, self.g_eps,
            self.grad_h_sq, self.lh_tilde_sq, residual,
        ]


CSV_HEADER = "t,e_total,e1,e_p,g,grad_h_sq,lh_sq,residual"


@dataclass
class ConstantsLedger:
    """Named inequality constants with provenance (measured vs configured)."""

    entries: dict = field(default_factory=dict)

    def set(self, name: str, value: float, provenance: str) -> None:
        if value < 0:
            raise ParameterError(f"constant {name} must be nonnegative, got {value}")
        if provenance not in ("measured", "configured"):
            raise ParameterError("provenance must be 'measured' or 'configured'")
        self.entries[name] = {"value": float(value), "provenance": provenance}

    def value(self, name: str) -> float:
        if name not in self.entries:
            raise KeyError(f"constant {name!r} not in ledger")
        return self.entries[name]["value"]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def to_json(self) -> str:
        return json.dumps(self.entries, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConstantsLedger":
        return cls(entries=json.loads(text))


# ---------------------------------------------------------------------------
# energies

def energy_total(state: State, params: MaterialParams) -> float:
    """Total energy: kinetic + elastic + magnetic, the magnetic term
    weighted by mu0 so the dissipation identity closes for any mu0."""
    g = state.grid
    kin = params.rho_m * inner(state.ut, state.ut)
    el = params.mu * (
        grad_edge_inner(state.u.ux, state.u.ux, g)
        + grad_edge_inner(state.u.uy, state.u.uy, g)
    )
    dv = divergence(state.u)
    el += (params.lam + params.mu) * inner(dv, dv)
    mag = params.mu0 * inner(state.h, state.h)
    return 0.5 * (kin + el + mag)


def energy_e1(state: State, params: MaterialParams) -> float:
    """Second-level energy: elastic norm of u', squared elastic operator of
    u, and the gradient seminorm of h."""
    lu = lame_apply(state.u, params.mu, params.lam)
    val = (
        bilinear_a2(state.ut, state.ut, params.mu, params.lam)
        + inner(lu, lu)
        + grad_edge_inner(state.h.values, state.h.values, state.grid)
    )
    return 0.5 * val


def energy_perturbation(
    v: VectorField2, vt: VectorField2, b: ScalarField, params: MaterialParams
) -> float:
    """Perturbation energy: |v'|^2 + elastic form of v + mu0 |b|^2, halved."""
    val = (
        inner(vt, vt)
        + bilinear_a2(v, v, params.mu, params.lam)
        + params.mu0 * inner(b, b)
    )
    return 0.5 * val


def lyapunov_g(
    state: State,
    eps_or_eta: float,
    alpha: float,
    params: MaterialParams,
    kind: str = "total",
) -> float:
    """Shifted energy functional E + eps*(u', u) + (alpha*eps/2)|u|^2.

    kind 'total' uses the full energy of the state; kind 'perturbation'
    reads the state fields as a perturbation triple (v, v', b).
    """
    if eps_or_eta <= 0:
        raise ParameterError("eps/eta must be positive")
    if kind == "total":
        base = energy_total(state, params)
    elif kind == "perturbation":
        base = energy_perturbation(state.u, state.ut, state.h, params)
    else:
        raise ParameterError("kind must be 'total' or 'perturbation'")
    cross = inner(state.ut, state.u)
    return base + eps_or_eta * cross + 0.5 * alpha * eps_or_eta * inner(state.u, state.u)


_POINCARE_CACHE: dict = {}


def poincare_constant(grid: Grid2D, params: MaterialParams, basis=None) -> float:
    """Discrete Poincare constant 1/sqrt(lambda_1) of the elastic form:
    |v|_2 <= C * a2(v, v)^{1/2}, sharp on the ground mode."""
    key = (grid.signature(), params.mu, params.lam)
    if basis is None and key in _POINCARE_CACHE:
        return _POINCARE_CACHE[key]
    if basis is None:
        basis = build_galerkin_basis(grid, params, m=1, m_magnetic=1)
    lam1 = float(basis.elastic_vals[0])
    if lam1 <= 0:
        raise MelabError("elastic eigensolve returned a nonpositive ground eigenvalue")
    c = 1.0 / np.sqrt(lam1)
    _POINCARE_CACHE[key] = c
    return c


def admissible_shift(alpha: float, nu1: float, c_omega: float) -> float:
    """Default eps/eta: half the admissible ceiling min(1, C^-2, alpha/2, nu1)."""
    return 0.5 * min(1.0, c_omega**-2, alpha / 2.0 if alpha > 0 else np.inf, nu1)


# ---------------------------------------------------------------------------
# trajectory diagnostics

def grad_h_squared(h: ScalarField) -> float:
    return grad_edge_inner(h.values, h.values, h.grid)


def lh_tilde_squared(h: ScalarField) -> float:
    """Squared L2 norm of the magnetic operator output (the Laplacian of h)."""
    lap = laplacian_neumann(h)
    return inner(lap, lap)


def energy_identity_residual(
    traj,
    params: MaterialParams,
    spec: DissipationSpec | None = None,
    forcing: Forcing | None = None,
) -> dict:
    """Per-interval residual of the discrete dissipation balance

        dE/dt + (rho(u'), u') + mu0*nu1*|grad h|^2
            = (f2, u') + mu0*(f1, h)

    with midpoint (state-average) sampling between consecutive samples.
    Returns the residual series and its max absolute value.
    """
    spec = spec if spec is not None else traj.dissipation
    forcing = forcing if forcing is not None else traj.forcing
    samples = traj.samples
    if len(samples) < 3:
        raise ParameterError("need at least 3 trajectory samples")
    g = samples[0].grid
    t_mid, res = [], []
    for a, b in zip(samples[:-1], samples[1:]):
        dt = b.t - a.t
        ea = energy_total(a, params)
        eb = energy_total(b, params)
        mid_ut = VectorField2(
            g, 0.5 * (a.ut.ux + b.ut.ux), 0.5 * (a.ut.uy + b.ut.uy), bc="dirichlet_zero"
        )
        mid_h = ScalarField(g, 0.5 * (a.h.values + b.h.values), bc="neumann")
        tm = 0.5 * (a.t + b.t)
        r = (eb - ea) / dt
        r += params.mu0 * params.nu1 * grad_h_squared(mid_h)
        r += inner(dissipation_eval(spec, mid_ut), mid_ut)
        if not forcing.is_zero:
            r -= inner(forcing.f2(g, tm), mid_ut)
            r -= params.mu0 * inner(forcing.f1(g, tm), ScalarField(g, mid_h.values))
        t_mid.append(tm)
        res.append(r)
    res = np.asarray(res)
    return {
        "t": np.asarray(t_mid),
        "residual": res,
        "max_abs": float(np.max(np.abs(res))),
    }


def accumulate_ch(traj, params: MaterialParams) -> float:
    """Supremum over the sampled horizon of int_0^t |Lap h|^2 ds
    (time trapezoid); nondecreasing in the horizon."""
    ts = np.array([s.t for s in traj.samples])
    vals = np.array([lh_tilde_squared(s.h) for s in traj.samples])
    if len(ts) < 2:
        return 0.0
    partial = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(ts))])
    return float(partial.max())


def decay_rate_fit(ts, values, window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Least-squares slope of log(value) against t; returns (rate, r^2)."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        keep = (ts >= window[0]) & (ts <= window[1])
        ts, values = ts[keep], values[keep]
    if len(ts) < 10:
        raise ParameterError("decay fit needs at least 10 points in the window")
    if np.any(values <= 0):
        raise ParameterError("decay fit requires positive values")
    logs = np.log(values)
    coeffs = np.polyfit(ts, logs, 1)
    fit = np.polyval(coeffs, ts)
    ss_res = float(np.sum((logs - fit) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(coeffs[0]), r2


# ---------------------------------------------------------------------------
# constants assembly

def assemble_constants(
    grid: Grid2D,
    params: MaterialParams,
    alpha: float,
    basis=None,
    c_e: float | None = None,
    c_h: float | None = None,
    ep0: float | None = None,
    c_mu: float = 1.0,
) -> ConstantsLedger:
    """Measure the discrete inequality constants used by the smallness
    conditions and the perturbation decay bound.

    The coercivity constant of the damped perturbation estimate is measured
    from the discrete eigenvalues:

        c_big0 = min(alpha, eta, 2*lam_neumann_1 * max(0, nu1/4 - 2*eta*c_e))

    where lam_neumann_1 is the smallest nonzero Neumann eigenvalue of the
    scalar Laplacian (mean-zero h carries at least that much gradient).
    """
    if basis is None:
        basis = build_galerkin_basis(grid, params, m=1, m_magnetic=2)
    ledger = ConstantsLedger()
    c_omega = 1.0 / np.sqrt(float(basis.elastic_vals[0]))
    ledger.set("c_omega", c_omega, "measured")
    ledger.set("c_mu", c_mu, "configured")
    eps = admissible_shift(alpha, params.nu1, c_omega)
    ledger.set("eps", eps, "measured")

    # admissible eta for the perturbation functional
    eta = 0.5 * min(1.0, alpha / (2.0 * c_omega**2)) if alpha > 0 else 0.0
    if c_e is not None:
        ledger.set("c_e", c_e, "measured")
    if c_h is not None:
        ledger.set("c_h_int", c_h, "measured")
        if ep0 is not None and ep0 > 0 and c_h > 0 and eta > 0:
            # keep eta inside the admissible list's third entry
            lam_n1 = (float(basis.magnetic_vals[1]) - 1.0) / params.nu1
            c0_probe = min(alpha, eta, 2.0 * lam_n1 * max(0.0, params.nu1 / 4.0 - 2.0 * eta * (c_e or 0.0)))
            cap = c0_probe / (c_h * np.sqrt(2.0 * ep0))
            eta = min(eta, 0.5 * cap) if cap > 0 else eta
    ledger.set("eta", eta, "measured")

    lam_n1 = (float(basis.magnetic_vals[1]) - 1.0) / params.nu1 if basis.m_magnetic > 1 else 0.0
    c_big0 = min(
        alpha if alpha > 0 else np.inf,
        eta if eta > 0 else np.inf,
        2.0 * lam_n1 * max(0.0, params.nu1 / 4.0 - 2.0 * eta * (c_e or 0.0)),
    )
    if not np.isfinite(c_big0):
        c_big0 = 0.0
    ledger.set("c_big0", max(c_big0, 0.0), "measured")

    if c_h is not None and ep0 is not None:
        c_big1 = (ledger.value("c_big0") - c_h * np.sqrt(2.0 * ep0) * eta) / (2.0 + alpha)
        ledger.set("c_big1", max(c_big1, 0.0), "measured")
    return ledger
