"""Standalone verifiers: the quadratic continuation lemma, closed-form
smallness conditions, Bessel disk modes, the divergence-ratio scan that
probes property P on rectangles, and trend reporting for long unforced
runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grid import (
    Grid2D,
    MelabError,
    ParameterError,
    ScalarField,
    VectorField2,
    divergence,
    inner,
    norm_l2,
)
from .model import MaterialParams
from . import energy as energy_mod


# ---------------------------------------------------------------------------
# quadratic continuation lemma:  x <= gamma + a x^2

@dataclass(frozen=True)
class BotsenyukInput:
    t_grid: np.ndarray
    x: np.ndarray
    gamma: np.ndarray
    a: float

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        x = np.asarray(self.x, dtype=float)
        g = np.asarray(self.gamma, dtype=float)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "gamma", g)
        if not (len(t) == len(x) == len(g)):
            raise ParameterError("series lengths must match the time grid")
        if len(t) < 1 or np.any(np.diff(t) <= 0):
            raise ParameterError("t_grid must be strictly increasing")
        if self.a <= 0:
            raise ParameterError("a must be positive")
        if np.any(x < 0) or np.any(g < 0):
            raise ParameterError("x and gamma must be nonnegative")


def botsenyuk_check(inp: BotsenyukInput) -> dict:
    """Continuation bound for x <= gamma + a x^2: when the discriminant
    1 - 4 a gamma stays positive and x starts below the smaller root
    xi1 = (1 - sqrt(1-4a*gamma))/(2a), x can never cross xi1."""
    a = inp.a
    disc = 1.0 - 4.0 * a * inp.gamma
    admissible = bool(np.all(disc > 0))
    report = {"a": a, "admissible": admissible}
    if not admissible:
        report["first_failing_t"] = float(inp.t_grid[np.argmax(disc <= 0)])
        return report
    root = np.sqrt(disc)
    xi1 = (1.0 - root) / (2.0 * a)
    xi2 = (1.0 + root) / (2.0 * a)
    hyp = inp.x <= inp.gamma + a * inp.x**2 + 1e-12 * (1.0 + inp.x**2)
    start_ok = bool(inp.x[0] < xi1[0])
    concl = inp.x <= xi1 + 1e-12 * (1.0 + xi1)
    report.update(
        xi1=xi1,
        xi2=xi2,
        hypothesis_met=bool(np.all(hyp)),
        start_below=start_ok,
        conclusion_holds=bool(start_ok and np.all(concl)),
    )
    if not report["conclusion_holds"] and start_ok:
        report["first_violation_t"] = float(inp.t_grid[np.argmax(~concl)])
    return report


# ---------------------------------------------------------------------------
# closed-form smallness conditions

def condition_regularity(e1_0: float, f_h1_l1: float, nu1: float, c_mu: float) -> dict:
    """6 c^2 E1(0) + 2 nu1 sqrt(2) c E1(0)^{1/2} + 8 c nu1 |f| < nu1^2."""
    if e1_0 < 0 or f_h1_l1 < 0 or nu1 <= 0 or c_mu <= 0:
        raise ParameterError("invalid condition inputs")
    lhs = (
        6.0 * c_mu**2 * e1_0
        + 2.0 * nu1 * np.sqrt(2.0) * c_mu * np.sqrt(e1_0)
        + 8.0 * c_mu * nu1 * f_h1_l1
    )
    rhs = nu1**2
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "satisfied": bool(lhs < rhs),
        "margin": float(rhs - lhs),
    }


def condition_regularity_reference(
    e1_0: float, f_h1_l1: float, nu1: float, c_mu: float
) -> dict:
    import mpmath as mp

    with mp.workdps(50):
        c = mp.mpf(c_mu)
        n = mp.mpf(nu1)
        e = mp.mpf(e1_0)
        lhs = 6 * c**2 * e + 2 * n * mp.sqrt(2) * c * mp.sqrt(e) + 8 * c * n * mp.mpf(f_h1_l1)
        rhs = n**2
        return {"lhs": float(lhs), "rhs": float(rhs), "satisfied": bool(lhs < rhs)}


def condition_stability(nu1: float, c_e: float, c_omega: float, c_small: float) -> dict:
    """nu1 > 2 sqrt(C_Omega) max(sqrt(2) C_E, 2 c C_E^2), plus the inline
    requirement nu1 > 2 sqrt(2) C_E sqrt(C_Omega)."""
    if nu1 <= 0 or c_e < 0 or c_omega <= 0 or c_small <= 0:
        raise ParameterError("invalid condition inputs")
    threshold = 2.0 * np.sqrt(c_omega) * max(np.sqrt(2.0) * c_e, 2.0 * c_small * c_e**2)
    inline = 2.0 * np.sqrt(2.0) * c_e * np.sqrt(c_omega)
    return {
        "threshold": float(threshold),
        "satisfied": bool(nu1 > threshold),
        "margin": float(nu1 - threshold),
        "inline_threshold": float(inline),
        "inline_satisfied": bool(nu1 > inline),
    }


def condition_stability_reference(
    nu1: float, c_e: float, c_omega: float, c_small: float
) -> dict:
    import mpmath as mp

    with mp.workdps(50):
        ce = mp.mpf(c_e)
        th = 2 * mp.sqrt(mp.mpf(c_omega)) * max(mp.sqrt(2) * ce, 2 * mp.mpf(c_small) * ce**2)
        return {"threshold": float(th), "satisfied": bool(mp.mpf(nu1) > th)}


# ---------------------------------------------------------------------------
# Bessel J1 and the disk's invariant azimuthal modes

_SERIES_CUTOFF = 12.0


def _j1_series(x: float) -> float:
    half = 0.5 * x
    term = half
    total = term
    for k in range(1, 60):
        term *= -(half * half) / (k * (k + 1))
        total += term
        if abs(term) < 1e-18 * (abs(total) + 1e-300):
            break
    return total


def _bessel_miller(x: float, n_max: int) -> np.ndarray:
    """J_0..J_n by backward three-term recurrence with the classical
    normalization J0 + 2(J2 + J4 + ...) = 1."""
    if x == 0.0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    ax = abs(x)
    start = n_max + int(ax + 12.0 * np.sqrt(ax)) + 40
    jp, j = 0.0, 1e-30
    vals = np.zeros(n_max + 1)
    norm = 0.0
    for n in range(start, -1, -1):
        jm = (2.0 * (n + 1)) / x * j - jp
        jp, j = j, jm
        if n <= n_max:
            vals[n] = j
        if n % 2 == 0:
            norm += 2.0 * j
        if abs(j) > 1e250:
            jp *= 1e-250
            j *= 1e-250
            vals *= 1e-250
            norm *= 1e-250
    norm -= j  # the n = 0 term enters once, not twice
    return vals / norm


def bessel_j1(x: float) -> float:
    ax = abs(x)
    if ax <= _SERIES_CUTOFF:
        return _j1_series(x)
    val = _bessel_miller(ax, 1)[1]
    return -val if x < 0 else val


def _bessel_j(x: float, orders: int) -> np.ndarray:
    """J_0..J_orders at x >= 0, series-checked at small argument."""
    if x <= _SERIES_CUTOFF and orders <= 3:
        return _bessel_miller(x, orders) if x > 0 else _bessel_miller(0.0, orders)
    return _bessel_miller(x, orders)


def bessel_j1_zero(m: int) -> float:
    """m-th positive root of J1 by sign-change bisection; supports m <= 50."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    if m > 50:
        raise ParameterError("roots beyond m = 50 are unsupported")
    beta = (m + 0.25) * np.pi
    lo, hi = beta - 1.5, beta + 1.0
    flo, fhi = bessel_j1(lo), bessel_j1(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise MelabError(f"root bracket failed for m = {m}")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = bessel_j1(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def bessel_root_table(m_max: int) -> list[tuple[int, float]]:
    return [(m, bessel_j1_zero(m)) for m in range(1, m_max + 1)]


@dataclass(frozen=True)
class DiskModeSpec:
    m: int
    zeta_m: float
    radial_points: int = 2000

    def __post_init__(self):
        if self.m < 1 or self.radial_points < 16:
            raise ParameterError("mode index >= 1 and at least 16 radial points")
        if abs(bessel_j1(self.zeta_m)) > 1e-12:
            raise ParameterError("zeta_m is not a root of J1")

    @classmethod
    def build(cls, m: int, radial_points: int = 2000) -> "DiskModeSpec":
        return cls(m=m, zeta_m=bessel_j1_zero(m), radial_points=radial_points)


def _j1_derivatives(x: float) -> tuple[float, float, float]:
    """(J1, J1', J1'') from neighboring orders: J1' = (J0 - J2)/2 and
    J1'' = (J3 - 3 J1)/4 — independent of the ODE being verified."""
    if x <= _SERIES_CUTOFF:
        # term-wise differentiated ascending series
        half = 0.5 * x
        j = jp = jpp = 0.0
        sign = 1.0
        from math import factorial

        for k in range(0, 40):
            c = sign / (factorial(k) * factorial(k + 1) * 2.0 ** (2 * k + 1))
            p = 2 * k + 1
            j += c * x**p
            jp += c * p * x ** (p - 1)
            if p >= 2:
                jpp += c * p * (p - 1) * x ** (p - 2)
            sign = -sign
        return j, jp, jpp
    js = _bessel_miller(x, 3)
    j1 = js[1]
    j1p = 0.5 * (js[0] - js[2])
    j1pp = 0.25 * (js[3] - 3.0 * js[1])
    return j1, j1p, j1pp


def disk_mode_residual(spec: DiskModeSpec, params: MaterialParams) -> dict:
    """Residuals of the azimuthal disk mode xi = (0, J1(zeta r)):
    (i) vector-Laplacian eigen-equation, (ii) divergence, (iii) boundary
    value; plus the closed-form oscillation frequency check."""
    z = spec.zeta_m
    n = spec.radial_points
    r = (np.arange(n) + 0.5) / n          # midpoint rule on (0, 1)
    dr = 1.0 / n
    res_sq = 0.0
    mode_sq = 0.0
    for ri in r:
        x = z * ri
        j, jp, jpp = _j1_derivatives(x)
        # w(r) = J1(zeta r):  w'' + w'/r + (zeta^2 - 1/r^2) w, scaled form
        res = z * z * (jpp + jp / x + (1.0 - 1.0 / (x * x)) * j)
        res_sq += res * res * ri * dr
        mode_sq += j * j * ri * dr
    res_i = float(np.sqrt(2.0 * np.pi * res_sq))
    res_ii = 0.0        # purely azimuthal field with radial profile
    res_iii = abs(bessel_j1(z))
    omega = z * np.sqrt(params.mu / params.rho_m)
    # rho u'' - mu Lap u on u = xi cos(omega t): (-rho omega^2 + mu zeta^2) xi
    wave_defect = abs(-params.rho_m * omega**2 + params.mu * z * z)
    return {
        "m": spec.m,
        "zeta_m": z,
        "residual_eigen": res_i,
        "residual_div": res_ii,
        "residual_boundary": res_iii,
        "mode_l2": float(np.sqrt(2.0 * np.pi * mode_sq)),
        "omega": float(omega),
        "wave_defect": float(wave_defect),
        "induction_source": 0.0,    # div(B0 u') = B0 div u' = 0 identically
    }


# ---------------------------------------------------------------------------
# property P on rectangles: divergence-ratio floor of Dirichlet eigenmodes

def _dirichlet_scalar_matrix(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Dense 5-point Dirichlet Laplacian on interior scalar nodes, with the
    interior node index map."""
    nx, ny = grid.nx, grid.ny
    idx = -np.ones(grid.shape, dtype=int)
    count = 0
    for i in range(1, nx):
        for j in range(1, ny):
            idx[i, j] = count
            count += 1
    dx, dy = grid.lx / nx, grid.ly / ny
    mat = np.zeros((count, count))
    for i in range(1, nx):
        for j in range(1, ny):
            k = idx[i, j]
            mat[k, k] = 2.0 / dx**2 + 2.0 / dy**2
            for di, dj, w in ((1, 0, dx), (-1, 0, dx), (0, 1, dy), (0, -1, dy)):
                kk = idx[i + di, j + dj]
                if kk >= 0:
                    mat[k, kk] = -1.0 / w**2
    return mat, idx


def property_p_scan(grid: Grid2D, params: MaterialParams, m_modes: int) -> dict:
    """Divergence content of componentwise Dirichlet Laplacian eigenmodes.

    Within each degenerate eigenvalue group the minimum of
    ||div xi||^2 / ||xi||^2 over the span is a generalized eigenvalue of
    the divergence Gram against the mass Gram; a positive floor means no
    divergence-free eigenmode, the evidence that the rectangle has
    property P."""
    if m_modes < 1:
        raise ParameterError("need at least one mode")
    mat, idx = _dirichlet_scalar_matrix(grid)
    if mat.shape[0] > 5000:
        raise ParameterError("grid too large for the dense eigenscan")
    vals, vecs = scipy.linalg.eigh(mat, subset_by_index=[0, min(m_modes, mat.shape[0]) - 1])
    diam = float(np.hypot(grid.lx, grid.ly))

    def to_field(vec, component):
        comp = np.zeros(grid.shape)
        comp[idx >= 0] = vec
        zero = np.zeros(grid.shape)
        parts = (comp, zero) if component == 0 else (zero, comp)
        return VectorField2(grid, parts[0], parts[1], bc="dirichlet_zero")

    # group eigenvalues, then min generalized eigenvalue of the div Gram
    groups = []
    start = 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or abs(vals[k] - vals[start]) > 1e-6 * max(1.0, vals[start]):
            groups.append((start, k))
            start = k
    results = []
    for a, b in groups:
        fields = []
        for k in range(a, b):
            fields.append(to_field(vecs[:, k], 0))
            fields.append(to_field(vecs[:, k], 1))
        divs = [divergence(f) for f in fields]
        nf = len(fields)
        gram_d = np.zeros((nf, nf))
        gram_m = np.zeros((nf, nf))
        for i in range(nf):
            for j in range(i, nf):
                gram_d[i, j] = gram_d[j, i] = inner(divs[i], divs[j])
                gram_m[i, j] = gram_m[j, i] = inner(fields[i], fields[j])
        lam_min = float(scipy.linalg.eigh(gram_d, gram_m, eigvals_only=True)[0])
        ratio = np.sqrt(max(lam_min, 0.0)) * diam
        results.append(
            {"eigenvalue": float(vals[a]), "multiplicity": b - a, "div_ratio": float(ratio)}
        )
    return {
        "modes": len(vals),
        "diam": diam,
        "groups": results,
        "min_div_ratio": float(min(g["div_ratio"] for g in results)),
    }


# ---------------------------------------------------------------------------
# long-run trend reporting

def lasalle_report(traj) -> dict:
    """Finite-horizon trends of an unforced, mechanically undamped run:
    h-norms, velocity divergence, and total energy, with fitted rates.
    Descriptive only; no infinite-time claim is asserted."""
    samples = traj.samples
    if len(samples) < 2:
        raise ParameterError("trajectory too short")
    params = traj.params
    ts = np.array([s.t for s in samples])
    h_l2 = np.array([norm_l2(s.h) for s in samples])
    grad_h = np.array([np.sqrt(energy_mod.grad_h_squared(s.h)) for s in samples])
    div_ut = np.array([norm_l2(divergence(s.ut)) for s in samples])
    e = np.array([energy_mod.energy_total(s, params) for s in samples])
    e_increase = float(np.max(np.diff(e), initial=0.0))
    monotone = bool(e_increase <= 1e-9 * max(e[0], 1.0))
    out = {
        "t": ts,
        "h_l2": h_l2,
        "grad_h_l2": grad_h,
        "div_ut_l2": div_ut,
        "energy": e,
        "energy_monotone": monotone,
        "energy_max_increase": e_increase,
        "h_ratio": float(h_l2[-1] / h_l2[0]) if h_l2[0] > 0 else 0.0,
        "energy_ratio": float(e[-1] / e[0]) if e[0] > 0 else 0.0,
    }
    if np.all(h_l2 > 0) and len(ts) >= 10:
        rate, r2 = energy_mod.decay_rate_fit(ts, h_l2**2)
        out["h_sq_fitted_rate"] = float(rate)
        out["h_sq_fit_r2"] = float(r2)
    return out
