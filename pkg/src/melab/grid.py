"""Rectangular nodal grid, fields and mimetic difference operators.

The operator pair (gradient, divergence) satisfies a discrete
integration-by-parts identity under the trapezoid quadrature:

    (grad h, w) + (h, div w) = 0

exactly (to round-off) whenever w vanishes on the boundary.  The Neumann
Laplacian and the elastic operator are assembled from flux differences of
edge-centered gradients, which makes them self-adjoint in the quadrature
inner product and pairs them exactly with the edge-based energy forms in
:mod:`melab.energy`.  That compatibility is what turns the continuous
energy balance of the model into a machine-checkable identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class MelabError(Exception):
    """Base class for all package errors."""


class DomainMismatchError(MelabError):
    """Fields defined on different grids were combined."""


class ContractViolationError(MelabError):
    """A field carried the wrong boundary tag for the operation."""


class ParameterError(MelabError):
    """A physical or numerical parameter violated its constraints."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform nodal grid on the rectangle [0, lx] x [0, ly].

    nx, ny count cells; nodes are (nx+1) x (ny+1).  Field arrays are
    indexed [i, j] with x = i*dx, y = j*dy.
    """

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ParameterError("grid needs nx >= 4 and ny >= 4")
        if self.lx <= 0 or self.ly <= 0:
            raise ParameterError("side lengths must be positive")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx + 1, self.ny + 1)

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_interior(self) -> int:
        return (self.nx - 1) * (self.ny - 1)

    @cached_property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.linspace(0.0, self.lx, self.nx + 1)
        y = np.linspace(0.0, self.ly, self.ny + 1)
        return np.meshgrid(x, y, indexing="ij")

    @cached_property
    def wx(self) -> np.ndarray:
        """Trapezoid quadrature weights along x (length nx+1)."""
        w = np.full(self.nx + 1, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    @cached_property
    def wy(self) -> np.ndarray:
        w = np.full(self.ny + 1, self.dy)
        w[0] = w[-1] = 0.5 * self.dy
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Nodal quadrature weights, shape (nx+1, ny+1)."""
        return np.outer(self.wx, self.wy)

    @cached_property
    def dmat_x(self) -> np.ndarray:
        """Collocated first-derivative matrix along x (SBP: centered
        interior, one-sided boundary rows)."""
        return _sbp_derivative(self.nx + 1, self.dx)

    @cached_property
    def dmat_y(self) -> np.ndarray:
        return _sbp_derivative(self.ny + 1, self.dy)

    @property
    def measure(self) -> float:
        return self.lx * self.ly

    def signature(self) -> str:
        """Stable identifier used by basis caches and archives."""
        return f"{self.nx}x{self.ny}:{self.lx!r}x{self.ly!r}"


def _sbp_derivative(n: int, h: float) -> np.ndarray:
    d = np.zeros((n, n))
    for i in range(1, n - 1):
        d[i, i - 1] = -0.5 / h
        d[i, i + 1] = 0.5 / h
    d[0, 0], d[0, 1] = -1.0 / h, 1.0 / h
    d[-1, -2], d[-1, -1] = -1.0 / h, 1.0 / h
    return d


def _require_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise ParameterError(f"{what} contains non-finite values")


@dataclass
class ScalarField:
    """Nodal scalar field; bc is 'neumann' or 'none'."""

    grid: Grid2D
    values: np.ndarray
    bc: str = "none"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise DomainMismatchError(
                f"scalar values shape {self.values.shape} != grid {self.grid.shape}"
            )
        if self.bc not in ("neumann", "none"):
            raise ContractViolationError(f"unknown scalar bc {self.bc!r}")
        _require_finite(self.values, "scalar field")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.bc)

    @classmethod
    def from_function(cls, grid: Grid2D, fn, bc: str = "none") -> "ScalarField":
        x, y = grid.xy
        return cls(grid, np.asarray(fn(x, y), dtype=float) + np.zeros(grid.shape), bc)

    @classmethod
    def zeros(cls, grid: Grid2D, bc: str = "none") -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), bc)


@dataclass
class VectorField2:
    """Nodal 2-vector field; bc is 'dirichlet_zero' or 'none'."""

    grid: Grid2D
    ux: np.ndarray
    uy: np.ndarray
    bc: str = "none"

    def __post_init__(self):
        self.ux = np.asarray(self.ux, dtype=float)
        self.uy = np.asarray(self.uy, dtype=float)
        for name, a in (("ux", self.ux), ("uy", self.uy)):
            if a.shape != self.grid.shape:
                raise DomainMismatchError(
                    f"{name} shape {a.shape} != grid {self.grid.shape}"
                )
        if self.bc not in ("dirichlet_zero", "none"):
            raise ContractViolationError(f"unknown vector bc {self.bc!r}")
        _require_finite(self.ux, "vector field ux")
        _require_finite(self.uy, "vector field uy")
        if self.bc == "dirichlet_zero":
            for a in (self.ux, self.uy):
                edge = np.concatenate([a[0, :], a[-1, :], a[:, 0], a[:, -1]])
                if np.any(edge != 0.0):
                    raise ContractViolationError(
                        "dirichlet_zero field has nonzero boundary values"
                    )

    def copy(self) -> "VectorField2":
        return VectorField2(self.grid, self.ux.copy(), self.uy.copy(), self.bc)

    @classmethod
    def from_functions(cls, grid: Grid2D, fx, fy, bc: str = "none") -> "VectorField2":
        x, y = grid.xy
        ux = np.asarray(fx(x, y), dtype=float) + np.zeros(grid.shape)
        uy = np.asarray(fy(x, y), dtype=float) + np.zeros(grid.shape)
        if bc == "dirichlet_zero":
            ux = pin_boundary(ux)
            uy = pin_boundary(uy)
        return cls(grid, ux, uy, bc)

    @classmethod
    def zeros(cls, grid: Grid2D, bc: str = "none") -> "VectorField2":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape), bc)


def pin_boundary(a: np.ndarray) -> np.ndarray:
    """Return a copy with boundary nodes set to exactly zero."""
    out = a.copy()
    out[0, :] = out[-1, :] = 0.0
    out[:, 0] = out[:, -1] = 0.0
    return out


def _same_grid(a, b) -> Grid2D:
    if a.grid is not b.grid and a.grid != b.grid:
        raise DomainMismatchError("fields live on different grids")
    return a.grid


# ---------------------------------------------------------------------------
# collocated derivatives (SBP pair)

def _dx(grid: Grid2D, a: np.ndarray) -> np.ndarray:
    return grid.dmat_x @ a


def _dy(grid: Grid2D, a: np.ndarray) -> np.ndarray:
    return a @ grid.dmat_y.T


def gradient(h: ScalarField) -> VectorField2:
    """Second-order collocated gradient; exact on linear fields."""
    g = h.grid
    return VectorField2(g, _dx(g, h.values), _dy(g, h.values), bc="none")


def divergence(w: VectorField2) -> ScalarField:
    """Collocated divergence, negative adjoint of :func:`gradient` for
    fields vanishing on the boundary."""
    g = w.grid
    return ScalarField(g, _dx(g, w.ux) + _dy(g, w.uy), bc="none")


# ---------------------------------------------------------------------------
# edge-based (compatible) gradient machinery

def _edge_diff_x(grid: Grid2D, a: np.ndarray) -> np.ndarray:
    """Forward differences on x-edges, shape (nx, ny+1)."""
    return (a[1:, :] - a[:-1, :]) / grid.dx


def _edge_diff_y(grid: Grid2D, a: np.ndarray) -> np.ndarray:
    return (a[:, 1:] - a[:, :-1]) / grid.dy


def grad_edge_inner(a: np.ndarray, b: np.ndarray, grid: Grid2D) -> float:
    """Edge-quadrature inner product of the two nodal fields' gradients.

    This is the quadratic form whose flux-difference operator is exactly
    :func:`laplacian_neumann` (up to sign), so (lap h, g) = -grad_edge_inner.
    """
    ex = _edge_diff_x(grid, a) * _edge_diff_x(grid, b)
    ey = _edge_diff_y(grid, a) * _edge_diff_y(grid, b)
    sx = float(np.sum(ex * (grid.dx * grid.wy[None, :])))
    sy = float(np.sum(ey * (grid.wx[:, None] * grid.dy)))
    return sx + sy


def _flux_laplacian(grid: Grid2D, a: np.ndarray) -> np.ndarray:
    """Flux differences of edge gradients with zero-flux closure; equals
    -H^{-1} d/da [grad_edge_inner(a, a)/2], the ghost-reflection stencil."""
    ex = _edge_diff_x(grid, a)
    ey = _edge_diff_y(grid, a)
    # node k collects (ex[k] - ex[k-1]) / wx[k]; edge quadrature dx cancels
    # against the 1/dx of the difference, same along y
    outx = np.zeros(grid.shape)
    outx[:-1, :] += ex
    outx[1:, :] -= ex
    outy = np.zeros(grid.shape)
    outy[:, :-1] += ey
    outy[:, 1:] -= ey
    return outx / grid.wx[:, None] + outy / grid.wy[None, :]


def laplacian_neumann(h: ScalarField) -> ScalarField:
    """Five-point Laplacian with ghost-node reflection (zero normal flux).

    Identical to the flux-difference form of the edge gradient under
    trapezoid weights; the output integrates to zero exactly.
    """
    if h.bc != "neumann":
        raise ContractViolationError("laplacian_neumann requires bc='neumann'")
    return ScalarField(h.grid, _flux_laplacian(h.grid, h.values), bc="none")


def _dirichlet_laplacian(grid: Grid2D, a: np.ndarray) -> np.ndarray:
    """Standard 3-point-per-direction Laplacian on interior nodes, boundary
    rows zeroed (acts on the zero-boundary subspace)."""
    out = np.zeros(grid.shape)
    out[1:-1, :] += (a[2:, :] - 2.0 * a[1:-1, :] + a[:-2, :]) / grid.dx**2
    out[:, 1:-1] += (a[:, 2:] - 2.0 * a[:, 1:-1] + a[:, :-2]) / grid.dy**2
    return pin_boundary(out)


def lame_apply(u: VectorField2, mu: float, lam: float) -> VectorField2:
    """Elastic operator  -mu*Lap(u) - (lam+mu)*grad(div u)  with Dirichlet
    stencils; symmetric positive definite on the zero-boundary subspace.
    """
    if u.bc != "dirichlet_zero":
        raise ContractViolationError("lame_apply requires bc='dirichlet_zero'")
    if mu <= 0 or lam <= 0:
        raise ParameterError("Lame constants must satisfy mu > 0, lambda > 0")
    g = u.grid
    out_x = -mu * _dirichlet_laplacian(g, u.ux)
    out_y = -mu * _dirichlet_laplacian(g, u.uy)
    q = (_dx(g, u.ux) + _dy(g, u.uy)) * g.weights
    out_x += (lam + mu) * pin_boundary(g.dmat_x.T @ q) / g.weights
    out_y += (lam + mu) * pin_boundary(q @ g.dmat_y) / g.weights
    return VectorField2(g, pin_boundary(out_x), pin_boundary(out_y), bc="dirichlet_zero")


# ---------------------------------------------------------------------------
# quadrature

def inner(a, b) -> float:
    """Trapezoid nodal inner product of two fields of the same kind."""
    g = _same_grid(a, b)
    if isinstance(a, ScalarField) and isinstance(b, ScalarField):
        return float(np.sum(a.values * b.values * g.weights))
    if isinstance(a, VectorField2) and isinstance(b, VectorField2):
        return float(np.sum((a.ux * b.ux + a.uy * b.uy) * g.weights))
    raise DomainMismatchError("inner() needs two scalar or two vector fields")


def norm_l2(a) -> float:
    return float(np.sqrt(max(inner(a, a), 0.0)))


def mean(h: ScalarField) -> float:
    """Quadrature average of a scalar field over the domain."""
    return float(np.sum(h.values * h.grid.weights) / h.grid.measure)


# ---------------------------------------------------------------------------
# bilinear forms

def bilinear_a1(h: ScalarField, g: ScalarField, nu1: float) -> float:
    """Magnetic form  nu1*(grad h, grad g) + (h, g)  (edge-based gradient)."""
    if nu1 <= 0:
        raise ParameterError("nu1 must be positive")
    if h.bc != "neumann" or g.bc != "neumann":
        raise ContractViolationError("bilinear_a1 requires Neumann-tagged fields")
    grid = _same_grid(h, g)
    return nu1 * grad_edge_inner(h.values, g.values, grid) + inner(h, g)


def bilinear_a2(u: VectorField2, w: VectorField2, mu: float, lam: float) -> float:
    """Elastic form  mu*sum_i (grad u_i, grad w_i) + (lam+mu)*(div u, div w).

    Uses the edge gradient for the mu term and the collocated divergence,
    so it agrees with (lame_apply(u), w) to round-off on zero-boundary fields.
    """
    if mu <= 0 or lam <= 0:
        raise ParameterError("Lame constants must satisfy mu > 0, lambda > 0")
    if u.bc != "dirichlet_zero" or w.bc != "dirichlet_zero":
        raise ContractViolationError("bilinear_a2 requires dirichlet_zero fields")
    g = _same_grid(u, w)
    grad_part = grad_edge_inner(u.ux, w.ux, g) + grad_edge_inner(u.uy, w.uy, g)
    div_part = inner(divergence(u), divergence(w))
    return mu * grad_part + (lam + mu) * div_part


# ---------------------------------------------------------------------------
# dense operator assembly (desk-scale eigenproblems and implicit solves)

def interior_mask(grid: Grid2D) -> np.ndarray:
    m = np.zeros(grid.shape, dtype=bool)
    m[1:-1, 1:-1] = True
    return m


def neumann_laplacian_matrix(grid: Grid2D) -> np.ndarray:
    """Dense matrix of laplacian_neumann over all nodes (row-major)."""
    n = grid.n_nodes
    out = np.empty((n, n))
    eye = np.zeros(grid.shape)
    idx = 0
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            eye[i, j] = 1.0
            out[:, idx] = _flux_laplacian(grid, eye).ravel()
            eye[i, j] = 0.0
            idx += 1
    return out


def lame_operator_matrix(grid: Grid2D, mu: float, lam: float) -> np.ndarray:
    """Dense matrix of lame_apply on interior vector DOFs, ordered
    (ux interior row-major, then uy interior)."""
    mask = interior_mask(grid)
    ni = grid.n_interior
    out = np.empty((2 * ni, 2 * ni))
    for k in range(2 * ni):
        ux = np.zeros(grid.shape)
        uy = np.zeros(grid.shape)
        comp, flat = divmod(k, ni)
        target = ux if comp == 0 else uy
        target[mask] = np.eye(1, ni, flat).ravel()
        w = lame_apply(VectorField2(grid, ux, uy, bc="dirichlet_zero"), mu, lam)
        out[:ni, k] = w.ux[mask]
        out[ni:, k] = w.uy[mask]
    return out


def pack_interior(u: VectorField2) -> np.ndarray:
    mask = interior_mask(u.grid)
    return np.concatenate([u.ux[mask], u.uy[mask]])


def unpack_interior(grid: Grid2D, vec: np.ndarray) -> VectorField2:
    mask = interior_mask(grid)
    ni = grid.n_interior
    ux = np.zeros(grid.shape)
    uy = np.zeros(grid.shape)
    ux[mask] = vec[:ni]
    uy[mask] = vec[ni:]
    return VectorField2(grid, ux, uy, bc="dirichlet_zero")


# ---------------------------------------------------------------------------
# field snapshot files

def save_scalar_csv(path, h: ScalarField) -> None:
    x, y = h.grid.xy
    rows = np.column_stack([x.ravel(), y.ravel(), h.values.ravel()])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header="x,y,value", comments="")


def save_vector_csv(path, u: VectorField2) -> None:
    x, y = u.grid.xy
    rows = np.column_stack([x.ravel(), y.ravel(), u.ux.ravel(), u.uy.ravel()])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header="x,y,vx,vy", comments="")


def load_scalar_csv(path, grid: Grid2D, bc: str = "none") -> ScalarField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return ScalarField(grid, data[:, 2].reshape(grid.shape), bc)


def load_vector_csv(path, grid: Grid2D, bc: str = "none") -> VectorField2:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return VectorField2(
        grid, data[:, 2].reshape(grid.shape), data[:, 3].reshape(grid.shape), bc
    )
