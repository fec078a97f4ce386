"""Desk-scale numerical laboratory for a 2D magnetoelastic system."""

__version__ = "0.1.0"

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
    laplacian_neumann,
    norm_l2,
)
from .model import (
    DissipationSpec,
    DivergedStateError,
    Forcing,
    GalerkinBasis,
    MaterialParams,
    State,
    build_galerkin_basis,
)
from .stepping import StepperConfig, Trajectory, integrate, integrate_galerkin, step
from .energy import ConstantsLedger, energy_total, energy_identity_residual
from .orbit import PeriodicOrbit, find_periodic, poincare_map, r_critical
from .analysis import bessel_j1, bessel_j1_zero, botsenyuk_check

__all__ = [name for name in dir() if not name.startswith("_")]
