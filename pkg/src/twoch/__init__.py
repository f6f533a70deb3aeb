"""Pseudospectral toolkit for the two-component Camassa-Holm system.

Fourier-multiplier operators on a periodic grid, Littlewood-Paley/Besov
norms, the high/low-frequency data families, a dealiased RK4 solver, and the
experiment harness demonstrating non-uniform dependence of the flow map.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, NumericalError, TwochError
from .grid import (
    MultiplierSymbol,
    PeriodicGrid,
    SpectralField,
    apply_multiplier,
    dealiased_product,
    derivative,
    grad_helmholtz_inv,
    lambda_power,
    make_grid,
    semigroup,
)
from .norms import (
    BesovIndex,
    LittlewoodPaleyPartition,
    besov_norm,
    fourier_l1_norm,
    linf_norm,
    lp_block,
    make_partition,
    sobolev_norm,
)
from .construction import (
    BumpProfile,
    DataFamily,
    auto_grid_size,
    size_report,
    make_bump,
    make_f,
    make_family,
    make_pairs,
    make_u0,
)
from .evolution import SolverConfig, State, Trajectory, default_config, rhs, rk4_step, solve
from .approximants import (
    ApproximantBundle,
    first_approx,
    approx1_error,
    approx2_error,
    second_approx,
)

__all__ = [name for name in dir() if not name.startswith("_")]
