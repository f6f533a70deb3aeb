"""Band-limited bump profile and the high/low-frequency data families.

The bump transform is 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2), and smooth in
between.  The family at index n pairs the carrier-modulated bump

    u0_n = 2^(-n s) phi(x) sin(lam_n 2^n x)

with the low-frequency perturbation f_n = 2^(-n) phi(x); the densities
rho0_n = Lambda u0_n complete the initial pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grid import PeriodicGrid, SpectralField, derivative, lambda_power, make_grid
from .norms import fourier_l1_norm, linf_norm, smooth_step, sobolev_norm

__all__ = [
    "BumpProfile",
    "DataFamily",
    "bump_hat",
    "make_bump",
    "auto_grid_size",
    "make_family",
    "make_u0",
    "make_f",
    "make_pairs",
    "size_report",
]

DEFAULT_L = 32.0 * np.pi
DEFAULT_LAMBDA = 1.4


def bump_hat(xi) -> np.ndarray:
    """Transform of the bump: 1 on |xi| <= 1/4, 0 for |xi| >= 1/2."""
    a = np.abs(np.asarray(xi, dtype=float))
    return smooth_step((0.5 - a) / 0.25)


@dataclass(frozen=True)
class BumpProfile:
    """The bump phi on a grid together with its transform."""

    field: SpectralField
    hat = staticmethod(bump_hat)

    @property
    def grid(self) -> PeriodicGrid:
        return self.field.grid


def make_bump(grid: PeriodicGrid) -> BumpProfile:
    """Sample bump_hat on the lattice and invert; checks the truncation tail."""
    if grid.xi_nyquist < 1.0:
        raise ConfigurationError("grid Nyquist frequency must be >= 1 for the bump")
    phi = SpectralField.from_coefficients(grid, bump_hat(grid.xi).astype(complex))
    # The Gevrey-class transition of bump_hat gives |phi(x)| ~ exp(-sqrt(x)),
    # so the truncation tail cannot be pushed to roundoff at practical L; the
    # guard only enforces that it is negligible against the factor-2 bands
    # used downstream.
    tail = np.max(np.abs(phi.samples[np.abs(grid.x) > grid.L / 2]))
    if tail > 1e-3:
        raise ConfigurationError(
            f"bump tail {tail:.3e} at |x| > L/2 exceeds 1e-3; increase L"
        )
    return BumpProfile(field=phi)


def _snap_lambda(lam_target: float, n: int, dxi: float) -> float:
    """Snap lam 2^n to the frequency lattice so the carrier is grid-periodic."""
    return round(lam_target * 2**n / dxi) * dxi / 2**n


@dataclass(frozen=True)
class DataFamily:
    """Parameters (s, lam, n) of one member of the data sequences."""

    s: float
    lam: float
    n: int
    grid: PeriodicGrid
    bump: BumpProfile = field(repr=False)

    def __post_init__(self):
        if self.s <= 1.5:
            raise ConfigurationError(f"s > 3/2 required, got {self.s}")
        if not (4.0 / 3.0 < self.lam < 1.5):
            raise ConfigurationError(
                f"snapped lambda {self.lam} outside (4/3, 3/2)"
            )
        if self.n < 4:
            raise ConfigurationError(f"n >= 4 required, got {self.n}")
        if (2.0 / 3.0) * self.grid.xi_nyquist < 2.0 * (self.carrier + 2.0):
            raise ConfigurationError(
                f"grid with Nyquist {self.grid.xi_nyquist} cannot dealias the "
                f"carrier {self.carrier}; need (2/3) xi_Ny >= 2 (carrier + 2)"
            )

    @property
    def carrier(self) -> float:
        return self.lam * 2**self.n


def auto_grid_size(n: int, L: float = DEFAULT_L,
                   lam_target: float = DEFAULT_LAMBDA) -> int:
    """Smallest power-of-two N whose grid dealiases the carrier at index n."""
    dxi = np.pi / L
    lam = _snap_lambda(lam_target, n, dxi)
    need = 3.0 * (lam * 2**n + 2.0)  # (2/3) xi_Ny >= 2 (carrier + 2)
    N = 8
    while (N // 2) * dxi < need:
        N *= 2
    return N


def make_family(s: float, n: int, lam_target: float = DEFAULT_LAMBDA,
                L: float = DEFAULT_L, N: int | None = None,
                bump: BumpProfile | None = None) -> DataFamily:
    """Build a DataFamily on an (auto-sized) grid, reusing a bump if given."""
    if N is None:
        N = auto_grid_size(n, L=L, lam_target=lam_target)
    if bump is not None and (bump.grid.L != L or bump.grid.N != N):
        bump = None
    grid = bump.grid if bump is not None else make_grid(L, N)
    if bump is None:
        bump = make_bump(grid)
    lam = _snap_lambda(lam_target, n, grid.dxi)
    return DataFamily(s=s, lam=lam, n=n, grid=grid, bump=bump)


def make_u0(fam: DataFamily) -> SpectralField:
    """High-frequency data u0_n = 2^(-n s) phi(x) sin(lam 2^n x)."""
    grid = fam.grid
    samples = 2.0 ** (-fam.n * fam.s) * fam.bump.field.samples * np.sin(
        fam.carrier * grid.x
    )
    return SpectralField.from_samples(grid, samples)


def make_f(fam: DataFamily) -> SpectralField:
    """Low-frequency perturbation f_n = 2^(-n) phi(x)."""
    return 2.0 ** (-fam.n) * fam.bump.field


def make_pairs(fam: DataFamily):
    """Both initial pairs: (u0, Lambda u0) and (u0 + f, Lambda(u0 + f))."""
    u0 = make_u0(fam)
    f = make_f(fam)
    ut0 = u0 + f
    return (u0, lambda_power(u0, 1.0)), (ut0, lambda_power(ut0, 1.0))


def size_report(families) -> list[dict]:
    """Normalized size estimates of the data families, one row per n.

    Columns are scaled so each should sit in a fixed band across n:
    the Fourier-L1 sizes of u0 and its first-order derivatives, the H^sigma
    norms for sigma in {s-1, s, s+1}, the sup of f, and the two products
    f d/dx u0 and f d/dx Lambda u0 whose limits must stay positive.
    """
    rows = []
    for fam in families:
        u0 = make_u0(fam)
        f = make_f(fam)
        n, s = fam.n, fam.s
        dxu0 = derivative(u0)
        lam_u0 = lambda_power(u0, 1.0)
        rows.append(
            {
                "n": n,
                "l1_u0": 2.0 ** (n * s) * fourier_l1_norm(u0),
                "l1_grad": 2.0 ** (n * (s - 1))
                * (fourier_l1_norm(dxu0) + fourier_l1_norm(lam_u0)),
                "hs_m1": 2.0**n * sobolev_norm(u0, s - 1),
                "hs": sobolev_norm(u0, s),
                "hs_p1": 2.0 ** (-n) * sobolev_norm(u0, s + 1),
                "linf_f": 2.0**n * linf_norm(f),
                "prod_u": sobolev_norm(f * dxu0, s),
                "prod_rho": sobolev_norm(f * derivative(lam_u0), s - 1),
            }
        )
    return rows
