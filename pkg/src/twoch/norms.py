"""Sobolev, sup, and Fourier-L1 norms; Littlewood-Paley blocks; Besov norms.

Block symbols are built from a concrete C-infinity step so that the dyadic
family telescopes to an exact partition of unity on the frequency lattice:
chi == 1 for |xi| <= 5/4, chi == 0 for |xi| >= 4/3, and
phi_dyad(xi) = chi(xi/2) - chi(xi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import PeriodicGrid, SpectralField

__all__ = [
    "smooth_step",
    "chi_symbol",
    "phi_dyad_symbol",
    "LittlewoodPaleyPartition",
    "BesovIndex",
    "make_partition",
    "sobolev_norm",
    "linf_norm",
    "fourier_l1_norm",
    "lp_block",
    "besov_norm",
]


def smooth_step(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        qt = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        q1 = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return qt / (qt + q1)


def chi_symbol(xi) -> np.ndarray:
    """Low-frequency cut: 1 on |xi| <= 5/4, 0 outside |xi| < 4/3."""
    a = np.abs(np.asarray(xi, dtype=float))
    return smooth_step((4.0 / 3.0 - a) / (4.0 / 3.0 - 5.0 / 4.0))


def phi_dyad_symbol(xi) -> np.ndarray:
    """Dyadic annulus symbol phi(xi) = chi(xi/2) - chi(xi)."""
    xi = np.asarray(xi, dtype=float)
    return chi_symbol(xi / 2.0) - chi_symbol(xi)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm: sqrt( sum (1+xi^2)^s |fhat|^2 dxi / 2pi )."""
    grid = f.grid
    w = (1.0 + grid.xi**2) ** s
    return float(
        np.sqrt(np.sum(w * np.abs(f.coefficients) ** 2) * grid.dxi / (2.0 * np.pi))
    )


def linf_norm(f: SpectralField) -> float:
    """Max of |f| over the grid nodes."""
    return float(np.max(np.abs(f.samples)))


def fourier_l1_norm(f: SpectralField) -> float:
    """L1 norm of the transform: sum |fhat| dxi (no 2pi weight)."""
    return float(np.sum(np.abs(f.coefficients)) * f.grid.dxi)


class LittlewoodPaleyPartition:
    """Dyadic symbols realizing the blocks Delta_j on one grid.

    j_max is the last index whose block can be nonzero on the lattice; it is
    chosen so that chi(2^-(j_max+1) xi) == 1 for every lattice frequency,
    which makes the reconstruction sum_{j <= j_max} Delta_j exact.
    """

    def __init__(self, grid: PeriodicGrid, chi=chi_symbol, phi=phi_dyad_symbol,
                 validate: bool = True):
        self.grid = grid
        self.chi = chi
        self.phi_dyad = phi
        j = 0
        while (5.0 / 2.0) * 2**j < grid.xi_nyquist:
            j += 1
        self.j_max = j
        syms = [np.asarray(chi(grid.xi), dtype=float)]
        for jj in range(self.j_max + 1):
            syms.append(np.asarray(phi(grid.xi / 2.0**jj), dtype=float))
        self._symbols = syms  # index 0 is j = -1
        if validate:
            residual = float(np.max(np.abs(sum(syms) - 1.0)))
            if residual > 1e-12:
                raise ConfigurationError(
                    f"partition of unity residual {residual:.3e} exceeds 1e-12"
                )

    def block_symbol(self, j: int) -> np.ndarray:
        if j < -1 or j > self.j_max:
            raise ConfigurationError(
                f"block index {j} outside [-1, {self.j_max}]"
            )
        return self._symbols[j + 1]


_partition_cache: dict = {}


def make_partition(grid: PeriodicGrid) -> LittlewoodPaleyPartition:
    """Build (and memoize) the standard partition for a grid."""
    key = (grid.L, grid.N)
    part = _partition_cache.get(key)
    if part is None:
        part = LittlewoodPaleyPartition(grid)
        _partition_cache[key] = part
    return part


def lp_block(f: SpectralField, j: int,
             partition: LittlewoodPaleyPartition | None = None) -> SpectralField:
    """Littlewood-Paley block Delta_j f (j = -1 uses chi)."""
    part = partition if partition is not None else make_partition(f.grid)
    return SpectralField.from_coefficients(
        f.grid, part.block_symbol(j) * f.coefficients
    )


@dataclass(frozen=True)
class BesovIndex:
    """Besov indices (s, p, r) with p in {2, inf} and r in {1, 2, inf}."""

    s: float
    p: float = 2
    r: float = 2

    def __post_init__(self):
        if self.p not in (2, np.inf):
            raise ConfigurationError(f"p must be 2 or inf, got {self.p}")
        if self.r not in (1, 2, np.inf):
            raise ConfigurationError(f"r must be 1, 2, or inf, got {self.r}")


def besov_norm(f: SpectralField, idx, partition=None) -> float:
    """Nonhomogeneous Besov norm: l^r over j of 2^(js) ||Delta_j f||_{L^p}."""
    if not isinstance(idx, BesovIndex):
        idx = BesovIndex(*idx)
    part = partition if partition is not None else make_partition(f.grid)
    grid = f.grid
    terms = []
    for j in range(-1, part.j_max + 1):
        coeffs = part.block_symbol(j) * f.coefficients
        if idx.p == 2:
            bn = np.sqrt(np.sum(np.abs(coeffs) ** 2) * grid.dxi / (2.0 * np.pi))
        else:
            bn = np.max(np.abs(grid.inverse(coeffs).real))
        terms.append(2.0 ** (j * idx.s) * bn)
    terms = np.asarray(terms)
    if idx.r == 1:
        return float(np.sum(terms))
    if idx.r == 2:
        return float(np.sqrt(np.sum(terms**2)))
    return float(np.max(terms))
