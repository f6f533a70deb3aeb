"""Periodic grid, discrete transform, and Fourier-multiplier operators.

The domain is the torus [-L, L) sampled at N equispaced nodes.  The discrete
transform pair mimics the whole-line convention

    fhat(xi_k) = sum_j f(x_j) exp(-i x_j xi_k) dx,
    f(x_j)     = sum_k fhat(xi_k) exp(i x_j xi_k) dxi / (2 pi),

with xi_k = k pi / L for k = -N/2 .. N/2 - 1, so that for rapidly decaying,
well-resolved fields the discrete norms converge to their continuum
counterparts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericalError

__all__ = [
    "PeriodicGrid",
    "SpectralField",
    "MultiplierSymbol",
    "make_grid",
    "apply_multiplier",
    "derivative",
    "lambda_power",
    "grad_helmholtz_inv",
    "semigroup",
    "dealiased_product",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class PeriodicGrid:
    """Uniform grid on [-L, L) together with its discrete frequency lattice."""

    def __init__(self, L: float, N: int):
        if not np.isfinite(L) or L <= 0:
            raise ConfigurationError(f"half width L must be positive, got {L}")
        if not _is_power_of_two(N) or N < 4:
            raise ConfigurationError(f"N must be a power of two >= 4, got {N}")
        self.L = float(L)
        self.N = int(N)
        self.dx = 2.0 * self.L / self.N
        self.dxi = np.pi / self.L
        k = np.arange(-N // 2, N // 2)
        self.x = -self.L + self.dx * np.arange(N)
        self.xi = k * self.dxi
        self.xi_nyquist = (N // 2) * self.dxi
        # exp(-i x_j xi_k) = (-1)^k exp(-2 pi i j k / N) for x_j = -L + j dx
        self._phase = np.where(k % 2 == 0, 1.0, -1.0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PeriodicGrid)
            and self.L == other.L
            and self.N == other.N
        )

    def __hash__(self) -> int:
        return hash((self.L, self.N))

    def __repr__(self) -> str:
        return f"PeriodicGrid(L={self.L!r}, N={self.N})"

    def forward(self, samples: np.ndarray) -> np.ndarray:
        """Transform N samples to N coefficients on the shifted lattice."""
        return self.dx * self._phase * np.fft.fftshift(np.fft.fft(samples))

    def inverse(self, coefficients: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`forward`; returns complex samples."""
        return np.fft.ifft(np.fft.ifftshift(coefficients * self._phase)) / self.dx


def make_grid(L: float, N: int) -> PeriodicGrid:
    """Build a periodic grid; raises ConfigurationError on bad parameters."""
    return PeriodicGrid(L, N)


class SpectralField:
    """One real-valued function on a PeriodicGrid with cached coefficients.

    Fields are value-semantic: arrays handed in are copied and the returned
    views are read-only, so a field never changes after construction.
    """

    __slots__ = ("grid", "_samples", "_coeffs")

    def __init__(self, grid: PeriodicGrid, samples=None, coefficients=None):
        if samples is None and coefficients is None:
            raise ValueError("need samples or coefficients")
        self.grid = grid
        self._samples = None
        self._coeffs = None
        if samples is not None:
            arr = np.array(samples, dtype=float)
            if arr.shape != (grid.N,):
                raise ValueError(f"expected {grid.N} samples, got {arr.shape}")
            arr.setflags(write=False)
            self._samples = arr
        if coefficients is not None:
            arr = np.array(coefficients, dtype=complex)
            if arr.shape != (grid.N,):
                raise ValueError(f"expected {grid.N} coefficients, got {arr.shape}")
            arr.setflags(write=False)
            self._coeffs = arr

    @classmethod
    def from_samples(cls, grid: PeriodicGrid, samples) -> "SpectralField":
        return cls(grid, samples=samples)

    @classmethod
    def from_coefficients(cls, grid: PeriodicGrid, coefficients) -> "SpectralField":
        return cls(grid, coefficients=coefficients)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, fn: Callable) -> "SpectralField":
        return cls(grid, samples=fn(grid.x))

    @classmethod
    def zero(cls, grid: PeriodicGrid) -> "SpectralField":
        return cls(grid, samples=np.zeros(grid.N))

    @property
    def samples(self) -> np.ndarray:
        if self._samples is None:
            s = self.grid.inverse(self._coeffs).real
            s.setflags(write=False)
            self._samples = s
        return self._samples

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            c = self.grid.forward(self._samples)
            c.setflags(write=False)
            self._coeffs = c
        return self._coeffs

    def _check_same_grid(self, other: "SpectralField") -> None:
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, samples=self.samples + other.samples)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, samples=self.samples - other.samples)

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            self._check_same_grid(other)
            return SpectralField(self.grid, samples=self.samples * other.samples)
        return SpectralField(self.grid, samples=float(other) * self.samples)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, samples=-self.samples)


@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier m(xi) with a human-readable name."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(xi), dtype=complex)


def apply_multiplier(f: SpectralField, m: MultiplierSymbol) -> SpectralField:
    """Apply ghat(xi) = m(xi) fhat(xi) and refresh the samples.

    The lone Nyquist bin xi = -N/2 dxi has no conjugate partner on the
    lattice, so the symbol is projected to its real part there; this keeps
    the output exactly real for Hermitian symbols.
    """
    grid = f.grid
    vals = m(grid.xi)
    if not np.all(np.isfinite(vals)):
        bad = grid.xi[~np.isfinite(vals)][0]
        raise NumericalError(f"symbol {m.name!r} is not finite at xi={bad}")
    coeffs = vals * f.coefficients
    coeffs[0] = vals[0].real * f.coefficients[0].real
    return SpectralField.from_coefficients(grid, coeffs)


def derivative(f: SpectralField) -> SpectralField:
    """d/dx, symbol i xi."""
    return apply_multiplier(f, MultiplierSymbol("d/dx", lambda xi: 1j * xi))


def lambda_power(f: SpectralField, sigma: float) -> SpectralField:
    """Bessel potential (1 - d^2/dx^2)^(sigma/2), symbol (1 + xi^2)^(sigma/2)."""
    if not np.isfinite(sigma):
        raise ConfigurationError(f"sigma must be finite, got {sigma}")
    sym = MultiplierSymbol(
        f"Lambda^{sigma}", lambda xi: (1.0 + xi**2) ** (sigma / 2.0)
    )
    return apply_multiplier(f, sym)


def grad_helmholtz_inv(f: SpectralField) -> SpectralField:
    """d/dx (1 - d^2/dx^2)^(-1), symbol i xi / (1 + xi^2)."""
    sym = MultiplierSymbol("dx Lambda^-2", lambda xi: 1j * xi / (1.0 + xi**2))
    return apply_multiplier(f, sym)


def semigroup(f: SpectralField, t: float) -> SpectralField:
    """Unitary wave group exp(-t dx Lambda^-1), symbol exp(-i t xi / sqrt(1+xi^2))."""
    if not np.isfinite(t):
        raise ConfigurationError(f"t must be finite, got {t}")
    sym = MultiplierSymbol(
        f"exp(-{t} dx Lambda^-1)",
        lambda xi: np.exp(-1j * t * xi / np.sqrt(1.0 + xi**2)),
    )
    return apply_multiplier(f, sym)


def dealiased_product(a: SpectralField, b: SpectralField, fraction: float = 2.0 / 3.0) -> SpectralField:
    """Pointwise product with modes above fraction * xi_nyquist zeroed."""
    a._check_same_grid(b)
    grid = a.grid
    prod = a.samples * b.samples
    coeffs = grid.forward(prod)
    coeffs[np.abs(grid.xi) > fraction * grid.xi_nyquist] = 0.0
    return SpectralField.from_coefficients(grid, coeffs)
