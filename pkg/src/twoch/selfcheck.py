"""Built-in invariant suites behind the `twoch selfcheck` command.

Each suite returns CheckResult records; random trial fields use a fixed seed
and are band-limited to two thirds of the Nyquist frequency so that every
multiplier identity is exact up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .construction import make_bump
from .errors import TwochError
from .grid import (
    MultiplierSymbol,
    PeriodicGrid,
    SpectralField,
    apply_multiplier,
    derivative,
    grad_helmholtz_inv,
    lambda_power,
    make_grid,
    semigroup,
)
from .norms import (
    BesovIndex,
    besov_norm,
    lp_block,
    make_partition,
    sobolev_norm,
)

__all__ = ["CheckResult", "run_selfcheck", "SUITES"]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    value: float
    limit: float
    kind: str = "le"  # "le": value <= limit, "ge": value >= limit

    @property
    def passed(self) -> bool:
        return self.value <= self.limit if self.kind == "le" else self.value >= self.limit

    def line(self) -> str:
        op = "<=" if self.kind == "le" else ">="
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.suite}/{self.name}: {self.value:.3e} {op} {self.limit:.3e}"


def random_field(grid: PeriodicGrid, rng, frac: float = 2.0 / 3.0) -> SpectralField:
    """Random real field band-limited to frac * xi_nyquist."""
    f = SpectralField.from_samples(grid, rng.standard_normal(grid.N))
    coeffs = np.array(f.coefficients)
    coeffs[np.abs(grid.xi) > frac * grid.xi_nyquist] = 0.0
    return SpectralField.from_coefficients(grid, coeffs)


def _rel(a: float, b: float) -> float:
    return a / b if b > 0 else a


def suite_transform(grid, rng) -> list[CheckResult]:
    f = SpectralField.from_samples(grid, rng.standard_normal(grid.N))
    back = grid.inverse(grid.forward(f.samples))
    l2 = np.sqrt(grid.dx * np.sum(f.samples**2))
    out = [
        CheckResult("transform", "roundtrip",
                    float(np.max(np.abs(back - f.samples))) / float(np.max(np.abs(f.samples))),
                    1e-12),
    ]
    c = f.coefficients
    sym = c[1:] - np.conj(c[1:][::-1])  # fhat(-xi) = conj(fhat(xi)) off Nyquist
    out.append(CheckResult("transform", "conjugate_symmetry",
                           float(np.max(np.abs(sym))) / float(np.max(np.abs(c))), 1e-12))
    spec = np.sqrt(np.sum(np.abs(c) ** 2) * grid.dxi / (2 * np.pi))
    out.append(CheckResult("transform", "plancherel", abs(spec - l2) / l2, 1e-10))
    out.append(CheckResult("transform", "h0_equals_l2",
                           abs(sobolev_norm(f, 0.0) - l2) / l2, 1e-12))
    return out


def suite_multipliers(grid, rng) -> list[CheckResult]:
    f = random_field(grid, rng)
    scale = sobolev_norm(f, 0.0)
    ab = grad_helmholtz_inv(lambda_power(f, 1.3))
    ba = lambda_power(grad_helmholtz_inv(f), 1.3)
    comp = derivative(lambda_power(f, -2.0))
    direct = grad_helmholtz_inv(f)
    roundtrip = lambda_power(lambda_power(f, 1.7), -1.7)
    return [
        CheckResult("multipliers", "commutation",
                    _rel(sobolev_norm(ab - ba, 0.0), scale), 1e-12),
        CheckResult("multipliers", "grad_helmholtz_factorization",
                    _rel(sobolev_norm(comp - direct, 0.0), scale), 1e-12),
        CheckResult("multipliers", "lambda_power_inverse",
                    _rel(sobolev_norm(roundtrip - f, 0.0), scale), 1e-10),
        CheckResult("multipliers", "grad_helmholtz_l2_bound",
                    sobolev_norm(direct, 0.0) / (0.5 * scale), 1.0 + 1e-12),
    ]


def suite_semigroup(grid, rng) -> list[CheckResult]:
    f = random_field(grid, rng)
    out = []
    worst = 0.0
    for sigma in (0.0, 1.0, 2.0):
        a = sobolev_norm(semigroup(f, 0.7), sigma)
        b = sobolev_norm(f, sigma)
        worst = max(worst, abs(a - b) / b)
    out.append(CheckResult("semigroup", "isometry", worst, 1e-10))
    g1 = semigroup(semigroup(f, 0.3), 0.4)
    g2 = semigroup(f, 0.7)
    out.append(CheckResult("semigroup", "group_law",
                           _rel(sobolev_norm(g1 - g2, 0.0), sobolev_norm(f, 0.0)), 1e-10))
    comm = semigroup(lambda_power(f, 1.0), 0.5) - lambda_power(semigroup(f, 0.5), 1.0)
    out.append(CheckResult("semigroup", "multiplier_commutation",
                           _rel(sobolev_norm(comm, 0.0), sobolev_norm(f, 0.0)), 1e-12))
    gen = apply_multiplier(
        f, MultiplierSymbol("-dx Lambda^-1", lambda xi: -1j * xi / np.sqrt(1 + xi**2))
    )
    errs = []
    for h in (1e-3, 5e-4):
        fd = (1.0 / (2 * h)) * (semigroup(f, h) - semigroup(f, -h))
        errs.append(sobolev_norm(fd - gen, 0.0))
    order_c = np.log2(errs[0] / errs[1])
    fwd = []
    for h in (1e-3, 5e-4):
        fd = (1.0 / h) * (semigroup(f, h) - f)
        fwd.append(sobolev_norm(fd - gen, 0.0))
    order_f = np.log2(fwd[0] / fwd[1])
    # the observed orders approach 1 and 2 from below as h shrinks, so the
    # thresholds carry a small fitting slack
    out.append(CheckResult("semigroup", "generator_fd_order_forward", order_f, 0.95, "ge"))
    out.append(CheckResult("semigroup", "generator_fd_order_central", order_c, 1.95, "ge"))
    return out


def suite_partition(grid, rng) -> list[CheckResult]:
    part = make_partition(grid)
    total = sum(part.block_symbol(j) for j in range(-1, part.j_max + 1))
    out = [CheckResult("partition", "partition_of_unity",
                       float(np.max(np.abs(total - 1.0))), 1e-12)]
    nonzero = np.zeros(grid.N)
    for j in range(-1, part.j_max + 1):
        nonzero += (part.block_symbol(j) > 1e-14).astype(float)
    out.append(CheckResult("partition", "at_most_two_blocks", float(np.max(nonzero)), 2.0))
    f = random_field(grid, rng, frac=0.9)
    rec = SpectralField.zero(grid)
    for j in range(-1, part.j_max + 1):
        rec = rec + lp_block(f, j, part)
    out.append(CheckResult("partition", "block_reconstruction",
                           _rel(sobolev_norm(rec - f, 0.0), sobolev_norm(f, 0.0)), 1e-10))
    return out


def suite_bernstein(grid, rng) -> list[CheckResult]:
    out = []
    worst_low, worst_high = np.inf, 0.0
    for j in (1, 2, 3):
        f = random_field(grid, rng, frac=0.9)
        coeffs = np.array(f.coefficients)
        a = np.abs(grid.xi)
        coeffs[(a < 0.75 * 2**j) | (a > (8.0 / 3.0) * 2**j)] = 0.0
        g = SpectralField.from_coefficients(grid, coeffs)
        l2 = sobolev_norm(g, 0.0)
        d = sobolev_norm(derivative(g), 0.0)
        worst_low = min(worst_low, d / (0.75 * 2**j * l2))
        worst_high = max(worst_high, d / ((8.0 / 3.0) * 2**j * l2))
    out.append(CheckResult("bernstein", "lower_bracket", worst_low, 1.0 - 1e-12, "ge"))
    out.append(CheckResult("bernstein", "upper_bracket", worst_high, 1.0 + 1e-12))
    return out


def suite_besov(grid, rng) -> list[CheckResult]:
    s = 1.7
    f = random_field(grid, rng)
    b_inf = besov_norm(f, BesovIndex(s, 2, np.inf))
    b_2 = besov_norm(f, BesovIndex(s, 2, 2))
    b_1 = besov_norm(f, BesovIndex(s, 2, 1))
    out = [CheckResult("besov", "embedding_monotone",
                       max(b_inf - b_2, b_2 - b_1), 0.0)]
    # Bracket for B^s_{2,2} vs H^s on fields with no low-frequency content:
    # at every xi >= 3/4 the active blocks j satisfy (3/8)|xi| < 2^j < (4/5)|xi|
    # and at most two overlap, giving the s-dependent constants below.
    coeffs = np.array(f.coefficients)
    coeffs[np.abs(grid.xi) < 0.75] = 0.0
    g = SpectralField.from_coefficients(grid, coeffs)
    ratio = besov_norm(g, BesovIndex(s, 2, 2)) / sobolev_norm(g, s)
    lo = ((9.0 / 40.0) ** s) / np.sqrt(2.0)
    hi = ((4.0 / 5.0) ** s) * np.sqrt(2.0)
    out.append(CheckResult("besov", "sobolev_bracket_low", ratio, lo, "ge"))
    out.append(CheckResult("besov", "sobolev_bracket_high", ratio, hi))
    hs = sobolev_norm(f, s)
    interp = np.sqrt(sobolev_norm(f, s - 1) * sobolev_norm(f, s + 1))
    out.append(CheckResult("besov", "interpolation", hs / interp, 1.0 + 1e-10))
    return out


def suite_bump(grid, rng) -> list[CheckResult]:
    bump = make_bump(grid)
    phi = bump.field
    tail = float(np.max(np.abs(phi.samples[np.abs(grid.x) > grid.L / 2])))
    evenness = float(np.max(np.abs(phi.samples[1:] - phi.samples[1:][::-1])))
    return [
        CheckResult("bump", "tail_guard", tail, 1e-3),
        CheckResult("bump", "evenness", _rel(evenness, float(np.max(np.abs(phi.samples)))), 1e-10),
    ]


SUITES = (
    ("transform", suite_transform),
    ("multipliers", suite_multipliers),
    ("semigroup", suite_semigroup),
    ("partition", suite_partition),
    ("bernstein", suite_bernstein),
    ("besov", suite_besov),
    ("bump", suite_bump),
)


def run_selfcheck(echo=None) -> list[CheckResult]:
    """Run every invariant suite; never aborts mid-suite."""
    rng = np.random.default_rng(20240214)
    results: list[CheckResult] = []
    small = make_grid(np.pi, 1024)
    wide = make_grid(32.0 * np.pi, 4096)
    for name, fn in SUITES:
        grid = wide if name == "bump" else small
        try:
            res = fn(grid, rng)
        except TwochError as exc:
            res = [CheckResult(name, f"error: {exc}", 1.0, 0.0)]
        results.extend(res)
        if echo is not None:
            for r in res:
                echo(r.line())
    return results
