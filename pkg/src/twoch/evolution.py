"""Dealiased RK4 pseudospectral solver for the nonlocal velocity/elevation system.

The evolved unknowns are the velocity u and the elevation deviation rho
(physical surface = 1 + rho), obeying

    u_t   = -u u_x - dx Lambda^-2 ( rho + u^2 + (u_x)^2 / 2 + rho^2 / 2 ),
    rho_t = -dx ( u + u rho ).

The linear symbol xi / sqrt(1 + xi^2) is bounded, so the system is non-stiff
and a fixed-step explicit RK4 with 2/3-rule dealiasing after every product is
adequate.  The time stepper works on real-FFT coefficients; fields therefore
stay exactly real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .grid import PeriodicGrid, SpectralField
from .norms import sobolev_norm

__all__ = [
    "State",
    "SolverConfig",
    "Trajectory",
    "default_config",
    "rhs",
    "rk4_step",
    "solve",
    "write_snapshot",
    "write_monitors_csv",
    "MONITOR_COLUMNS",
]

MONITOR_COLUMNS = ("t", "Hs_u", "Hsm1_rho", "E", "M", "min_ux")


@dataclass(frozen=True)
class State:
    """Velocity u, elevation deviation rho, and the current time."""

    u: SpectralField
    rho: SpectralField
    t: float

    def __post_init__(self):
        if self.u.grid != self.rho.grid:
            raise ConfigurationError("u and rho must share one grid")

    @property
    def grid(self) -> PeriodicGrid:
        return self.u.grid


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    T: float
    sample_times: tuple
    cfl_safety: float = 1.0
    dealias_fraction: float = 2.0 / 3.0
    breaking_threshold: float = 1e3
    norm_s: float = 2.0

    def __post_init__(self):
        if self.dt <= 0 or self.T < 0:
            raise ConfigurationError("dt must be positive and T nonnegative")
        if not (0 < self.cfl_safety <= 1):
            raise ConfigurationError("cfl_safety must lie in (0, 1]")
        ts = tuple(sorted(self.sample_times))
        if ts and (ts[0] < 0 or ts[-1] > self.T):
            raise ConfigurationError("sample_times must lie inside [0, T]")
        object.__setattr__(self, "sample_times", ts)


def default_config(grid: PeriodicGrid, T: float, sample_times=None,
                   dt: float | None = None, norm_s: float = 2.0) -> SolverConfig:
    """Config with the advective default dt = 0.5 dx."""
    if dt is None:
        dt = 0.5 * grid.dx
    if sample_times is None:
        sample_times = (0.0, T) if T > 0 else (0.0,)
    return SolverConfig(dt=dt, T=T, sample_times=tuple(sample_times), norm_s=norm_s)


class _Workspace:
    """Per-grid rfft frequencies, multiplier tables, and the dealias mask."""

    def __init__(self, grid: PeriodicGrid, fraction: float = 2.0 / 3.0):
        self.grid = grid
        kappa = np.fft.rfftfreq(grid.N, d=grid.dx) * 2.0 * np.pi
        self.kappa = kappa
        self.ddx = 1j * kappa
        self.grad_helm = 1j * kappa / (1.0 + kappa**2)
        self.mask = (np.abs(kappa) <= fraction * grid.xi_nyquist).astype(float)

    def rhs(self, uh: np.ndarray, rh: np.ndarray):
        """Spectral right-hand side; returns (duh, drh, u, ux)."""
        u = np.fft.irfft(uh)
        r = np.fft.irfft(rh)
        ux = np.fft.irfft(self.ddx * uh)
        quad = self.mask * np.fft.rfft(u * u + 0.5 * ux * ux + 0.5 * r * r)
        adv = self.mask * np.fft.rfft(u * ux)
        ur = self.mask * np.fft.rfft(u * r)
        duh = -adv - self.grad_helm * (rh + quad)
        drh = -self.ddx * (uh + ur)
        return duh, drh, u, ux

    def rk4(self, uh, rh, dt):
        k1u, k1r, u, ux = self.rhs(uh, rh)
        k2u, k2r, _, _ = self.rhs(uh + 0.5 * dt * k1u, rh + 0.5 * dt * k1r)
        k3u, k3r, _, _ = self.rhs(uh + 0.5 * dt * k2u, rh + 0.5 * dt * k2r)
        k4u, k4r, _, _ = self.rhs(uh + dt * k3u, rh + dt * k3r)
        uh2 = uh + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        rh2 = rh + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        return uh2, rh2, u, ux


def rhs(state: State, dealias_fraction: float = 2.0 / 3.0):
    """Tendencies (du/dt, drho/dt) of a state, as fields."""
    ws = _Workspace(state.grid, dealias_fraction)
    duh, drh, _, _ = ws.rhs(np.fft.rfft(state.u.samples), np.fft.rfft(state.rho.samples))
    du = SpectralField.from_samples(state.grid, np.fft.irfft(duh))
    drho = SpectralField.from_samples(state.grid, np.fft.irfft(drh))
    if not (np.all(np.isfinite(du.samples)) and np.all(np.isfinite(drho.samples))):
        raise NumericalError(f"NaN/inf in right-hand side at t={state.t}")
    return du, drho


def _check_cfl(dt: float, grid: PeriodicGrid, maxu: float, safety: float) -> None:
    limit = safety * grid.dx / (1.0 + maxu)
    if abs(dt) > limit * (1.0 + 1e-12):
        raise NumericalError(
            f"CFL violation: |dt|={abs(dt):.3e} exceeds {limit:.3e}; "
            f"retry with dt <= {limit:.3e}"
        )


def rk4_step(state: State, dt: float, cfl_safety: float = 1.0,
             dealias_fraction: float = 2.0 / 3.0) -> State:
    """One classical 4-stage step; dt may be negative for reverse integration."""
    ws = _Workspace(state.grid, dealias_fraction)
    uh = np.fft.rfft(state.u.samples)
    rh = np.fft.rfft(state.rho.samples)
    uh2, rh2, u, _ = ws.rk4(uh, rh, dt)
    _check_cfl(dt, state.grid, float(np.max(np.abs(u))), cfl_safety)
    return State(
        u=SpectralField.from_samples(state.grid, np.fft.irfft(uh2)),
        rho=SpectralField.from_samples(state.grid, np.fft.irfft(rh2)),
        t=state.t + dt,
    )


class Trajectory:
    """Sampled states and per-sample monitors of one solve."""

    def __init__(self):
        self.states: list[State] = []
        self.monitors: list[dict] = []
        self.completed = False
        self.stop_reason: str | None = None

    def state_at(self, t: float, tol: float = 1e-9) -> State:
        for st in self.states:
            if abs(st.t - t) <= tol:
                return st
        raise KeyError(f"no sampled state at t={t}")


def _monitor_row(grid, uh, rh, ux, t, s) -> dict:
    u = np.fft.irfft(uh)
    r = np.fft.irfft(rh)
    fu = SpectralField.from_samples(grid, u)
    fr = SpectralField.from_samples(grid, r)
    E = 0.5 * grid.dx * float(np.sum(u * u + ux * ux + r * r))
    M = grid.dx * float(np.sum(r))
    return {
        "t": t,
        "Hs_u": sobolev_norm(fu, s),
        "Hsm1_rho": sobolev_norm(fr, s - 1.0),
        "E": E,
        "M": M,
        "min_ux": float(np.min(ux)),
    }


def solve(u0: SpectralField, rho0: SpectralField, config: SolverConfig) -> Trajectory:
    """March the system to T, recording states and monitors at sample times."""
    state0 = State(u=u0, rho=rho0, t=0.0)
    grid = state0.grid
    ws = _Workspace(grid, config.dealias_fraction)
    uh = np.fft.rfft(u0.samples)
    rh = np.fft.rfft(rho0.samples)
    traj = Trajectory()

    def record(t):
        ux = np.fft.irfft(ws.ddx * uh)
        traj.states.append(
            State(
                u=SpectralField.from_samples(grid, np.fft.irfft(uh)),
                rho=SpectralField.from_samples(grid, np.fft.irfft(rh)),
                t=t,
            )
        )
        traj.monitors.append(_monitor_row(grid, uh, rh, ux, t, config.norm_s))

    targets = list(config.sample_times)
    t = 0.0
    if targets and targets[0] == 0.0:
        record(0.0)
        targets = targets[1:]
    for t_next in targets:
        nsteps = max(1, math.ceil((t_next - t) / config.dt - 1e-12))
        h = (t_next - t) / nsteps
        for k in range(nsteps):
            uh, rh, u, ux = ws.rk4(uh, rh, h)
            _check_cfl(h, grid, float(np.max(np.abs(u))), config.cfl_safety)
            if not (np.all(np.isfinite(uh)) and np.all(np.isfinite(rh))):
                raise NumericalError(f"NaN/inf during step ending at t={t + (k + 1) * h}")
            if float(np.min(ux)) < -config.breaking_threshold:
                traj.stop_reason = (
                    f"wave-breaking guard: min du/dx < -{config.breaking_threshold} "
                    f"at t={t + k * h}"
                )
                record(t + k * h)
                return traj
        t = t_next
        record(t)
    traj.completed = True
    return traj


def write_snapshot(fh, state: State) -> None:
    """Binary snapshot: one text header line, then u and rho as little-endian f64."""
    grid = state.grid
    header = f"TWOCH v1 N={grid.N} L={grid.L:.17g} t={state.t:.17g}\n"
    fh.write(header.encode("ascii"))
    fh.write(state.u.samples.astype("<f8").tobytes())
    fh.write(state.rho.samples.astype("<f8").tobytes())


def write_monitors_csv(fh, monitors) -> None:
    fh.write(",".join(MONITOR_COLUMNS) + "\n")
    for row in monitors:
        fh.write(",".join(f"{row[c]:.17g}" for c in MONITOR_COLUMNS) + "\n")
