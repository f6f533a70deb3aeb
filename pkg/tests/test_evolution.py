"""RK4 pseudospectral solver: right-hand side oracles, conservation, guards."""

import io

import numpy as np
import pytest

from twoch import (
    ConfigurationError,
    NumericalError,
    SolverConfig,
    SpectralField,
    State,
    default_config,
    make_grid,
    rhs,
    rk4_step,
    solve,
)
from twoch.construction import make_family, make_pairs
from twoch.evolution import MONITOR_COLUMNS, write_monitors_csv, write_snapshot
from twoch.grid import derivative, grad_helmholtz_inv, lambda_power, semigroup
from twoch.norms import sobolev_norm


def _state(grid, u_fn, rho_fn, t=0.0):
    return State(
        u=SpectralField.from_function(grid, u_fn),
        rho=SpectralField.from_function(grid, rho_fn),
        t=t,
    )


def test_rest_state_is_fixed_point():
    grid = make_grid(np.pi, 64)
    st = State(u=SpectralField.zero(grid), rho=SpectralField.zero(grid), t=0.0)
    du, drho = rhs(st)
    assert np.max(np.abs(du.samples)) == 0.0
    assert np.max(np.abs(drho.samples)) == 0.0
    nxt = rk4_step(st, 0.01)
    assert np.max(np.abs(nxt.u.samples)) == 0.0
    assert nxt.t == 0.01


def test_rhs_zero_velocity():
    # with u = 0: du = -dx Lambda^-2 (rho + rho^2 / 2), drho = 0
    grid = make_grid(np.pi, 256)
    st = _state(grid, lambda x: 0.0 * x, lambda x: 0.3 * np.cos(2 * x))
    du, drho = rhs(st)
    r = st.rho
    expected = -1.0 * grad_helmholtz_inv(r + 0.5 * (r * r))
    assert np.max(np.abs(du.samples - expected.samples)) < 1e-13
    assert np.max(np.abs(drho.samples)) < 1e-14


def test_rhs_single_mode_oracle():
    # u = eps sin x, rho = 0:
    # du = -eps^2 sin x cos x - dx Lambda^-2 (eps^2 sin^2 x + eps^2 cos^2 x / 2)
    # drho = -eps cos x
    grid = make_grid(np.pi, 256)
    eps = 0.1
    st = _state(grid, lambda x: eps * np.sin(x), lambda x: 0.0 * x)
    du, drho = rhs(st)
    u = st.u
    ux = derivative(u)
    quad = u * u + 0.5 * (ux * ux)
    expected = -1.0 * (u * ux) - grad_helmholtz_inv(quad)
    assert np.max(np.abs(du.samples - expected.samples)) < 1e-14
    assert np.max(np.abs(drho.samples + eps * np.cos(grid.x))) < 1e-13


def test_linearized_step_matches_semigroup():
    # for tiny data with rho0 = Lambda u0 the pair rides the unitary group
    grid = make_grid(np.pi, 256)
    amp = 1e-6
    u0 = SpectralField.from_function(grid, lambda x: amp * np.sin(x))
    rho0 = lambda_power(u0, 1.0)
    st = State(u=u0, rho=rho0, t=0.0)
    dt = 0.01
    nxt = rk4_step(st, dt)
    lin_u = semigroup(u0, dt)
    lin_r = semigroup(rho0, dt)
    assert np.max(np.abs(nxt.u.samples - lin_u.samples)) < 10.0 * amp**2
    assert np.max(np.abs(nxt.rho.samples - lin_r.samples)) < 10.0 * amp**2


def test_cfl_guard():
    grid = make_grid(np.pi, 256)
    st = _state(grid, lambda x: np.sin(x), lambda x: 0.0 * x)
    with pytest.raises(NumericalError, match="CFL"):
        rk4_step(st, 10.0 * grid.dx)


def test_solver_config_validation():
    with pytest.raises(ConfigurationError):
        SolverConfig(dt=-0.1, T=1.0, sample_times=(0.0,))
    with pytest.raises(ConfigurationError):
        SolverConfig(dt=0.1, T=1.0, sample_times=(0.0, 2.0))
    with pytest.raises(ConfigurationError):
        SolverConfig(dt=0.1, T=1.0, sample_times=(0.0,), cfl_safety=1.5)
    cfg = default_config(make_grid(np.pi, 64), T=0.5)
    assert cfg.dt == 0.5 * make_grid(np.pi, 64).dx
    assert cfg.sample_times == (0.0, 0.5)


def test_solve_samples_and_monitors():
    grid = make_grid(np.pi, 256)
    u0 = SpectralField.from_function(grid, lambda x: 0.05 * np.sin(x))
    rho0 = lambda_power(u0, 1.0)
    cfg = default_config(grid, T=0.2, sample_times=(0.0, 0.1, 0.2))
    traj = solve(u0, rho0, cfg)
    assert traj.completed
    assert [st.t for st in traj.states] == [0.0, 0.1, 0.2]
    assert traj.state_at(0.1).t == 0.1
    with pytest.raises(KeyError):
        traj.state_at(0.05)
    for row in traj.monitors:
        assert set(row) == set(MONITOR_COLUMNS)
        assert np.isfinite(list(row.values())).all()


def test_mass_conserved_to_roundoff():
    # drho is a perfect x-derivative, so the mean of rho is exactly conserved
    grid = make_grid(np.pi, 256)
    u0 = SpectralField.from_function(grid, lambda x: 0.1 * (1.0 + np.cos(x)))
    rho0 = lambda_power(u0, 1.0)
    cfg = default_config(grid, T=0.5, sample_times=(0.0, 0.5))
    traj = solve(u0, rho0, cfg)
    m0 = traj.monitors[0]["M"]
    m1 = traj.monitors[-1]["M"]
    assert abs(m1 - m0) < 1e-10 * abs(m0)


def test_energy_drift_shrinks_with_dt():
    grid = make_grid(np.pi, 256)
    u0 = SpectralField.from_function(grid, lambda x: 0.2 * np.sin(x))
    rho0 = SpectralField.from_function(grid, lambda x: 0.1 * np.cos(x))

    def drift(dt):
        cfg = SolverConfig(dt=dt, T=0.2, sample_times=(0.0, 0.2))
        traj = solve(u0, rho0, cfg)
        e0 = traj.monitors[0]["E"]
        return abs(traj.monitors[-1]["E"] - e0) / e0

    d1, d2 = drift(0.01), drift(0.005)
    assert d2 < d1 / 8.0


def test_reversibility():
    grid = make_grid(np.pi, 256)
    u0 = SpectralField.from_function(grid, lambda x: 0.05 * np.sin(x))
    rho0 = lambda_power(u0, 1.0)
    dt = 0.01
    st = State(u=u0, rho=rho0, t=0.0)
    for _ in range(20):
        st = rk4_step(st, dt)
    for _ in range(20):
        st = rk4_step(st, -dt)
    assert np.max(np.abs(st.u.samples - u0.samples)) < 1e-6
    assert np.max(np.abs(st.rho.samples - rho0.samples)) < 1e-6
    assert abs(st.t) < 1e-12


def test_breaking_guard_controlled_stop():
    grid = make_grid(np.pi, 256)
    u0 = SpectralField.from_function(grid, lambda x: 0.1 * np.sin(x))
    rho0 = lambda_power(u0, 1.0)
    cfg = SolverConfig(dt=0.005, T=0.2, sample_times=(0.0, 0.2),
                       breaking_threshold=1e-3)
    traj = solve(u0, rho0, cfg)
    assert not traj.completed
    assert "wave-breaking" in traj.stop_reason


def test_solution_norm_stays_bounded_on_family_data():
    fam = make_family(2.0, 4)
    (u0, rho0), _ = make_pairs(fam)
    cfg = default_config(fam.grid, T=0.3, sample_times=(0.0, 0.3), norm_s=2.0)
    traj = solve(u0, rho0, cfg)
    init = sobolev_norm(u0, 2.0) + sobolev_norm(rho0, 1.0)
    final = traj.monitors[-1]["Hs_u"] + traj.monitors[-1]["Hsm1_rho"]
    assert final <= 2.0 * init


def test_snapshot_and_monitor_serialization():
    grid = make_grid(np.pi, 64)
    u0 = SpectralField.from_function(grid, np.sin)
    st = State(u=u0, rho=SpectralField.zero(grid), t=0.25)
    buf = io.BytesIO()
    write_snapshot(buf, st)
    raw = buf.getvalue()
    header, rest = raw.split(b"\n", 1)
    assert header.startswith(b"TWOCH v1 N=64 L=")
    assert b"t=0.25" in header
    assert len(rest) == 2 * 64 * 8
    u_back = np.frombuffer(rest[: 64 * 8], dtype="<f8")
    assert np.max(np.abs(u_back - u0.samples)) == 0.0

    text = io.StringIO()
    write_monitors_csv(text, [{c: 1.0 for c in MONITOR_COLUMNS}])
    lines = text.getvalue().splitlines()
    assert lines[0] == ",".join(MONITOR_COLUMNS)
    assert len(lines) == 2
