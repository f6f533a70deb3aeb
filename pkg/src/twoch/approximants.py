"""Linear-flow approximate solutions and their error tables.

The first approximants propagate (u0, Lambda u0) with the unitary group; the
second propagate the perturbed pair (u0 + f, Lambda(u0 + f)) and carry the
quadratic corrections U = -u_ap dx u_ap and V = -u_ap dx rho_ap.  Error
tables compare them against reference solves of the full system.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from .construction import DEFAULT_L, DEFAULT_LAMBDA, DataFamily, make_family, make_f, make_u0
from .errors import ConfigurationError
from .grid import dealiased_product, derivative, lambda_power, semigroup
from .norms import sobolev_norm
from .evolution import SolverConfig, solve

__all__ = [
    "ApproximantBundle",
    "first_approx",
    "second_approx",
    "ApproxErrorResult",
    "approx1_error",
    "approx2_error",
    "fit_slope",
]


class ApproximantBundle:
    """Explicitly solvable approximants of one data family."""

    def __init__(self, fam: DataFamily, kind: str):
        if kind not in ("first", "second"):
            raise ConfigurationError(f"kind must be 'first' or 'second', got {kind!r}")
        self.fam = fam
        self.kind = kind
        u0 = make_u0(fam)
        if kind == "second":
            u0 = u0 + make_f(fam)
        self.u0 = u0
        self.rho0 = lambda_power(u0, 1.0)

    def base_at(self, t: float):
        """The propagated pair (u_ap(t), rho_ap(t))."""
        return semigroup(self.u0, t), semigroup(self.rho0, t)

    def corrections_at(self, t: float):
        """(U_ap(t), V_ap(t)); only meaningful for the second approximants."""
        u_ap, rho_ap = self.base_at(t)
        U = -1.0 * dealiased_product(u_ap, derivative(u_ap))
        V = -1.0 * dealiased_product(u_ap, derivative(rho_ap))
        return U, V


def first_approx(fam: DataFamily, t: float):
    """First approximants (e^{tA} u0, e^{tA} Lambda u0)."""
    return ApproximantBundle(fam, "first").base_at(t)


def second_approx(fam: DataFamily, t: float):
    """Second approximants (u_ap, rho_ap, U_ap, V_ap) at time t."""
    bundle = ApproximantBundle(fam, "second")
    u_ap, rho_ap = bundle.base_at(t)
    U, V = bundle.corrections_at(t)
    return u_ap, rho_ap, U, V


def fit_slope(ns, values) -> float:
    """Least-squares slope of log2(values) against ns."""
    ns = np.asarray(ns, dtype=float)
    ys = np.log2(np.asarray(values, dtype=float))
    return float(np.polyfit(ns, ys, 1)[0])


@dataclass
class ApproxErrorResult:
    which: int
    s: float
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)  # t -> fitted n-slope
    t_exponent: float | None = None  # which=2 only, fitted at the largest n
    refine_change: float | None = None


def _error_rows(which: int, s: float, n: int, times, lam_target: float,
                L: float, dt: float | None, N: int | None = None) -> list[dict]:
    """Solve the full system for one n and tabulate the approximation error."""
    fam = make_family(s, n, lam_target=lam_target, L=L, N=N)
    kind = "first" if which == 1 else "second"
    bundle = ApproximantBundle(fam, kind)
    grid = fam.grid
    cfg = SolverConfig(
        dt=dt if dt is not None else 0.5 * grid.dx,
        T=max(times),
        sample_times=tuple(times),
        norm_s=s,
    )
    traj = solve(bundle.u0, bundle.rho0, cfg)
    rows = []
    for t in cfg.sample_times:
        st = traj.state_at(t)
        u_ap, rho_ap = bundle.base_at(t)
        if which == 1:
            v = st.u - u_ap
            w = st.rho - rho_ap
            E = sobolev_norm(v, s) + sobolev_norm(w, s - 1)
            rows.append(
                {
                    "n": n,
                    "t": t,
                    "E": E,
                    "normalized_E": E * 2.0 ** (0.5 * n * (s - 1.5)),
                    "E_low": (sobolev_norm(v, s - 1) + sobolev_norm(w, s - 2))
                    * 2.0 ** (n * (s - 0.5)),
                }
            )
        else:
            U, V = bundle.corrections_at(t)
            vt = st.u - u_ap - t * U
            wt = st.rho - rho_ap - t * V
            E = sobolev_norm(vt, s) + sobolev_norm(wt, s - 1)
            rows.append(
                {
                    "n": n,
                    "t": t,
                    "E": E,
                    "normalized_E": E / (t * t + 2.0 ** (-n * (s - 1.5))),
                }
            )
    return rows


def _collect_rows(which, s, n_list, times, lam_target, L, dt, workers) -> list[dict]:
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {
                n: pool.submit(_error_rows, which, s, n, times, lam_target, L, dt)
                for n in n_list
            }
            per_n = [futs[n].result() for n in n_list]
    else:
        per_n = [_error_rows(which, s, n, times, lam_target, L, dt) for n in n_list]
    return [row for rows in per_n for row in rows]


def _refine_change(which, s, n, times, lam_target, L) -> float:
    """Relative movement of E under (N x 2, dt / 2) at the given n."""
    from .construction import auto_grid_size

    N = auto_grid_size(n, L=L, lam_target=lam_target)
    base = _error_rows(which, s, n, times, lam_target, L, dt=None, N=N)
    # doubling N halves dx, so the default dt = 0.5 dx is halved as well
    fine = _error_rows(which, s, n, times, lam_target, L, dt=None, N=2 * N)
    changes = [
        abs(b["E"] - f["E"]) / b["E"]
        for b, f in zip(base, fine)
        if b["t"] > 0 and b["E"] > 0
    ]
    return max(changes) if changes else 0.0


def approx1_error(s: float, n_list, times=(0.05, 0.1, 0.2, 0.3),
                  lam_target: float = DEFAULT_LAMBDA, L: float = DEFAULT_L,
                  dt: float | None = None, workers: int = 1,
                  refine: bool = False) -> ApproxErrorResult:
    """Error table E1(n, t) for the first approximants, with fitted n-slopes."""
    res = ApproxErrorResult(which=1, s=s)
    res.rows = _collect_rows(1, s, n_list, times, lam_target, L, dt, workers)
    for t in sorted({r["t"] for r in res.rows if r["t"] > 0}):
        sub = [(r["n"], r["E"]) for r in res.rows if r["t"] == t and r["E"] > 0]
        if len(sub) >= 2:
            res.slopes[t] = fit_slope([p[0] for p in sub], [p[1] for p in sub])
    if refine:
        res.refine_change = _refine_change(1, s, max(n_list), times, lam_target, L)
    return res


def approx2_error(s: float, n_list, times=(0.05, 0.1, 0.2, 0.4),
                  lam_target: float = DEFAULT_LAMBDA, L: float = DEFAULT_L,
                  dt: float | None = None, workers: int = 1,
                  refine: bool = False) -> ApproxErrorResult:
    """Error table E2(n, t) for the corrected second approximants."""
    res = ApproxErrorResult(which=2, s=s)
    res.rows = _collect_rows(2, s, n_list, times, lam_target, L, dt, workers)
    n_big = max(n_list)
    sub = [(r["t"], r["E"]) for r in res.rows
           if r["n"] == n_big and r["t"] > 0 and r["E"] > 0]
    if len(sub) >= 2:
        ts = np.log2([p[0] for p in sub])
        ys = np.log2([p[1] for p in sub])
        res.t_exponent = float(np.polyfit(ts, ys, 1)[0])
    t_small = min(t for t in {r["t"] for r in res.rows} if t > 0)
    subn = [(r["n"], r["E"]) for r in res.rows if r["t"] == t_small and r["E"] > 0]
    if len(subn) >= 2:
        res.slopes[t_small] = fit_slope([p[0] for p in subn], [p[1] for p in subn])
    if refine:
        res.refine_change = _refine_change(2, s, n_big, times, lam_target, L)
    return res
