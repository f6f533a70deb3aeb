"""Experiment configuration, drivers, and CSV/JSON persistence.

Everything here is deterministic: a given configuration always produces
byte-identical output files.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
from dataclasses import dataclass, field, fields

from . import __version__
from .approximants import ApproxErrorResult, fit_slope, approx1_error, approx2_error
from .construction import (
    DEFAULT_L,
    DEFAULT_LAMBDA,
    size_report,
    make_family,
    make_pairs,
    make_f,
    make_u0,
)
from .errors import ConfigurationError
from .evolution import SolverConfig, solve, write_monitors_csv, write_snapshot
from .grid import derivative, lambda_power
from .norms import sobolev_norm

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "load_config",
    "run_construct",
    "run_approx_error",
    "run_nonuniform",
    "run_evolve",
    "write_report_csv",
    "write_report_json",
]

NONUNIFORM_COLUMNS = ("n", "t", "d0", "du", "drho", "pu", "prho", "ratio_u", "ratio_rho")

_DEFAULTS = {
    "s": 2.0,
    "lam": DEFAULT_LAMBDA,
    "n_list": (4, 5, 6, 7, 8),
    "L": DEFAULT_L,
    "N": None,
    "dt": None,
    "T": 0.3,
    "sample_times": (0.0, 0.05, 0.1, 0.2, 0.3),
    "out_dir": None,
    "fmt": "csv",
    "workers": 1,
    "refine": False,
    "snapshots": False,
}


@dataclass(frozen=True)
class ExperimentConfig:
    s: float = 2.0
    lam: float = DEFAULT_LAMBDA
    n_list: tuple = (4, 5, 6, 7, 8)
    L: float = DEFAULT_L
    N: int | None = None
    dt: float | None = None
    T: float = 0.3
    sample_times: tuple = (0.0, 0.05, 0.1, 0.2, 0.3)
    out_dir: str | None = None
    fmt: str = "csv"
    workers: int = 1
    refine: bool = False
    snapshots: bool = False
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.s > 1.5:
            raise ConfigurationError(f"constraint violated: s > 3/2 (got s={self.s})")
        if not (4.0 / 3.0 < self.lam < 1.5):
            raise ConfigurationError(
                f"constraint violated: lambda in (4/3, 3/2) (got lambda={self.lam})"
            )
        if self.fmt not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.fmt!r}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not self.n_list:
            raise ConfigurationError("n_list must not be empty")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "sample_times", tuple(sorted(self.sample_times)))

    def resolved_out_dir(self) -> str:
        if self.out_dir is not None:
            return self.out_dir
        return os.environ.get("TWOCH_OUT", ".")


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "n_list":
        if ".." in raw:
            lo, hi = raw.split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if key == "sample_times":
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if key in ("s", "lam", "L", "dt", "T"):
        return float(raw)
    if key in ("N", "workers"):
        return int(raw)
    if key in ("refine", "snapshots"):
        return raw.lower() in ("1", "true", "yes", "on")
    if key in ("out_dir", "fmt"):
        return raw
    raise ConfigurationError(f"unknown config key {key!r}")


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults, a 'key = value' file, and flag overrides, with provenance."""
    values = dict(_DEFAULTS)
    provenance = {k: "default" for k in values}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigurationError(f"config file not found: {path}")
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(
                        f"{path}:{lineno}: expected 'key = value', got {line!r}"
                    )
                key, raw = (part.strip() for part in line.split("=", 1))
                if key not in values:
                    raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _parse_value(key, raw)
                provenance[key] = "file"
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in values:
            raise ConfigurationError(f"unknown config key {key!r}")
        values[key] = _parse_value(key, val) if isinstance(val, str) else val
        provenance[key] = "flag"
    return ExperimentConfig(provenance=provenance, **values)


def _config_header_lines(config: ExperimentConfig) -> list[str]:
    lines = [f"# twoch {__version__}"]
    for f in fields(config):
        if f.name == "provenance":
            continue
        src = config.provenance.get(f.name, "default")
        lines.append(f"# {f.name} = {getattr(config, f.name)} ({src})")
    return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_table_csv(fh, header_lines, columns, rows, footer_lines=()) -> None:
    for line in header_lines:
        fh.write(line + "\n")
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")
    for line in footer_lines:
        fh.write(line + "\n")


# ---------------------------------------------------------------------------
# construct


@dataclass
class ConstructResult:
    rows: list
    band_ok: bool
    product_ok: bool
    details: dict

    @property
    def passed(self) -> bool:
        return self.band_ok and self.product_ok


def run_construct(config: ExperimentConfig) -> ConstructResult:
    """Normalized size table of the data families plus its pass/fail checks."""
    fams = [
        make_family(config.s, n, lam_target=config.lam, L=config.L, N=config.N)
        for n in config.n_list
    ]
    rows = size_report(fams)
    band_cols = ("l1_u0", "l1_grad", "hs_m1", "hs", "hs_p1", "linf_f")
    details: dict = {}
    band_ok = True
    for col in band_cols:
        vals = [r[col] for r in rows]
        ratio = max(vals) / min(vals)
        details[f"band_{col}"] = ratio
        band_ok = band_ok and ratio <= 2.0
    product_ok = all(r["prod_u"] > 0 and r["prod_rho"] > 0 for r in rows)
    for col in ("prod_u", "prod_rho"):
        for a, b in zip(rows, rows[1:]):
            if a["n"] >= 6:
                ratio = b[col] / a[col]
                details[f"ratio_{col}_n{a['n']}to{b['n']}"] = ratio
                product_ok = product_ok and abs(ratio - 1.0) <= 0.05
    return ConstructResult(rows=rows, band_ok=band_ok, product_ok=product_ok,
                           details=details)


SIZE_COLUMNS = ("n", "l1_u0", "l1_grad", "hs_m1", "hs", "hs_p1", "linf_f",
                   "prod_u", "prod_rho")


# ---------------------------------------------------------------------------
# approx-error


def run_approx_error(config: ExperimentConfig, which: int):
    """Approximant error table plus its rate criteria; returns (result, checks)."""
    if which not in (1, 2):
        raise ConfigurationError("which must be 1 or 2")
    if config.provenance.get("sample_times") == "default":
        times = (0.05, 0.1, 0.2, 0.3) if which == 1 else (0.05, 0.1, 0.2, 0.4)
    else:
        times = tuple(t for t in config.sample_times if t > 0)
    kwargs = dict(lam_target=config.lam, L=config.L, dt=config.dt,
                  workers=config.workers, refine=config.refine)
    checks: dict = {}
    if which == 1:
        res = approx1_error(config.s, config.n_list, times=times, **kwargs)
        t_ref = 0.2 if 0.2 in times else max(times)
        sub = [(r["n"], r["E"]) for r in res.rows if r["t"] == t_ref]
        checks["monotone"] = all(a[1] > b[1] for a, b in zip(sub, sub[1:]))
        checks["slope"] = res.slopes.get(t_ref)
        checks["slope_ok"] = (
            checks["slope"] is not None
            and checks["slope"] <= -(config.s - 1.5) / 2.0 + 0.2
        )
        ok = checks["monotone"] and checks["slope_ok"]
    else:
        res = approx2_error(config.s, config.n_list, times=times, **kwargs)
        t_small = min(times)
        checks["t_exponent"] = res.t_exponent
        checks["t_exponent_ok"] = res.t_exponent is not None and res.t_exponent >= 1.7
        checks["n_slope"] = res.slopes.get(t_small)
        checks["n_slope_ok"] = (
            checks["n_slope"] is not None
            and checks["n_slope"] <= -(config.s - 1.5) + 0.2
        )
        ok = checks["t_exponent_ok"] and checks["n_slope_ok"]
    if config.refine:
        checks["refine_change"] = res.refine_change
        ok = ok and res.refine_change is not None and res.refine_change < 0.05
    checks["passed"] = ok
    return res, checks


def write_approx_csv(fh, config: ExperimentConfig, res: ApproxErrorResult) -> None:
    footer = [f"fitted_slope,t={t:.17g},{v:.17g}" for t, v in sorted(res.slopes.items())]
    if res.t_exponent is not None:
        footer.append(f"fitted_t_exponent,n={max(r['n'] for r in res.rows)},{res.t_exponent:.17g}")
    if res.refine_change is not None:
        footer.append(f"refine_change,,{res.refine_change:.17g}")
    write_table_csv(fh, _config_header_lines(config),
                    ("n", "t", "E", "normalized_E"), res.rows, footer)


# ---------------------------------------------------------------------------
# nonuniform


@dataclass
class ExperimentReport:
    rows: list
    criteria: dict

    @property
    def passed(self) -> bool:
        return bool(self.criteria.get("passed"))


def _nonuniform_rows(s, lam_target, n, L, N, dt, T, sample_times) -> list[dict]:
    """Solve both initial pairs for one n and tabulate distances/predictions."""
    fam = make_family(s, n, lam_target=lam_target, L=L, N=N)
    (u0, rho0), (ut0, rhot0) = make_pairs(fam)
    f = make_f(fam)
    d0 = sobolev_norm(f, s) + sobolev_norm(lambda_power(f, 1.0), s - 1)
    u0n = make_u0(fam)
    pu_base = sobolev_norm(f * derivative(u0n), s)
    prho_base = sobolev_norm(f * derivative(lambda_power(u0n, 1.0)), s - 1)
    cfg = SolverConfig(
        dt=dt if dt is not None else 0.5 * fam.grid.dx,
        T=T,
        sample_times=tuple(sample_times),
        norm_s=s,
    )
    traj1 = solve(u0, rho0, cfg)
    traj2 = solve(ut0, rhot0, cfg)
    rows = []
    for st1, st2 in zip(traj1.states, traj2.states):
        t = st1.t
        du = sobolev_norm(st2.u - st1.u, s)
        drho = sobolev_norm(st2.rho - st1.rho, s - 1)
        pu = t * pu_base
        prho = t * prho_base
        rows.append(
            {
                "n": n,
                "t": t,
                "d0": d0,
                "du": du,
                "drho": drho,
                "pu": pu,
                "prho": prho,
                "ratio_u": du / pu if pu > 0 else 0.0,
                "ratio_rho": drho / prho if prho > 0 else 0.0,
            }
        )
    return rows


def run_nonuniform(config: ExperimentConfig) -> ExperimentReport:
    """The headline experiment: vanishing initial distance, persistent gap."""
    args = [
        (config.s, config.lam, n, config.L, config.N, config.dt, config.T,
         config.sample_times)
        for n in config.n_list
    ]
    if config.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_n = list(pool.map(_nonuniform_rows_star, args))
    else:
        per_n = [_nonuniform_rows(*a) for a in args]
    rows = [row for rows_n in per_n for row in rows_n]

    criteria: dict = {}
    ns = sorted({r["n"] for r in rows})
    d0s = {r["n"]: r["d0"] for r in rows}
    if len(ns) >= 2:
        criteria["d0_slope"] = fit_slope(ns, [d0s[n] for n in ns])
        criteria["d0_slope_ok"] = abs(criteria["d0_slope"] + 1.0) <= 0.1
    else:
        criteria["d0_slope"] = None
        criteria["d0_slope_ok"] = True

    init_norms = []
    for n in ns:
        fam = make_family(config.s, n, lam_target=config.lam, L=config.L, N=config.N)
        u0 = make_u0(fam)
        init_norms.append(
            sobolev_norm(u0, config.s)
            + sobolev_norm(lambda_power(u0, 1.0), config.s - 1)
        )
    criteria["init_norm_band"] = max(init_norms) / min(init_norms)
    criteria["init_bounded_ok"] = criteria["init_norm_band"] <= 2.0

    n_big = max(ns)
    big = [r for r in rows if r["n"] == n_big and r["t"] > 0]
    criteria["separation_ok"] = bool(big) and all(
        r["ratio_u"] >= 0.5 and r["ratio_rho"] >= 0.5 for r in big
    )
    if big:
        criteria["min_du_over_t"] = min(r["du"] / r["t"] for r in big)
        criteria["min_drho_over_t"] = min(r["drho"] / r["t"] for r in big)
    criteria["separation_threshold"] = 0.5
    criteria["passed"] = (
        criteria["d0_slope_ok"]
        and criteria["init_bounded_ok"]
        and criteria["separation_ok"]
    )
    return ExperimentReport(rows=rows, criteria=criteria)


def _nonuniform_rows_star(args):
    return _nonuniform_rows(*args)


def write_report_csv(fh, config: ExperimentConfig, report: ExperimentReport) -> None:
    write_table_csv(fh, _config_header_lines(config), NONUNIFORM_COLUMNS, report.rows)


def write_report_json(fh, config: ExperimentConfig, report: ExperimentReport) -> None:
    payload = {
        "version": __version__,
        "config": {
            f.name: getattr(config, f.name)
            for f in fields(config)
            if f.name != "provenance"
        },
        "provenance": config.provenance,
        "rows": report.rows,
        "criteria": report.criteria,
    }
    json.dump(payload, fh, indent=2, sort_keys=True, default=list)
    fh.write("\n")


# ---------------------------------------------------------------------------
# evolve


def run_evolve(config: ExperimentConfig, out_dir: str) -> list[str]:
    """Solve the base pair for each n; write monitor CSVs and optional snapshots."""
    written = []
    for n in config.n_list:
        fam = make_family(config.s, n, lam_target=config.lam, L=config.L, N=config.N)
        (u0, rho0), _ = make_pairs(fam)
        cfg = SolverConfig(
            dt=config.dt if config.dt is not None else 0.5 * fam.grid.dx,
            T=config.T,
            sample_times=config.sample_times,
            norm_s=config.s,
        )
        traj = solve(u0, rho0, cfg)
        path = os.path.join(out_dir, f"evolve_n{n}.csv")
        with open(path, "w") as fh:
            for line in _config_header_lines(config):
                fh.write(line + "\n")
            write_monitors_csv(fh, traj.monitors)
        written.append(path)
        if config.snapshots:
            snap = os.path.join(out_dir, f"evolve_n{n}.bin")
            with open(snap, "wb") as fh:
                for st in traj.states:
                    write_snapshot(fh, st)
            written.append(snap)
    return written
