"""Acceptance gate: the seven package-level criteria, one test each.

Each test prints a single summary line "[criterion k] <name>: PASS/FAIL ..."
in addition to its assertion, so a verbose pytest run doubles as the
acceptance report.  Runtime for the full gate is a few minutes.
"""

import time

import numpy as np

from twoch import SolverConfig, SpectralField, make_grid, solve
from twoch.cli import EXIT_OK, main
from twoch.construction import make_family, make_pairs
from twoch.evolution import default_config
from twoch.experiments import load_config, run_approx_error, run_construct, run_nonuniform
from twoch.norms import sobolev_norm
from twoch.selfcheck import run_selfcheck


def _report(k, name, ok, details):
    line = f"[criterion {k}] {name}: {'PASS' if ok else 'FAIL'} ({details})"
    print(line)
    assert ok, line


def test_criterion_1_selfcheck_green():
    start = time.perf_counter()
    results = run_selfcheck()
    elapsed = time.perf_counter() - start
    failed = [r for r in results if not r.passed]
    ok = not failed and elapsed < 30.0
    _report(1, "selfcheck suite green",
            ok, f"{len(results) - len(failed)}/{len(results)} checks, {elapsed:.1f}s")


def test_criterion_2_data_family_table():
    start = time.perf_counter()
    config = load_config(None, {"s": "2.0", "n_list": "4..8"})
    result = run_construct(config)
    elapsed = time.perf_counter() - start
    ok = result.band_ok and result.product_ok and elapsed < 60.0
    bands = max(v for k, v in result.details.items() if k.startswith("band_"))
    _report(2, "size table s=2 n=4..8",
            ok, f"max band ratio {bands:.3f}, products ok={result.product_ok}, "
                f"{elapsed:.1f}s")


def test_criterion_3_first_approximant_rate():
    config = load_config(None, {"n_list": "4..7", "refine": True})
    res, checks = run_approx_error(config, 1)
    slope = checks["slope"]
    ok = (checks["monotone"] and checks["slope_ok"]
          and checks["refine_change"] < 0.05)
    _report(3, "first-approximant error rate",
            ok, f"slope(t=0.2)={slope:.3f} (need <= -0.05), "
                f"monotone={checks['monotone']}, "
                f"refine change={checks['refine_change']:.2e}")


def test_criterion_4_second_approximant_rates():
    config = load_config(None, {"n_list": "4..8"})
    res, checks = run_approx_error(config, 2)
    ok = checks["t_exponent_ok"] and checks["n_slope_ok"]
    _report(4, "second-approximant error rates",
            ok, f"t-exponent(n=8)={checks['t_exponent']:.3f} (need >= 1.7), "
                f"n-slope(t=0.05)={checks['n_slope']:.3f} (need <= -0.3)")


def test_criterion_5_nonuniform_dependence():
    config = load_config(None, {"n_list": "4..8"})
    report = run_nonuniform(config)
    c = report.criteria
    big = [r for r in report.rows if r["n"] == 8 and r["t"] in (0.1, 0.2, 0.3)]
    ratios_ok = all(r["ratio_u"] >= 0.5 and r["ratio_rho"] >= 0.5 for r in big)
    floor_ok = c["min_du_over_t"] > 0 and c["min_drho_over_t"] > 0
    ok = c["d0_slope_ok"] and c["init_bounded_ok"] and ratios_ok and floor_ok
    _report(5, "non-uniform dependence",
            ok, f"d0 slope={c['d0_slope']:.4f} (need -1 +/- 0.1), "
                f"init band={c['init_norm_band']:.3f}, "
                f"min d_u/t={c['min_du_over_t']:.3e}")


def test_criterion_6_solver_quality_gates():
    # (a) temporal order via Richardson comparison on O(1) smooth data
    grid = make_grid(np.pi, 256)
    u0 = SpectralField.from_function(grid, lambda x: 0.2 * np.sin(x))
    rho0 = SpectralField.from_function(grid, lambda x: 0.1 * np.cos(x))

    def final_u(dt):
        cfg = SolverConfig(dt=dt, T=0.1, sample_times=(0.1,))
        return solve(u0, rho0, cfg).states[-1].u

    ref = final_u(0.00125)
    errs = [sobolev_norm(final_u(dt) - ref, 0.0) for dt in (0.01, 0.005)]
    order = float(np.log2(errs[0] / errs[1]))

    # (b) spectral self-convergence under N-doubling at fixed dt
    fam_a = make_family(2.0, 4)
    fam_b = make_family(2.0, 4, N=2 * fam_a.grid.N)
    dt = 0.25 * fam_a.grid.dx

    def sampled_norm(fam):
        (w0, r0) = make_pairs(fam)[0]
        cfg = SolverConfig(dt=dt, T=0.1, sample_times=(0.1,), norm_s=2.0)
        traj = solve(w0, r0, cfg)
        return traj.monitors[-1]["Hs_u"] + traj.monitors[-1]["Hsm1_rho"]

    na, nb = sampled_norm(fam_a), sampled_norm(fam_b)
    spectral = abs(na - nb) / na

    # (c) conservation drift over T = 0.5 on family data
    (w0, r0) = make_pairs(fam_a)[0]
    cfg = default_config(fam_a.grid, T=0.5, sample_times=(0.0, 0.5), norm_s=2.0)
    traj = solve(w0, r0, cfg)
    e0, e1 = traj.monitors[0]["E"], traj.monitors[-1]["E"]
    m0, m1 = traj.monitors[0]["M"], traj.monitors[-1]["M"]
    mass_scale = fam_a.grid.dx * float(np.sum(np.abs(r0.samples)))
    e_drift = abs(e1 - e0) / e0
    m_drift = abs(m1 - m0) / mass_scale

    ok = order >= 3.5 and spectral < 1e-8 and e_drift < 1e-6 and m_drift < 1e-6
    _report(6, "solver quality gates",
            ok, f"RK4 order={order:.2f} (need >= 3.5), "
                f"N-doubling change={spectral:.2e} (need < 1e-8), "
                f"E drift={e_drift:.2e}, M drift={m_drift:.2e} (need < 1e-6)")


def test_criterion_7_byte_determinism(tmp_path):
    args = ["nonuniform", "--n-list", "4", "--T", "0.1",
            "--sample-times", "0,0.05,0.1"]
    out = tmp_path / "run"
    assert main(args + ["--out", str(out)]) == EXIT_OK
    bytes_a = (out / "nonuniform.csv").read_bytes()
    assert main(args + ["--out", str(out)]) == EXIT_OK
    bytes_b = (out / "nonuniform.csv").read_bytes()
    ok = bytes_a == bytes_b and len(bytes_a) > 0
    _report(7, "byte-identical reruns", ok, f"{len(bytes_a)} bytes compared")
