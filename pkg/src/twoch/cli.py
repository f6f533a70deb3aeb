"""Command-line harness.

Subcommands: selfcheck | construct | evolve | approx-error {1|2} | nonuniform.
Exit codes: 0 criteria met, 1 criteria failed, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .errors import ConfigurationError, NumericalError
from .experiments import (
    SIZE_COLUMNS,
    load_config,
    run_approx_error,
    run_construct,
    run_evolve,
    run_nonuniform,
    write_approx_csv,
    write_report_csv,
    write_report_json,
    write_table_csv,
    _config_header_lines,
)
from .selfcheck import run_selfcheck

EXIT_OK = 0
EXIT_CRITERIA_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="line-oriented 'key = value' file")
    p.add_argument("--s", dest="s", help="Sobolev index s > 3/2")
    p.add_argument("--lambda", dest="lam", help="carrier prefactor in (4/3, 3/2)")
    p.add_argument("--n-list", dest="n_list", help="e.g. '4,5,6' or '4..8'")
    p.add_argument("--L", dest="L", help="domain half width")
    p.add_argument("--N", dest="N", help="grid size (default: auto per n)")
    p.add_argument("--dt", dest="dt", help="time step (default: 0.5 dx)")
    p.add_argument("--T", dest="T", help="final time")
    p.add_argument("--sample-times", dest="sample_times", help="comma list in [0, T]")
    p.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), help="report format")
    p.add_argument("--workers", dest="workers", help="parallel n-sweep width")
    p.add_argument("--refine", action="store_const", const=True, dest="refine",
                   default=None, help="run the N x 2, dt / 2 refinement gate")
    p.add_argument("--snapshots", action="store_const", const=True, dest="snapshots",
                   default=None, help="dump binary field snapshots (evolve)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoch", description=__doc__)
    parser.add_argument("--version", action="version", version=f"twoch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("selfcheck", "construct", "evolve", "nonuniform"):
        p = sub.add_parser(name)
        _add_common_flags(p)
    p = sub.add_parser("approx-error")
    p.add_argument("which", type=int, choices=(1, 2))
    _add_common_flags(p)
    return parser


def _config_from_args(args) -> "ExperimentConfig":
    override_keys = ("s", "lam", "n_list", "L", "N", "dt", "T", "sample_times",
                     "out_dir", "fmt", "workers", "refine", "snapshots")
    overrides = {k: getattr(args, k, None) for k in override_keys}
    return load_config(args.config, overrides)


def _out_path(config, name: str) -> str:
    out_dir = config.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _cmd_selfcheck(args, out=print) -> int:
    results = run_selfcheck(echo=out)
    failed = [r for r in results if not r.passed]
    out(f"selfcheck: {len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_CRITERIA_FAILED


def _cmd_construct(args, out=print) -> int:
    config = _config_from_args(args)
    result = run_construct(config)
    path = _out_path(config, "sizes.csv")
    footer = [f"# {k},{v:.17g}" for k, v in sorted(result.details.items())]
    with open(path, "w", newline="") as fh:
        write_table_csv(fh, _config_header_lines(config), SIZE_COLUMNS,
                        result.rows, footer)
    out(f"wrote {path}")
    out(f"band check: {'ok' if result.band_ok else 'FAILED'}; "
        f"product positivity/stability: {'ok' if result.product_ok else 'FAILED'}")
    return EXIT_OK if result.passed else EXIT_CRITERIA_FAILED


def _cmd_approx_error(args, out=print) -> int:
    config = _config_from_args(args)
    res, checks = run_approx_error(config, args.which)
    path = _out_path(config, f"approx{args.which}_error.csv")
    with open(path, "w", newline="") as fh:
        write_approx_csv(fh, config, res)
    out(f"wrote {path}")
    for k, v in checks.items():
        out(f"{k}: {v}")
    return EXIT_OK if checks["passed"] else EXIT_CRITERIA_FAILED


def _cmd_nonuniform(args, out=print) -> int:
    config = _config_from_args(args)
    report = run_nonuniform(config)
    ext = "csv" if config.fmt == "csv" else "json"
    path = _out_path(config, f"nonuniform.{ext}")
    with open(path, "w", newline="") as fh:
        if config.fmt == "csv":
            write_report_csv(fh, config, report)
        else:
            write_report_json(fh, config, report)
    out(f"wrote {path}")
    for k, v in report.criteria.items():
        out(f"{k}: {v}")
    return EXIT_OK if report.passed else EXIT_CRITERIA_FAILED


def _cmd_evolve(args, out=print) -> int:
    config = _config_from_args(args)
    out_dir = config.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)
    for path in run_evolve(config, out_dir):
        out(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "selfcheck": _cmd_selfcheck,
        "construct": _cmd_construct,
        "approx-error": _cmd_approx_error,
        "nonuniform": _cmd_nonuniform,
        "evolve": _cmd_evolve,
    }
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
