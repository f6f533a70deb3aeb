"""Configuration loading, CLI subcommands, exit codes, and file formats."""

import json

import numpy as np
import pytest

from twoch.cli import EXIT_CONFIG_ERROR, EXIT_OK, main
from twoch.errors import ConfigurationError
from twoch.experiments import ExperimentConfig, load_config


def test_defaults():
    cfg = load_config()
    assert cfg.s == 2.0
    assert cfg.lam == 1.4
    assert cfg.n_list == (4, 5, 6, 7, 8)
    assert cfg.L == 32.0 * np.pi
    assert cfg.T == 0.3
    assert cfg.fmt == "csv"
    assert all(v == "default" for v in cfg.provenance.values())


def test_empty_config_file(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("# just a comment\n\n")
    cfg = load_config(str(path))
    assert cfg == ExperimentConfig()


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("s = 1.8\nn_list = 4..6\nT = 0.2\n")
    cfg = load_config(str(path), {"T": "0.1"})
    assert cfg.s == 1.8
    assert cfg.n_list == (4, 5, 6)
    assert cfg.T == 0.1
    assert cfg.provenance["s"] == "file"
    assert cfg.provenance["T"] == "flag"
    assert cfg.provenance["lam"] == "default"


def test_n_list_comma_form():
    cfg = load_config(None, {"n_list": "4,6,8"})
    assert cfg.n_list == (4, 6, 8)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(str(tmp_path / "missing.cfg"))
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign here\n")
    with pytest.raises(ConfigurationError):
        load_config(str(bad))
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("wavelength = 3\n")
    with pytest.raises(ConfigurationError):
        load_config(str(unknown))


def test_constraint_messages():
    with pytest.raises(ConfigurationError, match="s > 3/2"):
        load_config(None, {"s": "1.5"})
    cfg = load_config(None, {"s": "1.51"})  # boundary: accepted
    assert cfg.s == 1.51
    with pytest.raises(ConfigurationError, match=r"lambda in \(4/3, 3/2\)"):
        load_config(None, {"lam": "1.6"})


def test_cli_exit_code_config_error(capsys):
    code = main(["construct", "--s", "1.5"])
    assert code == EXIT_CONFIG_ERROR
    assert "s > 3/2" in capsys.readouterr().err


def test_cli_selfcheck(capsys):
    assert main(["selfcheck"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out


def test_cli_construct_single_n(tmp_path, capsys):
    code = main(["construct", "--n-list", "4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    lines = (tmp_path / "sizes.csv").read_text().splitlines()
    assert lines[0].startswith("# twoch ")
    header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
    assert lines[header_idx] == "n,l1_u0,l1_grad,hs_m1,hs,hs_p1,linf_f,prod_u,prod_rho"
    data = [l for l in lines[header_idx + 1:] if not l.startswith("#")]
    assert len(data) == 1
    assert data[0].startswith("4,")


def test_cli_construct_respects_env_out(tmp_path, monkeypatch):
    monkeypatch.setenv("TWOCH_OUT", str(tmp_path))
    assert main(["construct", "--n-list", "4"]) == EXIT_OK
    assert (tmp_path / "sizes.csv").exists()


def test_cli_nonuniform_csv_schema(tmp_path):
    code = main(["nonuniform", "--n-list", "4", "--T", "0.05",
                 "--sample-times", "0,0.05", "--out", str(tmp_path)])
    assert code == EXIT_OK
    lines = (tmp_path / "nonuniform.csv").read_text().splitlines()
    header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
    assert lines[header_idx] == "n,t,d0,du,drho,pu,prho,ratio_u,ratio_rho"
    rows = lines[header_idx + 1:]
    assert len(rows) == 2
    first = rows[0].split(",")
    # t=0 distance equals the H^s norm of f_n, echoed in d0's u-part
    assert float(first[1]) == 0.0
    assert float(first[3]) > 0.0


def test_cli_nonuniform_json(tmp_path):
    code = main(["nonuniform", "--n-list", "4", "--T", "0.05",
                 "--sample-times", "0,0.05", "--format", "json",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = json.loads((tmp_path / "nonuniform.json").read_text())
    assert set(payload) == {"version", "config", "provenance", "rows", "criteria"}
    assert payload["config"]["s"] == 2.0
    assert payload["provenance"]["n_list"] == "flag"
    assert all(r["n"] == 4 for r in payload["rows"])


def test_cli_evolve_outputs(tmp_path):
    code = main(["evolve", "--n-list", "4", "--T", "0.02",
                 "--sample-times", "0,0.02", "--snapshots", "--out", str(tmp_path)])
    assert code == EXIT_OK
    mon = (tmp_path / "evolve_n4.csv").read_text().splitlines()
    header_idx = next(i for i, l in enumerate(mon) if not l.startswith("#"))
    assert mon[header_idx] == "t,Hs_u,Hsm1_rho,E,M,min_ux"
    snap = (tmp_path / "evolve_n4.bin").read_bytes()
    assert snap.startswith(b"TWOCH v1 N=")


def test_float_formatting_uses_17_digits(tmp_path):
    main(["construct", "--n-list", "4", "--out", str(tmp_path)])
    lines = (tmp_path / "sizes.csv").read_text().splitlines()
    row = next(l for l in lines if l.startswith("4,"))
    value = row.split(",")[1]
    assert value == f"{float(value):.17g}"
    assert len(value.replace("-", "").replace(".", "").lstrip("0")) >= 15


def test_workers_parallel_nonuniform_matches_serial(tmp_path):
    a, b = tmp_path / "serial", tmp_path / "parallel"
    args = ["nonuniform", "--n-list", "4,5", "--T", "0.05",
            "--sample-times", "0,0.05"]
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--workers", "2", "--out", str(b)]) == EXIT_OK
    text_a = (a / "nonuniform.csv").read_text()
    text_b = (b / "nonuniform.csv").read_text()
    # identical apart from the echoed workers / output-directory lines
    strip = lambda s: [l for l in s.splitlines()
                       if not l.startswith(("# workers", "# out_dir"))]
    assert strip(text_a) == strip(text_b)
