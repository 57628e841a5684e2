import json
import subprocess
import sys

import pytest

from lyapflow import io as lio
from lyapflow.cli import run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_closed_form(capsys):
    code, out, _ = run(capsys, "closed-form", "--k", "0.7071067811865476")
    assert code == 0
    table = lio.read_csv(out)
    row = dict(zip(table.columns, table.rows[0]))
    assert row["gamma1_over_tau2"] == pytest.approx(0.4569, abs=1e-4)
    assert table.manifest.subcommand == "closed-form"


def test_series_rational_row(capsys):
    code, out, _ = run(capsys, "series", "--d", "3", "--branch", "0", "--order", "3", "--cumulant", "1")
    assert code == 0
    assert out.splitlines()[-1] == "2,-12/5,-72/175,-34128/125125"
    table = lio.read_csv(out)
    assert lio.rational_row(table.rows[0]) == "2, -12/5, -72/175, -34128/125125"


def test_series_polynomial_table(capsys):
    code, out, _ = run(capsys, "series", "--d", "2", "--order", "2", "--L")
    table = lio.read_csv(out)
    assert code == 0 and table.columns[0] == "k2_power"
    assert table.rows[0][1:4] == [0, 1, lio.parse_value("1/2")]


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "series", "--bogus")
    assert code == 1 and "usage" in err
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "spectrum", "--k2", "2", "--ell", "0")[0] == 1


def test_non_convergence_exit_code(capsys):
    code, _, err = run(capsys, "spectrum", "--d", "2", "--k2", "0.9", "--ell", "3.3", "--tol", "1e-15", "--nmax", "16")
    assert code == 2 and "numerical failure" in err


def test_spectrum_and_out_file(capsys, tmp_path):
    target = tmp_path / "mu.csv"
    code, out, _ = run(capsys, "--out", str(target), "spectrum", "--d", "3", "--k2", "1/5", "--ell", "4")
    assert code == 0 and out == ""
    table = lio.read_csv(target.read_text())
    row = dict(zip(table.columns, table.rows[0]))
    assert row["mu"] == pytest.approx(-4.1938794623, abs=1e-9)


def test_json_output(capsys):
    code, out, _ = run(capsys, "--format", "json", "stencil", "--which", "12", "--l", "0", "--m", "0")
    data, manifest = lio.read_json(out)
    assert code == 0 and manifest.subcommand == "stencil"
    assert data["columns"][:2] == ["l", "m"]


def test_simulate_seed_override(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "flow.json"
    cfg.write_text(json.dumps({"d": 2, "tau": 0.1, "seed": 1}))
    args = ("simulate", "--config", str(cfg), "--n", "50", "--trials", "40", "--cumulants", "1")
    base = lio.read_csv(run(capsys, *args)[1])
    monkeypatch.setenv("LYAPFLOW_SEED", "1")
    same = lio.read_csv(run(capsys, *args)[1])
    monkeypatch.setenv("LYAPFLOW_SEED", "2")
    other = lio.read_csv(run(capsys, *args)[1])
    assert base.columns == ["quantity", "value", "stderr", "trials", "n"]
    assert same.rows == base.rows and other.rows != base.rows
    assert other.manifest.config_hash != base.manifest.config_hash


def test_simulate_errors(capsys, tmp_path):
    assert run(capsys, "simulate", "--config", str(tmp_path / "missing.json"), "--n", "5", "--trials", "40")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 2, "profile": {"cos": [1.0, 1.0]}}')
    assert run(capsys, "simulate", "--config", str(bad), "--n", "5", "--trials", "40")[0] == 1


def test_figure_rows(capsys):
    code, out, _ = run(capsys, "figure", "--which", "cumulants-vs-strain", "--d", "2", "--points", "2")
    rows = lio.read_csv(out).rows
    assert code == 0
    assert rows[0][0] == 0 and rows[0][2] == pytest.approx(0.4569, abs=1e-4)
    assert rows[1][0] == 0.5 and rows[1][2:] == pytest.approx([1, 1, 0, 0], abs=1e-8)


def test_rate(capsys):
    code, out, _ = run(capsys, "rate", "--d", "2", "--ell", "0.4569465810444", "1.0")
    rows = lio.read_csv(out).rows
    assert code == 0 and rows[0][3] == pytest.approx(0.0, abs=1e-10) and rows[1][3] > 0


def test_validate_exit_codes(capsys):
    code, out, err = run(capsys, "validate", "criterion", "--number", "5", "--number", "11")
    assert code == 0 and err.count("[PASS]") == 2
    assert run(capsys, "validate", "casimir")[0] == 0
    assert run(capsys, "validate", "criterion")[0] == 1
    assert run(capsys, "validate", "criterion", "--number", "13")[0] == 1


def test_console_script():
    out = subprocess.run(
        [sys.executable, "-m", "lyapflow.cli", "closed-form", "--k", "0"], capture_output=True, text=True, check=True
    ).stdout
    assert out.startswith("# {")
