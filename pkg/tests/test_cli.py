import json
import subprocess
import sys

import pytest

from trialreturn.cli import main
from trialreturn.sweep import parse_csv

REF = ["--v1", "2", "--v2", "1", "--p2", "0", "--alpha", "0.25", "--r", "0.125"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_case1(capsys):
    code, out, _ = run(capsys, "solve", "--v1", "3", "--v2", "1", "--p2", "0", "--alpha", "0.2", "--r", "0.6", "--json")
    data = json.loads(out)
    assert code == 0
    assert (data["optimal_p1"], data["regime"], data["case"]) == (0.5, "Pi1", "CaseI")


def test_solve_case2(capsys):
    code, out, _ = run(capsys, "solve", *REF, "--json")
    data = json.loads(out)
    assert (data["optimal_p1"], data["optimal_profit"], data["regime"]) == (1.0, 0.25, "Pi3")


def test_ordering_error_exit_code(capsys):
    code, _, err = run(capsys, "solve", "--v1", "1", "--v2", "2")
    assert code == 2
    assert "v1 must exceed v2" in err


def test_out_of_range_exit_code(capsys):
    assert run(capsys, "solve", "--alpha", "1.5")[0] == 2
    assert run(capsys, "simulate", "--price", "0.3", "--n", "0")[0] == 2
    assert run(capsys, "profit")[0] == 2


def test_coverage_command(capsys):
    code, out, _ = run(capsys, "coverage", *REF, "--json")
    data = json.loads(out)
    assert code == 0 and data["recommend_coverage"] is False


def test_profit_command(capsys):
    code, out, _ = run(capsys, "profit", *REF, "--price", "0.25", "--json")
    data = json.loads(out)
    assert data["profit"] == 0.15625 and data["regime"] == "Pi4"


def test_sweep_writes_csv(tmp_path, capsys):
    path = tmp_path / "fig5a.csv"
    code, out, _ = run(capsys, "sweep", "--v1", "2", "--v2", "1", "--p2", "0", "--plane", "alpha-r", "--steps", "100", "-o", str(path))
    assert code == 0
    rows = parse_csv(path.read_text())
    assert len(rows) == 10_000
    assert not any(r["regime"] == "Pi1" for r in rows)
    assert "Pi1" not in out


def test_curve_writes_svg(tmp_path, capsys):
    path = tmp_path / "fig4.svg"
    code, _, _ = run(capsys, "curve", *REF[:-2], "--r", "0.45", "-o", str(path))
    text = path.read_text()
    assert code == 0
    assert text.startswith("<?xml") and 'data-regime="Pi4"' in text and ">Pi4</text>" in text


def test_unwritable_output_exit_code(capsys):
    assert run(capsys, "sweep", "--steps", "3", "-o", "/nonexistent-dir/x.csv")[0] == 3


def test_format_inferred_or_rejected(tmp_path, capsys):
    assert run(capsys, "sweep", "--steps", "3", "-o", str(tmp_path / "x.png"))[0] == 0
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--format", "png"])
    assert info.value.code == 2


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"market": {"v1": 3, "v2": 1, "p2_bar": 0, "alpha": 0.2, "r": 0.6}}))
    data = json.loads(run(capsys, "solve", "--config", str(cfg), "--json")[1])
    assert data["optimal_p1"] == 0.5
    data = json.loads(run(capsys, "solve", "--config", str(cfg), "--alpha", "0.3", "--json")[1])
    assert data["market"]["alpha"] == 0.3 and data["regime"] == "Pi3"


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run(capsys, "solve", "--config", str(cfg))[0] == 2
    assert run(capsys, "solve", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_verify_exit_codes(capsys):
    assert run(capsys, "verify", "--n", "200000")[0] == 0
    code, out, _ = run(capsys, "verify", "--n", "200000", "--inject-fault", "0.001")
    assert code == 1 and "FAILED" in out
    code, out, _ = run(capsys, "verify", "--n", "100")
    assert code == 0 and "inconclusive" in out


def test_simulate_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(capsys, "simulate", *REF, "--price", "0.25", "--n", "100000", "--seed", "3", "-o", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_workers_env_var(monkeypatch, capsys):
    monkeypatch.setenv("TRIALRETURN_WORKERS", "3")
    one = run(capsys, "simulate", *REF, "--price", "0.4", "--n", "200000", "--json")[1]
    monkeypatch.setenv("TRIALRETURN_WORKERS", "1")
    assert run(capsys, "simulate", *REF, "--price", "0.4", "--n", "200000", "--json")[1] == one


def test_console_module_entry():
    res = subprocess.run([sys.executable, "-m", "trialreturn", "solve", *REF], capture_output=True, text=True)
    assert res.returncode == 0 and "regime=Pi3" in res.stdout
