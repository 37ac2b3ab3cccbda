"""Tests for the command-line interface."""

import csv
import json

import pytest

import app.main as cli
from app.main import EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO, EXIT_OK, EXIT_VERIFY, main
from app.schemas.results import VerifyCheck, VerifyReport
from app.utils.exceptions import DivergenceError, InvalidArgumentError

SHORT = ["--dt", "0.01", "--duration", "0.2"]


def _metrics_rows(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_simulate_builtin_scenario(tmp_path, capsys):
    """simulate --scenario writes the run log and a metrics row."""
    code = main([*SHORT, "simulate", "--scenario", "pointing", "--out", str(tmp_path)])
    assert code == EXIT_OK
    run_csv = tmp_path / "pointing.csv"
    assert run_csv.exists()
    assert len(run_csv.read_text(encoding="utf-8").splitlines()) == 21 + 1
    rows = _metrics_rows(tmp_path / "metrics.csv")
    assert rows[0]["name"] == "pointing"
    assert "pointing: settling=" in capsys.readouterr().out


def test_simulate_config_file(tmp_path):
    """simulate --config honours the file and the global overrides."""
    config = tmp_path / "case.conf"
    config.write_text("scenario = pointing-flip\nname = case\nsliding.kind = unsigned\nseed = 3\n", encoding="utf-8")
    code = main(["--seed", "5", *SHORT, "simulate", "--config", str(config), "--out", str(tmp_path / "out")])
    assert code == EXIT_OK
    rows = _metrics_rows(tmp_path / "out" / "metrics.csv")
    assert rows[0]["sliding"] == "unsigned"


def test_compare_preserves_order(tmp_path, capsys):
    """compare writes one CSV per scenario and metrics rows in input order."""
    configs = []
    for name, kind in (("b-lo", "legacy-lo"), ("a-proposed", "proposed")):
        path = tmp_path / f"{name}.conf"
        path.write_text(f"scenario = pointing\nname = {name}\nsliding.kind = {kind}\n", encoding="utf-8")
        configs.append(str(path))
    out = tmp_path / "cmp"
    code = main([*SHORT, "compare", "--configs", *configs, "--scenarios", "equator-crossing", "--out", str(out)])
    assert code == EXIT_OK
    names = [row["name"] for row in _metrics_rows(out / "metrics.csv")]
    assert names == ["b-lo", "a-proposed", "equator-crossing"]
    for name in names:
        assert (out / f"{name}.csv").exists()


def test_compare_duplicate_names(tmp_path):
    """Two scenarios with one name are a configuration error."""
    code = main([*SHORT, "compare", "--scenarios", "pointing", "pointing", "--out", str(tmp_path)])
    assert code == EXIT_CONFIG


def test_compare_needs_input(tmp_path):
    """compare without scenarios is a configuration error."""
    assert main(["compare", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_config_error_exit_code(tmp_path):
    """Invalid scenario files exit with code 2."""
    bad = tmp_path / "bad.conf"
    bad.write_text("controller = teleport\n", encoding="utf-8")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["simulate", "--scenario", "nope", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_non_finite_config_exit_code(tmp_path):
    """A NaN quaternion in a scenario file exits with code 2."""
    bad = tmp_path / "nan.conf"
    bad.write_text("scenario = pointing\ninitial.q = nan, 0, 0, 0\n", encoding="utf-8")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_invalid_argument_exit_code(tmp_path, monkeypatch):
    """Invalid numeric arguments raised during a run map to code 2."""
    def reject(scenario):
        raise InvalidArgumentError("quaternion must be finite")

    monkeypatch.setattr(cli, "run_scenario", reject)
    assert main([*SHORT, "simulate", "--scenario", "pointing", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_missing_file_exit_code(tmp_path):
    """A missing scenario file exits with code 1."""
    assert main(["simulate", "--config", str(tmp_path / "absent.conf")]) == EXIT_IO


def test_divergence_exit_code(tmp_path, monkeypatch):
    """A diverging run exits with code 3."""
    def explode(scenario):
        raise DivergenceError("Non-finite derivative in RK4 stage", t=0.1, step=10)

    monkeypatch.setattr(cli, "run_scenario", explode)
    assert main([*SHORT, "simulate", "--scenario", "pointing", "--out", str(tmp_path)]) == EXIT_DIVERGENCE


def test_verify_json(capsys):
    """verify --json prints a passing report."""
    assert main(["verify", "--json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    names = {check["name"] for check in report["checks"]}
    assert {"quaternion_composition", "logdet_hessian", "regressor_identity", "rk4_order"} <= names


def test_verify_failure_exit_code(monkeypatch, capsys):
    """A failed check exits with code 4."""
    failed = VerifyReport(
        passed=False,
        checks=[VerifyCheck(name="logdet_hessian", passed=False, max_residual=1.0, threshold=1e-6, samples=1)],
    )
    monkeypatch.setattr(cli, "verify", lambda seed=0: failed)
    assert main(["verify"]) == EXIT_VERIFY
    assert "[FAIL] logdet_hessian" in capsys.readouterr().out


def test_scenarios_listing(capsys):
    """scenarios lists every built-in preset."""
    assert main(["scenarios"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("pointing", "pointing-flip", "uncertain-inertia", "equator-crossing", "tracking-slew"):
        assert name in out


def test_argparse_requires_source():
    """simulate needs --config or --scenario."""
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == 2
