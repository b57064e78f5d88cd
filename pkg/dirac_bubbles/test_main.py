import json

import pandas as pd
import pytest

from dirac_bubbles import progress
from dirac_bubbles.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from dirac_bubbles.report import CheckRecord, Report, load_report, write_report
from dirac_bubbles.suite import SEED_ENV


@pytest.fixture(autouse=True)
def isolated(monkeypatch, tmp_path):
    monkeypatch.delenv(SEED_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    progress.configure(None)


def test_profile_command(tmp_path):
    out = tmp_path / "profile.csv"
    assert main(["profile", "--n", "3", "--lambda", "2", "--samples", "101", "--out", str(out)]) == EXIT_OK
    table = pd.read_csv(out)
    assert len(table) == 101
    assert table.r.iloc[-1] == pytest.approx(2000.0)


def test_action_command(capsys):
    assert main(["action", "--n", "2"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["records"][0]["check_id"] == "functionals.lower_bound.n2"
    assert data["summary"]["passed"] is True


def test_action_command_flags_wrong_amplitude(tmp_path):
    out = tmp_path / "action.json"
    assert main(["action", "--n", "3", "--amplitude-scale", "1.1", "--out", str(out)]) == EXIT_FAILED
    assert not load_report(out).passed


def test_residual_command(tmp_path):
    out = tmp_path / "residual.json"
    assert main(["residual", "--n", "2", "--points", "161", "--center", "0.5", "0.5", "--out", str(out)]) == EXIT_OK
    records = {r.check_id: r for r in load_report(out).records}
    assert records["calculus.residual.scaling.n2"].measured <= 5e-3
    assert records["calculus.residual.corollary.n2"].passed


def test_kernel_command(tmp_path):
    out = tmp_path / "kernel.json"
    assert main(["kernel", "--n", "3", "--out", str(out)]) == EXIT_OK
    assert len(load_report(out).records) == 2


def test_verify_command(tmp_path):
    config = tmp_path / "suite.ini"
    config.write_text(
        "[suite]\ndimensions = 2\nclifford_dimensions = 2\nchecks = clifford, geometry\n\n"
        f"[output]\nprogress_log = {tmp_path / 'progress.log'}\n",
        encoding="utf-8",
    )
    out = tmp_path / "report.json"
    assert main(["verify", "--config", str(config), "--out", str(out)]) == EXIT_OK
    report = load_report(out)
    assert report.passed
    assert all(r.runtime is None for r in report.records)
    assert (tmp_path / "progress.log").read_text(encoding="utf-8").count("[CHECK ") >= 2 * len(report.records)


def test_verify_with_timings(tmp_path):
    config = tmp_path / "suite.ini"
    config.write_text("[suite]\ndimensions = 2\nclifford_dimensions = 2\nchecks = clifford\n", encoding="utf-8")
    out = tmp_path / "report.json"
    assert main(["verify", "--config", str(config), "--out", str(out), "--timings"]) == EXIT_OK
    assert all(r.runtime is not None for r in load_report(out).records)


def test_bad_config_is_a_usage_error(tmp_path):
    config = tmp_path / "bad.ini"
    config.write_text("[suite]\ndimensions = 7\n", encoding="utf-8")
    assert main(["verify", "--config", str(config)]) == EXIT_USAGE
    assert main(["verify", "--config", str(tmp_path / "absent.ini")]) == EXIT_USAGE


def test_invalid_arguments_are_usage_errors():
    assert main(["transmogrify"]) == EXIT_USAGE
    assert main(["action"]) == EXIT_USAGE
    assert main(["residual", "--n", "2", "--order", "3"]) == EXIT_USAGE
    assert main(["action", "--n", "1"]) == EXIT_USAGE


def test_show_command(tmp_path, capsys):
    path = write_report(Report(seed=0, records=[
        CheckRecord(check_id="a", module="m", identity="i", measured=0.0, reference=0.0, tolerance=1.0, passed=True),
    ]), tmp_path / "r.json")
    assert main(["show", "--report", str(path)]) == EXIT_OK
    assert "1/1 checks passed" in capsys.readouterr().out
    assert main(["show", "--report", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_show_rejects_malformed_report(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["show", "--report", str(path)]) == EXIT_USAGE
    assert "not a valid report" in capsys.readouterr().err
