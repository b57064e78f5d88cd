import json

import pytest
from pydantic import ValidationError

from dirac_bubbles.errors import ConfigError
from dirac_bubbles.report import CheckRecord, Report, load_report, show_report, write_report


def _record(check_id, passed=True, **kwargs):
    data = dict(check_id=check_id, module="fields", identity="identity", measured=1e-15,
                reference=0.0, tolerance=1e-12, passed=passed, dimension=2, runtime=0.25)
    data.update(kwargs)
    return CheckRecord(**data)


def test_records_are_sorted():
    report = Report(seed=3, records=[_record("b"), _record("a"), _record("c")])
    assert [r.check_id for r in report.records] == ["a", "b", "c"]


def test_summary_and_failures():
    report = Report(seed=0, records=[_record("a"), _record("b", passed=False)])
    assert not report.passed
    assert [r.check_id for r in report.failures] == ["b"]
    assert report.summary() == {"total": 2, "failed": 1, "passed": False}


def test_json_round_trip_without_timings():
    report = Report(seed=7, records=[_record("a"), _record("b", error="DomainError: x")])
    text = report.to_json()
    data = json.loads(text)
    assert text.endswith("\n")
    assert "runtime" not in data["records"][0]
    assert data["summary"]["total"] == 2
    restored = Report.from_json(text)
    assert restored.seed == 7
    assert restored.records[1].error == "DomainError: x"
    assert restored.records[0].runtime is None


def test_timings_are_opt_in():
    report = Report(seed=0, records=[_record("a")])
    assert json.loads(report.to_json(timings=True))["records"][0]["runtime"] == 0.25


def test_unknown_fields_and_schema_are_rejected():
    with pytest.raises(ValidationError):
        _record("a", colour="red")
    with pytest.raises(ValidationError):
        Report(schema_version=2, seed=0)
    with pytest.raises(ValidationError):
        Report.from_json(json.dumps({"seed": 0, "records": [], "extra": 1}))


@pytest.mark.parametrize("value", [float("nan"), float("inf"), float("-inf")])
def test_non_finite_values_become_null(value):
    record = _record("a", measured=value, reference=value, passed=False)
    assert record.measured is None
    assert record.reference is None
    text = Report(seed=0, records=[record]).to_json()
    assert "Infinity" not in text and "NaN" not in text
    assert json.loads(text)["records"][0]["measured"] is None


@pytest.mark.parametrize("text", ["{not json", "[]", json.dumps({"seed": "zero", "records": []}),
                                  json.dumps({"schema_version": 9, "seed": 0})])
def test_malformed_report_file(tmp_path, text):
    path = tmp_path / "report.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match="not a valid report"):
        load_report(path)


def test_write_and_show(tmp_path, capsys):
    path = write_report(Report(seed=1, records=[_record("a"), _record("b", passed=False, error="boom")]),
                        tmp_path / "out" / "report.json")
    assert load_report(path).summary()["failed"] == 1
    assert show_report(path) is False
    out = capsys.readouterr().out
    assert "✅ a" in out
    assert "❌ b" in out
    assert "error: boom" in out
    assert "1/2 checks passed" in out
