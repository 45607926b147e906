"""Verification records and deterministic report output."""

import numpy as np
import pytest
import simplejson

from tractor_holo import __version__
from tractor_holo.core.errors import AmbiguousRankError
from tractor_holo.core.report import (
    EnvironmentSection,
    VerificationReport,
    check_record,
    failure_record,
    report_record,
)
from tractor_holo.utils.file_operations import report_to_json, report_to_text, save_report


def make_report(*records):
    return VerificationReport(
        command="tensors",
        manifolds=["independence"],
        records=list(records),
        environment=EnvironmentSection(seed=7, config_hash="0" * 64),
    )


class TestRecords:
    def test_check_within_tolerance(self):
        record = check_record("scal", "scal = −2", -2.0 + 1e-12, -2.0, 1e-8)
        assert record.passed
        assert record.kind == "check"
        assert record.detail["deviation"] == pytest.approx(1e-12, abs=1e-15)

    def test_zero_tolerance_fails_any_deviation(self):
        assert not check_record("scal", "scal = −2", -2.0 + 1e-12, -2.0, 0.0).passed
        assert check_record("scal", "scal = −2", -2.0, -2.0, 0.0).passed

    def test_residual_and_arrays(self):
        assert check_record("residual", "R + R = 0", np.array([1e-13, -2e-13]), None, 1e-12).passed
        assert not check_record("residual", "R + R = 0", float("nan"), None, 1.0).passed

    def test_explicit_condition(self):
        record = check_record("blocks", "two pairs", [[0, 2], [1, 3]], passed=True)
        assert record.passed and record.tolerance is None

    def test_numpy_values_become_plain(self):
        record = check_record("metric", "g", np.eye(2), np.eye(2), 1e-12, worst=np.float64(0.0))
        assert record.computed == [[1.0, 0.0], [0.0, 1.0]]
        assert isinstance(record.detail["worst"], float)

    def test_report_passes_when_finite(self):
        assert report_record("weyl_printed", "C_1234", [1.0, -3.0], [2.0, 0.5]).passed
        assert not report_record("weyl_printed", "C_1234", [1.0, float("inf")]).passed

    def test_failure_keeps_singular_values(self):
        error = AmbiguousRankError("no gap", singular_values=[1.0, 0.5, 0.4])
        record = failure_record("holonomy", "Hol", error)
        assert not record.passed
        assert record.detail["error"].startswith("AmbiguousRankError")
        assert record.detail["singular_values"] == [1.0, 0.5, 0.4]


class TestReportOutput:
    def test_status_follows_records(self):
        good = check_record("a", "a", 1.0, 1.0, 0.0)
        bad = check_record("b", "b", 1.0, 2.0, 0.1)
        assert make_report(good).passed
        report = make_report(good, bad)
        assert not report.passed
        assert [r.name for r in report.failures] == ["b"]

    def test_json_is_stable(self):
        report = make_report(report_record("values", "x", [0.1, float("nan")]))
        text = report_to_json(report)
        assert "0.10000000000000001" in text
        payload = simplejson.loads(text)
        assert payload["records"][0]["computed"][1] is None
        assert payload["status"] == "fail"
        assert payload["environment"]["version"] == __version__
        assert list(payload)[-1] == "status"
        assert report_to_json(report) == text

    def test_text_markers(self):
        text = report_to_text(make_report(check_record("a", "a", 1.0, 1.0, 0.0),
                                          check_record("b", "b", 1.0, 2.0, 0.1)))
        assert "✓ [check] a" in text
        assert "✗ [check] b" in text
        assert "ÉCHEC (1 enregistrements)" in text

    def test_save_to_file(self, tmp_path):
        out = tmp_path / "nested" / "report.json"
        text = save_report(make_report(check_record("a", "a", 1.0, 1.0, 0.0)), "json", str(out))
        assert out.read_text(encoding="utf-8") == text
        assert simplejson.loads(text)["status"] == "pass"

    def test_save_to_stdout(self, capsys):
        save_report(make_report(check_record("a", "a", 1.0, 1.0, 0.0)), "text")
        assert "SUCCÈS" in capsys.readouterr().out
