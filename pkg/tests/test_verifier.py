import json
import logging
import os

import pytest

from solvegeo.config.settings import Config
from solvegeo.core.flow import IntegratorConfig
from solvegeo.core.verifier import (
    SuiteConfig,
    VerificationSuite,
    check_boundary_symmetry_alpha_one,
    check_closed_form_periods,
    check_conservation,
    check_period_table,
    check_special_functions,
    check_sphere,
)
from solvegeo.scripts.performance_monitor import PerformanceMonitor
from solvegeo.utils.reporting import csv_text, json_text, to_frame


class TestSuiteConfig:
    def test_defaults_match_the_packaged_file(self):
        packaged = SuiteConfig()
        with open(Config.VERIFY_CONFIG_FILE) as f:
            settings = json.load(f)
        for key, value in settings.items():
            assert getattr(packaged, key) == value

    def test_unknown_keys_are_ignored(self, tmp_path, caplog):
        path = tmp_path / "suite.json"
        path.write_text(json.dumps({"seed": 7, "colour": "blue"}))
        with caplog.at_level(logging.WARNING):
            config = SuiteConfig(str(path))
        assert config.seed == 7
        assert not hasattr(config, "colour")
        assert "colour" in caplog.text

    def test_missing_file_uses_defaults(self, tmp_path):
        config = SuiteConfig(str(tmp_path / "absent.json"))
        assert config.monotonicity_points == 500
        assert config.is_enabled("sphere")

    def test_save_round_trip(self, tmp_path):
        path = tmp_path / "suite.json"
        config = SuiteConfig(str(path))
        config.enabled_checks = ["period_table"]
        config.random_cases = 3
        config.save_config()
        loaded = SuiteConfig(str(path))
        assert loaded.random_cases == 3
        assert loaded.is_enabled("period_table")
        assert not loaded.is_enabled("sphere")


def test_period_table_check():
    reports = check_period_table(0.3)
    assert len(reports) == 1 and reports[0].passed
    assert check_period_table(0.55) == []


def test_closed_form_period_checks():
    reports = check_closed_form_periods(None, 5)
    assert [r.name for r in reports] == ["closed_form_period_alpha_one", "closed_form_period_alpha_half"]
    assert all(r.passed for r in reports)
    assert check_closed_form_periods(0.7, 5) == []


def test_conservation_checks():
    reports = check_conservation(0.5, 2, 1, IntegratorConfig())
    assert [r.name for r in reports] == ["level_set_conservation", "cylinder_conservation",
                                         "linear_endpoint_identity"]
    assert all(r.passed for r in reports)


def test_special_function_checks():
    reports = check_special_functions(seed=3, cases=8)
    assert all(r.passed for r in reports)
    assert reports[0].grid["cases"] == 8


def test_boundary_symmetry_check():
    assert check_boundary_symmetry_alpha_one([0.75, 0.9], IntegratorConfig()).passed


def test_sphere_check():
    reports = check_sphere([0.5, 0.0], (4, 8), 1.0, IntegratorConfig())
    assert len(reports) == 2
    assert all(r.passed for r in reports)
    assert reports[0].details["lobe_extent"] > 0.0


def test_suite_runs_only_enabled_checks(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({"enabled_checks": ["period_table", "closed_form_periods"], "beta_points": 4}))
    suite = VerificationSuite(SuiteConfig(str(path)), alpha=0.5)
    reports = suite.run()
    assert {r.name for r in reports} == {"period_table", "closed_form_period_alpha_half"}
    assert suite.passed
    record = suite.to_dict()
    assert record["alpha"] == 0.5
    assert record["pass"] is True
    assert len(suite.monitor.metrics) == 2


def test_default_suite_at_one_half_passes(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({
        "closed_form_points": 200,
        "monotonicity_points": 12,
        "beta_points": 10,
        "bbox_x0_points": 5,
        "bbox_t_points": 100,
        "loops_per_alpha": 3,
        "random_cases": 2,
        "sphere_enabled": False,
    }))
    suite = VerificationSuite(SuiteConfig(str(path)), alpha=0.5)
    reports = suite.run()
    failed = [r.name for r in reports if not (r.passed or r.exploratory)]
    assert failed == []
    assert suite.passed
    names = {r.name for r in reports}
    assert {"variational_vs_differences", "dn_closed_form", "derivative_signs", "monotonicity"} <= names
    assert "geodesic_sphere" not in names
    elliptic = next(r for r in reports if r.name == "elliptic_K")
    assert elliptic.grid["cases"] == 100


def test_suite_turns_errors_into_failed_reports(tmp_path, monkeypatch):
    from solvegeo.core import verifier
    from solvegeo.core.errors import IntegratorError

    def broken(alpha):
        raise IntegratorError("stiff", t_reached=0.0)

    monkeypatch.setattr(verifier, "check_period_table", broken)
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({"enabled_checks": ["period_table"]}))
    suite = VerificationSuite(SuiteConfig(str(path)), alpha=1.0)
    reports = suite.run()
    assert len(reports) == 1
    assert not reports[0].passed
    assert reports[0].details["error"].startswith("stiff")
    assert not suite.passed
    assert suite.monitor.metrics[0].success is False


def test_performance_report_goes_to_the_output_dir(output_dir):
    monitor = PerformanceMonitor()
    assert monitor.get_summary() == {"message": "No metrics recorded"}
    with monitor.track_operation("demo", {"alpha": 0.5}):
        pass
    with pytest.raises(ValueError):
        with monitor.track_operation("broken"):
            raise ValueError("boom")
    summary = monitor.get_summary()
    assert summary["summary"]["total_operations"] == 2
    assert summary["summary"]["failed_operations"] == 1
    assert summary["bottlenecks"] == []
    path = monitor.save_report("report.json")
    assert os.path.dirname(path) == str(output_dir)
    with open(path) as f:
        assert len(json.load(f)["detailed_metrics"]) == 2


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("SOLVEGEO_THREADS", "3")
    assert Config.get_thread_count() == 3
    monkeypatch.setenv("SOLVEGEO_THREADS", "zero")
    assert Config.get_thread_count() == (os.cpu_count() or 1)
    monkeypatch.setenv("SOLVEGEO_THREADS", "-2")
    assert Config.get_thread_count() == 1


def test_reporting_is_byte_stable():
    rows = [{"alpha": 0.5, "value": 1.0 / 3.0}, {"alpha": 1.0, "value": float("nan")}]
    text = csv_text(to_frame(rows))
    assert text == "alpha,value\n0.5,0.333333333333\n1,\n"
    document = json.loads(json_text({"rows": rows, "flag": True}, "demo"))
    assert document["rows"][0]["value"] == 0.333333333333
    assert document["rows"][1]["value"] is None
    assert document["kind"] == "demo"
