"""Test the acceptance suites behind ``ricci-lab verify``."""

import pytest

from ricci_lab.verify import SUITES, SuiteReport, run_suite, suite_names

FAST_SUITES = ["sphere-closed-form", "space-form-relation", "constant-chain", "pointwise-inequality", "non-collapsing"]
SLOW_SUITES = [name for name in SUITES if name not in FAST_SUITES]


def _failures(report: SuiteReport) -> list:
    return [f"{c.name}: {c.detail}" for c in report.checks if not c.passed]


def test_suite_names():
    """Test every suite is listed, plus 'all'."""
    names = suite_names()

    assert names[-1] == "all"
    assert set(names[:-1]) == set(SUITES)
    assert len(SUITES) == 12


def test_unknown_suite():
    """Test an unknown name raises KeyError."""
    with pytest.raises(KeyError):
        run_suite("no-such-suite")


def test_report_passes_only_when_every_check_passes():
    """Test SuiteReport.passed aggregates its checks."""
    report = SuiteReport(name="demo")
    report.add("demo", "first", True)
    assert report.passed

    report.add("demo", "second", False, "detail")
    assert not report.passed
    assert report.checks[-1].detail == "detail"


@pytest.mark.parametrize("name", FAST_SUITES)
def test_fast_suites(name):
    """Test the closed-form and constant suites pass."""
    report = run_suite(name)

    assert report.checks
    assert report.passed, _failures(report)
    assert {c.suite for c in report.checks} == {name}


def test_pointwise_inequality_is_seeded():
    """Test the same seed reproduces the same checks."""
    first = run_suite("pointwise-inequality", seed=11)
    second = run_suite("pointwise-inequality", seed=11)

    assert first.checks == second.checks


@pytest.mark.slow
@pytest.mark.parametrize("name", SLOW_SUITES)
def test_slow_suites(name):
    """Test the flow, Moser and pinching suites pass."""
    report = run_suite(name)

    assert report.passed, _failures(report)
