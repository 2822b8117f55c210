"""Shared fixtures and the acceptance-suite reporting hook."""
import pytest

from cavity_raman import ModelParams


@pytest.fixture
def paper_params():
    """Default operating point used throughout the suite."""
    return ModelParams()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            verdict = "PASS" if outcome == "passed" else "FAIL"
            # A setup error has no call phase; it must still surface.
            if getattr(report, "when", "call") == "call" or verdict == "FAIL":
                rows[name] = verdict
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(rows):
            terminalreporter.write_line(f"{rows[name]} {name}")
