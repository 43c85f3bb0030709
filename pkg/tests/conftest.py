"""Collects the acceptance verdict lines and prints them after the run."""
import pytest

_LINES = {}


@pytest.fixture
def report():
    def record(number, title, passed, detail):
        _LINES[number] = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_LINES):
            terminalreporter.write_line(_LINES[k])
