"""Shared fixtures and the acceptance summary printed after the run."""
import re

import pytest

ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record one acceptance criterion; ``verdict(k, passed, detail)``."""
    def record(key, passed, detail):
        ACCEPTANCE[str(key)] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    order = lambda k: (int(re.match(r"\d+", k).group()), k)
    for key in sorted(ACCEPTANCE, key=order):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
