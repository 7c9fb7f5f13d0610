import os

from hypothesis import settings

settings.register_profile("qp", deadline=None, max_examples=40, derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "qp"))

import pytest

_CRITERIA = []


@pytest.fixture
def criterion(capsys):
    """Record one acceptance line; the lines are echoed live and again in the summary."""

    def record(label, ok, detail):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})"
        _CRITERIA.append(line)
        with capsys.disabled():
            print(f"\n    {line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
