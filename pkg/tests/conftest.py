import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; all lines are printed after the run."""
    def record(number, ok, detail):
        _LINES.append((number, f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
