import pytest

_LINES = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; the summary hook prints them all."""
    def record(number, title, passed, detail):
        _LINES.append(f"criterion {number} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
