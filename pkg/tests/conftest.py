import pytest

_LINES = []


@pytest.fixture
def criterion_log():
    """Collects one summary line per acceptance criterion."""
    return _LINES.append


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
