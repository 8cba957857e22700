import pytest

_acceptance_lines = []


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"AC{number} {'PASS' if ok else 'FAIL'}: {detail}"
        _acceptance_lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
