import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[1:3])):
            terminalreporter.write_line(line)
