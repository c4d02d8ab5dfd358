import pytest

from echonav.envfile import resolve_scene

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def office():
    return resolve_scene("office")


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
