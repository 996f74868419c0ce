import pytest

from wsnkey.topology import deploy


@pytest.fixture(scope="session")
def net2000():
    return deploy(2000, 8, 11)


@pytest.fixture(scope="session")
def small_net():
    return deploy(150, 8, 3)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
