import numpy as np
import pytest

from helpers import std_grid


@pytest.fixture(scope="session")
def grid256():
    return std_grid(256)


@pytest.fixture(scope="session")
def grid128():
    return std_grid(128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
