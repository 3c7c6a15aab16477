import numpy as np
import pytest

from spatialsign.hilbert import Curve, make_equidistant_grid

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid2():
    return make_equidistant_grid(2)


@pytest.fixture
def grid4():
    return make_equidistant_grid(4)


def curve(grid, values):
    return Curve(grid, np.asarray(values, dtype=float))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
