import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slwave.grid import Grid  # noqa: E402
from slwave.slcore import Potential, load_potential  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid2001():
    return Grid(1.0, 2001)


@pytest.fixture(scope="session")
def grid501():
    return Grid(1.0, 501)


@pytest.fixture(scope="session")
def pot_cos(grid2001):
    return load_potential("trig:1,1,3", grid2001)


@pytest.fixture(scope="session")
def pot_zero(grid2001):
    return Potential.from_function(grid2001, lambda x: np.zeros_like(x), "zero")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
