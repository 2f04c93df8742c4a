import itertools

import numpy as np
import pytest

from dynot.grid import BC, GridSpec

BCS = [BC.NEUMANN, BC.PERIODIC]


def all_grids(sizes, time_steps):
    """Every boundary-condition combination for the given spatial sizes."""
    for bcs in itertools.product(BCS, repeat=len(sizes)):
        yield GridSpec.create(sizes, time_steps, list(bcs))


def random_momentum(grid, rng):
    return [rng.standard_normal(s) for s in grid.momentum_shapes()]


def gaussian_1d(n, center, std):
    x = np.arange(n)
    g = np.exp(-0.5 * ((x - center) / std) ** 2)
    return g / g.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
