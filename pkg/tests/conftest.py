import math

import numpy as np
import pytest

from wmh2.spectral.grid import GridSpec, SpacetimeField


@pytest.fixture
def g16():
    return GridSpec(16)


@pytest.fixture
def st16():
    # time-periodic 16^3 x 16 box of side 2 pi
    return GridSpec(16, 2 * math.pi, 16, 2 * math.pi / 16, True)


def plane(grid, m=(1, 0, 0), w=0.0):
    x = grid.coords()
    ph = sum(mi * 2 * math.pi / grid.length * xi for mi, xi in zip(m, x))
    if grid.t_samples == 1 and not grid.time_periodic:
        return np.exp(1j * ph) + 0j * np.zeros(grid.shape)
    t = grid.times()[:, None, None, None]
    return SpacetimeField(np.exp(1j * (w * t + ph)) + 0j * np.zeros(grid.st_shape), grid)


ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one pass/fail line per criterion; printed in the terminal summary."""

    def record(num, name, passed, detail):
        ACCEPTANCE_LINES[num] = f"[{'PASS' if passed else 'FAIL'}] criterion {num:>2d}  {name}: {detail}"
        print(ACCEPTANCE_LINES[num])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
