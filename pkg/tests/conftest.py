import functools

import pytest

from gpwz import gp_bvp, modulation as mod
from gpwz.asymptotics import AsymptoticSolution


@functools.lru_cache(maxsize=None)
def bvp_solution(t, h=0.05, x_min=None, x_max=None, order=4):
    """BVP solutions shared across test modules (each is solved once)."""
    config = gp_bvp.SolverConfig(h=h, x_min=x_min, x_max=x_max, order=order)
    return gp_bvp.solve_fixed_t(t, config)


@pytest.fixture(scope="session")
def table():
    return mod.sweep_zone(512)


@pytest.fixture(scope="session")
def asym(table):
    return AsymptoticSolution(table)


@pytest.fixture(scope="session")
def solve():
    return bvp_solution


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
