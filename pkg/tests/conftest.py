import math

import numpy as np
import pytest

from invariant_swe.core import Grid1D, Grid2D, State1D, State2D


def fig2_data(N=51):
    g = Grid1D.uniform(N, 2 * math.pi)
    return g, State1D(0.4 * np.sin(g.x), 10 + 0.4 * np.sin(g.x + math.pi / 6))


def fig4_data(N=21):
    g = Grid2D.uniform(N, N)
    x, y = g.x, g.y
    phi = math.pi / 6
    return g, State2D(0.4 * np.sin(x + phi) * np.sin(y), 0.4 * np.sin(x) * np.sin(y),
                      10 + 0.4 * np.cos(x + phi) * np.cos(y))


def perturbed_grid_2d(g, amp, seed=0):
    rng = np.random.default_rng(seed)
    return g.with_positions(g.x + amp * rng.uniform(-1, 1, g.shape),
                            g.y + amp * rng.uniform(-1, 1, g.shape))


@pytest.fixture
def fig2():
    return fig2_data()


@pytest.fixture
def fig4():
    return fig4_data()


VERDICTS = []


@pytest.fixture
def verdict():
    """Record one summary line for an acceptance criterion; returns the passed flag."""
    def record(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{name} {'ok' if passed else 'FAILED'}" for name, passed in checks)
        VERDICTS.append(f"criterion {number} {'PASS' if ok else 'FAIL'} {title}: {detail}")
        print(VERDICTS[-1])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
