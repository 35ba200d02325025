import numpy as np
import pytest

from mcfi import GaussianBumps1D, Grid, SolverConfig, Strips2D


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small1d():
    """Coarse, short 1-D setup that runs in milliseconds."""
    return GaussianBumps1D(), Grid.line(41), SolverConfig.burgers1d(t_end=0.4)


@pytest.fixture
def small2d():
    """Coarse, short 2-D setup with a handful of strips."""
    return (Strips2D(n_strips=8), Grid.square(17),
            SolverConfig.burgers2d(t_end=0.15, nu=2e-3))


def random_state(grid, rng, scale=0.8):
    return scale * rng.uniform(-1, 1, grid.n_state)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
