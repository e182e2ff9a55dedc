import numpy as np
import pytest

from lowreg_nls.spectral import FREQUENCY, Field, Grid


def random_field(grid, rng, representation="physical"):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, vals, representation)


def band_limited_field(grid, rng, kmax):
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, np.where(grid.xi_norm <= kmax, c, 0), FREQUENCY)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[(1, 64), (2, 16), (3, 8)], ids=["1d", "2d", "3d"])
def small_grid(request):
    d, n = request.param
    return Grid(d, n, 2 * np.pi)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, passed, detail):
        lines.append((number, f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"))
        print(lines[-1][1])

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
