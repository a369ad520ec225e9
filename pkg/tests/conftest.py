import numpy as np
import pytest

from equimesh.grid import ComputationalGrid
from equimesh.monitor import MonitorParams
from equimesh.schwarz import solve_single_domain


@pytest.fixture(scope="session")
def reference12():
    mesh, _ = solve_single_domain(ComputationalGrid(12, 12), MonitorParams(0.7, 0.05))
    return mesh


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
