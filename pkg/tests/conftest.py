import pytest

from soliton_imaging.bdg import PhononModeSet, solve_wavenumbers, zero_mode_state
from soliton_imaging.meanfield import PixelGrid

N_XI = 100.0
ELL = 10.0

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def modes140():
    return solve_wavenumbers(ELL, 70, n=N_XI)


@pytest.fixture(scope="session")
def modes_factory(modes140):
    def make(n):
        return PhononModeSet(ELL, modes140.wavenumbers, n)

    return make


@pytest.fixture(scope="session")
def squeezed1():
    return zero_mode_state("zeta", 1.0, N_XI, ELL)


@pytest.fixture(scope="session")
def grid07():
    return PixelGrid.from_window(ELL, 0.7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
