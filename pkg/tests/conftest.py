import numpy as np
import pytest

from enhanced_binding import field as fld
from enhanced_binding.potential import indicator_well
from enhanced_binding.selfenergy import PhotonGrid
from enhanced_binding.threshold import assemble_trial

LAMBDA0 = np.pi**2 / 4
C_W_UNIT = np.pi**4 / 32

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def unit_well():
    return indicator_well()


@pytest.fixture(scope="session")
def sharp():
    return fld.CutoffProfile()


@pytest.fixture(scope="session")
def bump():
    return fld.CutoffProfile("bump")


@pytest.fixture(scope="session")
def grid(sharp):
    return PhotonGrid(sharp)


@pytest.fixture(scope="session")
def trial_1e2(unit_well):
    return assemble_trial(unit_well, 1e-2, lambda0=LAMBDA0, c_w=C_W_UNIT)


@pytest.fixture(scope="session")
def trial_0(unit_well):
    return assemble_trial(unit_well, 0.0, lambda0=LAMBDA0, c_w=C_W_UNIT)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
