import pytest

from wideband_spdc.dispersion import load_model
from wideband_spdc.phasematch import CrystalConfig, PumpConfig

# lines printed in the terminal summary by the acceptance suite
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def model():
    return load_model()


@pytest.fixture(scope="session")
def pump():
    return PumpConfig(942.5, 110.0)


@pytest.fixture(scope="session")
def crystal(model):
    return CrystalConfig(0.01, 27.4, 20.0, model)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
