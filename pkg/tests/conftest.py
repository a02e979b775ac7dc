import pytest

from fieldforge.config import load_config
from fieldforge.model import ResonantNetwork
from fieldforge.resonance import calibrate_series_resistance


@pytest.fixture(scope="session")
def table1():
    return load_config("table1.cfg")


@pytest.fixture(scope="session")
def ch1_net():
    return ResonantNetwork(1, (4.4e-6, 4.0e-6), 0.7e-6, calibrate_series_resistance(48, 0.1, 1000), (2040e-9, 2205e-9))


@pytest.fixture(scope="session")
def ch2_net():
    return ResonantNetwork(2, (1.4e-6, 1.5e-6), 0.4e-6, calibrate_series_resistance(48, 0.4, 260), (46.0e-9, 43.9e-9))
