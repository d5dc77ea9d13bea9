import hypothesis
import numpy as np
import pytest

from macksolve.baseflow import solve_blasius, tanh_profile
from macksolve.thermo import temperature_profile

hypothesis.settings.register_profile(
    "suite", max_examples=25, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("suite")

np.seterr(all="ignore")


@pytest.fixture(scope="session")
def blasius():
    return solve_blasius(20.0, 2000)


@pytest.fixture(scope="session")
def tanh_flow():
    return tanh_profile(15.0, 1500)


@pytest.fixture(scope="session")
def thermo_m3(blasius):
    return temperature_profile(blasius, mach=3.0, gamma=1.4)


@pytest.fixture(scope="session")
def thermo_tanh(tanh_flow):
    return temperature_profile(tanh_flow, mach=3.0, gamma=1.4)
