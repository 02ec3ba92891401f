import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tentspace.grid import GridSpec

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

# filled by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def small_spec():
    return GridSpec(n=1, Ny=64, t_levels=24, t_min=2.0 ** -7, t_max=2.0 ** -3)


@pytest.fixture(scope="session")
def default_spec():
    return GridSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
