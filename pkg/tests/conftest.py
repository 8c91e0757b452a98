import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("rdmgeo", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rdmgeo")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, size=3):
    v = rng.standard_normal(size)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdict lines at the end of the run."""
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
