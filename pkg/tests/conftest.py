import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from elltriv import _jit
from elltriv.theta import ThetaEvaluator
from elltriv.torus import EllipticCurve

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TAUS = [1j, 2j, 0.3 + 0.8j]


@pytest.fixture(params=TAUS, ids=["i", "2i", "0.3+0.8i"])
def curve(request):
    return EllipticCurve(request.param)


@pytest.fixture
def square():
    return EllipticCurve(1j)


@pytest.fixture
def ev_square(square):
    return ThetaEvaluator(square)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def kernel_path(request, monkeypatch):
    """Run a test once through each theta-moment kernel."""
    if request.param == "numba":
        if _jit.theta_moments_numba is None:
            pytest.skip("numba kernel disabled")
        monkeypatch.setattr(_jit, "HAVE_NUMBA", True)
    else:
        monkeypatch.setattr(_jit, "HAVE_NUMBA", False)
    return request.param


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    RESULTS = getattr(module, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
