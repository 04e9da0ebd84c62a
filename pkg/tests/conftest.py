import numpy as np
import pytest

import flexcert.lp
import flexcert.numerics
from flexcert import _kernels_py
from flexcert.network import bundled_case, bundled_path, load_commitment

try:
    from flexcert import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _kernels_py, "cython": _compiled}


@pytest.fixture(params=["cython", "python"])
def backend(request, monkeypatch):
    """Run the test once per kernel implementation."""
    mod = BACKENDS[request.param]
    if mod is None:
        pytest.skip("compiled kernels not built")
    monkeypatch.setattr(flexcert.lp, "kernels", mod)
    monkeypatch.setattr(flexcert.numerics, "kernels", mod)
    return request.param


@pytest.fixture(scope="session")
def three_bus():
    case = bundled_case("three_bus")
    zeta = load_commitment(bundled_path("three_bus_zeta3.json"))
    return case, zeta


@pytest.fixture(scope="session")
def rts():
    case = bundled_case("rts_reduced")
    zeta = load_commitment(bundled_path("rts_reduced_zeta.json"))
    return case, zeta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from .helpers import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
