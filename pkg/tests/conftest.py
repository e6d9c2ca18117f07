import os
import sys

import pytest

# add project root to python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from stratcouette.backend.core_types import derive_params, make_grid, make_initial_data, make_quadrature_spec
from stratcouette.backend.kernel import KernelContext

# beta -> gamma: 0.4 -> 0.3 (real), 0.5 -> 0 (log case), 1 -> i sqrt(3)/2
BETAS = {"real": 0.4, "critical": 0.5, "imaginary": 1.0}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance runs (decay fits, full resolution)")


@pytest.fixture(params=list(BETAS), ids=list(BETAS))
def params(request):
    return derive_params(BETAS[request.param], 1)


@pytest.fixture
def real_params():
    return derive_params(0.4, 1)


@pytest.fixture
def gaussian():
    return make_initial_data("gaussian", omega_amplitude=1.0, rho_amplitude=0.5, center=0.0, width=1.0)


@pytest.fixture
def make_ctx(gaussian):
    def _make(beta: float = 0.4, m: int = 1, data=None) -> KernelContext:
        return KernelContext(params=derive_params(beta, m), data=data or gaussian)
    return _make


@pytest.fixture
def small_grid():
    return make_grid(-10.0, 10.0, 401)


@pytest.fixture
def make_quad():
    def _make(params, **overrides):
        return make_quadrature_spec(params, **overrides)
    return _make
