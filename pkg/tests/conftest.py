import numpy as np
import pytest

from ratiotail import spectral

ACCEPTANCE_LINES = []


def zoo():
    """Named models used throughout the suite."""
    return {
        "independent": spectral.make_independent(),
        "rho0.3": spectral.make_rho(0.3),
        "logistic1.5": spectral.make_logistic(1.5),
        "logistic2": spectral.make_logistic(2.0),
        "logistic3": spectral.make_logistic(3.0),
        "mixed0.5": spectral.make_mixed(0.5),
        "mixed1": spectral.make_mixed(1.0),
        "exp_ratio": spectral.make_exp_ratio(),
        "discrete_bounded": spectral.make_discrete([0.2, 0.8], [0.7, 0.3]),
        "discrete_open": spectral.make_discrete([0.3, 0.7], [1.0, 0.0]),
    }


ZOO = zoo()


@pytest.fixture(params=sorted(ZOO), ids=sorted(ZOO))
def zoo_model(request):
    return ZOO[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
