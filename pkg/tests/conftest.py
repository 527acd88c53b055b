import numpy as np
import pytest

from qbattery.states import make_coherent, make_fock, make_gibbs

K_SWEEP = (0.5, 1, 3, 20, 100)


def all_states(K):
    states = [make_coherent(K), make_gibbs(K)]
    if float(K).is_integer():
        states.insert(0, make_fock(int(K)))
    return states


@pytest.fixture
def xgrid():
    """200 points of g*tau over two Rabi periods."""
    return np.linspace(0.0, 2 * np.pi, 200)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # lets fixtures see whether the test body passed during teardown
    outcome = yield
    if call.when == "call":
        item.rep_call_passed = outcome.get_result().passed
