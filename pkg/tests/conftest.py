import sys

import numpy as np
import pytest

from qlspsim import _backend
from qlspsim.problem import LseInstance, augment

BACKENDS = ["python"] + (["cython"] if _backend.compiled_kernels is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per available kernel set."""
    prev = _backend.BACKEND
    _backend.use(request.param)
    yield request.param
    _backend.use(prev)


@pytest.fixture
def hand_instance():
    # A = I_2, b = e_1: C = [[1, 0, 1], [0, 1, 0]] at beta = 1
    return LseInstance(np.eye(2, dtype=complex), np.array([1, 0], dtype=complex), 1.0, 2, 0)


@pytest.fixture
def hand_system(hand_instance):
    return augment(hand_instance, 1.0)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])
