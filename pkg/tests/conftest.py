import numpy as np
import pytest
from hypothesis import settings

from fockent import _kernels

settings.register_profile("fockent", deadline=None, max_examples=200)
settings.load_profile("fockent")


@pytest.fixture(scope="session", autouse=True)
def _jit_warm():
    _kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
