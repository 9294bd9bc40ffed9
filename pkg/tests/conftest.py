import numpy as np
import pytest

from tcplda import _backend


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)


def spd(d, seed, ridge=1.0):
    """``M^T M + ridge*I`` from a seeded standard normal ``M``."""
    M = np.random.default_rng(seed).standard_normal((d, d))
    return M.T @ M + ridge * np.eye(d)


def rel_fro(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
