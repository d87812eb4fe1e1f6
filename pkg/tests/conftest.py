import numpy as np
import pytest

from zqh import build

ACCEPTANCE_LINES = []


def random_zzm(rng, dim, orientation="zzm", min_gap=1e-3, min_abs=0.0):
    """Random ZZM with entries in [-10, 10] and adjacent gaps >= min_gap."""
    while True:
        a = rng.uniform(-10, 10, size=dim)
        if min_abs:
            a = np.sign(a) * np.maximum(np.abs(a), min_abs)
        if dim < 2 or np.min(np.abs(np.diff(a))) >= min_gap:
            break
    c = rng.uniform(-10, 10, size=dim - 1)
    return build(a, c, orientation)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
