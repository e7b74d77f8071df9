import numpy as np
import pytest

from dnlswave.potential import get_potential

EPS = np.finfo(float).eps

# (criterion, passed, detail) lines printed at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def cubic():
    return get_potential("cubic")


@pytest.fixture(scope="session")
def doublewell():
    return get_potential("doublewell")


def assert_non_increasing(trace, ulps=8):
    """Allow round-off sized increases of a few ulps of |E|."""
    t = np.asarray(trace)
    slack = ulps * EPS * np.maximum(1.0, np.abs(t[:-1]))
    bad = np.nonzero(np.diff(t) > slack)[0]
    assert bad.size == 0, f"energy increased at step {bad[0]}: {t[bad[0]]!r} -> {t[bad[0] + 1]!r}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")


@pytest.fixture(scope="session")
def cubic_n40(cubic):
    from dnlswave.lattice import Setting
    from dnlswave.minimizer import FlowConfig, minimize
    return minimize(Setting.ON_SITE, 40, cubic, 1.0, FlowConfig(0.1, 5000, 1e-13))
