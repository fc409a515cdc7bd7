import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile("repo", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@st.composite
def band_limited(draw, sizes=(16, 32, 64, 128), max_mode=None, scale=1.0):
    """Random real trigonometric polynomial sampled on a grid, with modes below n/3."""
    n = draw(st.sampled_from(sizes))
    top = max_mode or n // 3
    kmax = draw(st.integers(1, top))
    coef = st.floats(-scale, scale, allow_nan=False, allow_infinity=False)
    a = np.array(draw(st.lists(coef, min_size=kmax + 1, max_size=kmax + 1)))
    b = np.array(draw(st.lists(coef, min_size=kmax, max_size=kmax)))
    x = np.arange(n) / n
    u = np.full(n, a[0])
    for k in range(1, kmax + 1):
        u += a[k] * np.cos(2 * np.pi * k * x) + b[k - 1] * np.sin(2 * np.pi * k * x)
    return u


def smooth_field(n, seed=0, modes=5, mean=0.0, decay=2.0):
    rng = np.random.default_rng(seed)
    x = np.arange(n) / n
    u = np.full(n, float(mean))
    for k in range(1, modes + 1):
        a, b = rng.normal(size=2) / k ** decay
        u += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    return u


@pytest.fixture
def nodes():
    return lambda n: np.arange(n) / n


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
