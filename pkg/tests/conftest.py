import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qspectra.quaternion import ImaginaryUnit, Quaternion

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

finite = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)


@st.composite
def quaternions(draw, nonreal=False):
    w, x, y, z = (draw(finite) for _ in range(4))
    if nonreal and x * x + y * y + z * z < 1e-6:
        x = 1.0
    return Quaternion(w, x, y, z)


@st.composite
def units(draw):
    v = np.array([draw(finite) for _ in range(3)])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.0, 0.0, 1.0])
    return ImaginaryUnit.from_vector(v)


seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines are collected here and echoed in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
