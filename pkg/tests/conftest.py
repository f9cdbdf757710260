import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from implode.quiver import DimensionVector, Quaternion, random_moment_solution

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def unit_quaternions(draw):
    v = np.array([draw(st.floats(-1, 1, allow_nan=False)) for _ in range(4)])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([1.0, 0, 0, 0])
    return Quaternion.normalized(*v)


def cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def solution(seed: int, n: int | None = None, lam=None):
    """Random full-flag solution of the complex equations."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 5))
    lam = cplx(rng, n - 1) if lam is None else np.asarray(lam, dtype=complex)
    return random_moment_solution(DimensionVector.full_flag(n), lam, rng)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
