import numpy as np
import pytest

from orlsim.geometry import bennett_default, planar_default, DEFAULT_LIMITS


@pytest.fixture
def bennett():
    return bennett_default()


@pytest.fixture
def planar():
    return planar_default()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def sample_qa(rng, limits=DEFAULT_LIMITS, n=1):
    """Random in-limit active joint configurations, shape (n, 3)."""
    return np.array([limits.sample(rng) for _ in range(n)])
