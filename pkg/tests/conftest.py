import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_symmetric(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.T)


def random_skew(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * 0.5 * (a - a.T)
