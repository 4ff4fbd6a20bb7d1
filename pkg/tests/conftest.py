"""Shared helpers for the test suite."""

import numpy as np
import pytest


def random_spd(rng, d, scale=1.0):
    """Random symmetric positive definite matrix with a sane condition number."""
    a = rng.standard_normal((d, d))
    m = a @ a.T + d * np.eye(d)
    return scale * m / np.trace(m) * d


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
