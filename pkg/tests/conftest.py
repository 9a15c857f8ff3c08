import numpy as np
import pytest


def cgauss(rng, rows, cols, scale=1.0):
    """Complex gaussian matrix, unit entry variance."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return scale * (re + 1j * im) / np.sqrt(2.0)


def maxabs(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240816)
