import numpy as np
import pytest

from marksurv.datasets import GEHAN_6MP


@pytest.fixture
def gehan():
    return GEHAN_6MP


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_rng(seed):
    return np.random.default_rng(seed)
