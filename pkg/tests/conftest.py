import numpy as np
import pytest

from unitaryband.models import PeriodicPhases, RandomPhases, TwoValuedPhases


@pytest.fixture
def random_model():
    return RandomPhases(t=0.5, seed=11)


@pytest.fixture
def two_valued():
    return TwoValuedPhases(t=0.6, theta_e=0.3, theta_o=1.1, alpha_e=0.4, alpha_o=2.0)


@pytest.fixture
def defect_model():
    # period three with two altered blocks near the boundary
    return PeriodicPhases(t=0.4, theta=(0.3, 1.1, 2.0), pi=(0.5, 0.1, 2.2),
                          defects=((1, 2.5, 1.0, 0.0), (2, 0.2, 3.0, 0.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
