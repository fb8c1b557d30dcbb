import os

import numpy as np
import pytest
from hypothesis import settings

from occtime.laws import Deterministic, Exponential, IndependentProduct, MarshallOlkin
from occtime.levy_scale import Brownian, CompoundPoissonExp

settings.register_profile("occtime", deadline=None, max_examples=60, derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "occtime"))


def mc_se(samples):
    samples = np.asarray(samples, dtype=float)
    return samples.std(ddof=1) / np.sqrt(samples.size)


@pytest.fixture
def exp_law():
    return IndependentProduct(Exponential(1.0), Exponential(1.0))


@pytest.fixture
def det_law():
    return IndependentProduct(Deterministic(1.0), Deterministic(1.0))


@pytest.fixture
def mo_law():
    return MarshallOlkin(1.0, 1.0, 1.0)


@pytest.fixture
def mm1():
    return CompoundPoissonExp(0.5, 1.0)


@pytest.fixture
def bm():
    return Brownian(-1.0, 1.0)
