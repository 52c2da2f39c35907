import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mbvge import BVGEParams, MixtureParams

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# the two reference parameter sets used throughout (Table-style truths)
SET1 = MixtureParams(0.3, BVGEParams(1.0, 1.2, 1.0, 1.0), BVGEParams(1.0, 1.4, 2.0, 0.5))
SET2 = MixtureParams(0.6, BVGEParams(0.5, 0.4, 0.3, 2.0), BVGEParams(0.5, 1.5, 0.5, 1.5))


@pytest.fixture
def set1() -> MixtureParams:
    return SET1


@pytest.fixture
def set2() -> MixtureParams:
    return SET2


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
