import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from degenwave.model import ModelParams
from degenwave.phase_dynamics import connecting_orbit

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ref_params():
    return ModelParams(p=2, c=1.0, delta=1)


@pytest.fixture(scope="session")
def orbit_01(ref_params):
    return connecting_orbit(ref_params, 0.1)


@pytest.fixture(scope="session")
def orbit_001_deep(ref_params):
    """Anchor 0.01, backward branch reaching past xi = -13."""
    return connecting_orbit(ref_params, 0.01, phi_min=0.01 * math.exp(-13.0) * 0.5)
