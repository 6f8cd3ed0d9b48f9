import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mcpmix.core import RngStream
from mcpmix.synthgen import GenConfig
from mcpmix.trainloop import materialize

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_gen():
    return GenConfig(size=24, lesion_radius=(3.0, 8.0))


@pytest.fixture(scope="session")
def small_data(small_gen):
    """(gen config, 16 train, 4 test) at 24x24 for fast training tests."""
    return small_gen, materialize(small_gen, 16, 11), materialize(small_gen, 4, 12)


@pytest.fixture
def stream():
    return RngStream(7, 0)
