import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_diagonal_material(rng, constants=None, lossy=False):
    from cedgrp.core import NORMALIZED, MaterialTensors
    constants = constants or NORMALIZED
    eps = rng.uniform(1.0, 4.0, 3)
    mu = rng.uniform(1.0, 2.0, 3)
    sig = rng.uniform(0.0, 3.0) if lossy else 0.0
    sigs = rng.uniform(0.0, 1.0) if lossy else 0.0
    return MaterialTensors.diagonal(eps, mu, sig, sigs, constants)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
