import numpy as np
import pytest

from sketchmesh.synthetic import random_mesh, strip_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def strip8():
    return strip_mesh(8)


@pytest.fixture
def small_mesh(rng):
    return random_mesh(rng, 40)
