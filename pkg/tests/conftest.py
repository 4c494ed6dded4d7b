import numpy as np
import pytest

from softbeam.beam import BeamSpec


@pytest.fixture(scope="session")
def cnt_beam():
    return BeamSpec.from_preset("cnt_10_0", 1e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
