import numpy as np
import pytest

from fock import TruncatedFockBasis
from states import SqueezingParam


@pytest.fixture(scope="session")
def pair_basis():
    """Two-mode basis large enough for r <= 0.75 squeezing at the default tail tolerance"""
    return TruncatedFockBasis(mode_count=2, cutoff=48)


@pytest.fixture(scope="session")
def medium_pair_basis():
    return TruncatedFockBasis(mode_count=2, cutoff=40)


@pytest.fixture(scope="session")
def small_pair_basis():
    return TruncatedFockBasis(mode_count=2, cutoff=16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def xi_half():
    return SqueezingParam(r=0.5)


@pytest.fixture
def random_amplitudes(rng):
    """Factory for normalized random amplitude vectors on a basis"""

    def make(basis):
        vector = rng.normal(size=basis.dimension) + 1j * rng.normal(size=basis.dimension)
        return vector / np.linalg.norm(vector)

    return make
