"""Shared fixtures."""
import numpy as np
import pytest

from services.potential_service import PotentialModel


@pytest.fixture
def ginibre():
    return PotentialModel.ginibre()


@pytest.fixture
def quartic():
    return PotentialModel.monomial(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)
