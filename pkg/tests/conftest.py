import numpy as np
import pytest

from shearmark import synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def logo64():
    return synthetic.logo(64)


@pytest.fixture(scope="session")
def scene128():
    return synthetic.host("scene", 128)
