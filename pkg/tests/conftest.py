import numpy as np
import pytest

from compactfix.casestudy import load_problem


@pytest.fixture(scope="session")
def problem():
    return load_problem("hyperbolic-erf")


@pytest.fixture(scope="session")
def coarse_axes():
    """Small uniform grid for operator property loops."""
    return (np.linspace(0.0, 6.0, 13), np.linspace(0.0, 1.0, 5))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240816)
