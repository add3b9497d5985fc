import numpy as np
import pytest

from hfdemix import SystemConfig, build_default_subspace


@pytest.fixture(scope="session")
def cfg16():
    return SystemConfig.full_sampling(16, 4, 30e9)


@pytest.fixture(scope="session")
def cfg32():
    return SystemConfig.full_sampling(32, 4, 30e9)


@pytest.fixture(scope="session")
def cfg64():
    return SystemConfig.full_sampling(64, 4, 30e9)


@pytest.fixture(scope="session")
def basis16(cfg16):
    return build_default_subspace(cfg16, rank=4, grid_size=512)


@pytest.fixture(scope="session")
def basis32(cfg32):
    return build_default_subspace(cfg32, rank=8, grid_size=1024)


@pytest.fixture(scope="session")
def basis64(cfg64):
    return build_default_subspace(cfg64, rank=8, grid_size=4096, r_min=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
