"""Shared fixtures."""
import os
from pathlib import Path

import numpy as np
import pytest

from regression_engine import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def signal_data(rng):
    """n=80, k=25; the response depends on columns 3 and 10 (0-based)."""
    X = rng.standard_normal((80, 25))
    y = 2.0 * X[:, 3] - 1.5 * X[:, 10] + 0.5 * rng.standard_normal(80)
    return Dataset(y, X)


@pytest.fixture
def noise_data(rng):
    return Dataset(rng.standard_normal(40), rng.standard_normal((40, 15)))


@pytest.fixture
def label_data(rng):
    """Binary response that column 0 almost separates."""
    X = rng.standard_normal((60, 12))
    y = (X[:, 0] + 0.3 * rng.standard_normal(60) > 0).astype(float)
    return Dataset(y, X)


def _env_path(name: str) -> Path:
    value = os.getenv(name)
    if not value or not Path(value).exists():
        pytest.skip(f"{name} not set")
    return Path(value)


@pytest.fixture
def leukemia_csv():
    return _env_path("COVSELECT_LEUKEMIA_CSV")


@pytest.fixture
def colon_csv():
    return _env_path("COVSELECT_COLON_CSV")
