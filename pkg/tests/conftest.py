import functools

import numpy as np
import pytest

from weinstein import WeinsteinParams, build_grid


@functools.lru_cache(maxsize=32)
def cached_grid(alpha: float, d: int, n: int, L: float, N: int, R: float):
    return build_grid(WeinsteinParams(alpha, d), n, L, N, R)


@pytest.fixture(scope="session")
def make_grid():
    return cached_grid


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def rel_to_peak(a: np.ndarray, b: np.ndarray) -> float:
    """max |a-b| / max |b| — the node-wise error scale for fields with zeros."""
    return float(np.abs(a - b).max() / np.abs(b).max())
