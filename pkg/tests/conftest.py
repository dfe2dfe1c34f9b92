"""
Shared fixtures: small periodic grids and band-limited random maps.
"""

import numpy as np
import pytest

from src.generators.initial_data import random_modes
from src.models.fields import MapField, PeriodicGrid


@pytest.fixture
def grid16():
    """16 x 16 grid on the standard 2 pi torus."""
    return PeriodicGrid(16, 16)


@pytest.fixture
def grid32():
    return PeriodicGrid(32, 32)


@pytest.fixture
def make_field():
    """Factory for affine + band-limited random maps."""
    def build(grid, affine, amplitude=0.1, cutoff=2, seed=0):
        affine = np.atleast_2d(np.asarray(affine, dtype=float))
        m = affine.shape[0]
        rng = np.random.default_rng(seed)
        u = random_modes(grid, m, cutoff, amplitude, rng)
        return MapField(grid, affine, np.zeros(m), u)
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
