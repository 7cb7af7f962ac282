"""
Shared fixtures for the test suite.
"""

import numpy as np
import pytest

from src.constructions import matching_pennies, random_explicit_game, random_regular_matrix
from games.majority_mp_game import MajorityMPGame
from games.observer_game import ObserverGame
from games.xor_ir_game import XorIrGame


@pytest.fixture
def pennies():
    """Two-player matching pennies; player 0 wants a match."""
    return matching_pennies()


@pytest.fixture
def small_game():
    """Seeded 3-player 2-action explicit game."""
    return random_explicit_game(3, 2, seed=7)


@pytest.fixture
def shifted_identity():
    """4x4 identity plus cyclic shift: every row and column sums to 2."""
    return np.eye(4, dtype=np.int64) + np.roll(np.eye(4, dtype=np.int64), 1, axis=1)


@pytest.fixture
def regular_8x8():
    return random_regular_matrix(8, 8, 4, seed=11)


@pytest.fixture
def majority_8x8(regular_8x8):
    return MajorityMPGame(regular_8x8)


@pytest.fixture
def observer_16():
    return ObserverGame(16)


@pytest.fixture(scope="session")
def xor_2():
    return XorIrGame(2)


@pytest.fixture(scope="session")
def xor_3():
    return XorIrGame(3)
