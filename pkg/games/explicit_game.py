#!/usr/bin/env python3
"""
Explicit normal-form game stored as a full payoff tensor.

The flat payoff array has length n * m^n: player i's block comes first, and
inside a block the profile index is a_0 + a_1*m + ... + a_{n-1}*m^{n-1}
(player 0's action varies fastest).
"""

from typing import Dict

import numpy as np

from settings.tolerances import Guards
from src.strategies import DimensionError, GuardError, MixedProfile, PureProfile
from .base_game import BaseGame


class ExplicitGame(BaseGame):
    """Game given by its complete payoff tensor."""

    family = "explicit"
    has_exact_kernel = True

    def __init__(self, n: int, m: int, payoffs):
        """Initialize the game from a flat payoff array in the documented order."""
        super().__init__(n, m)
        flat = np.array(payoffs, dtype=float).reshape(-1)
        if flat.size != n * m ** n:
            raise DimensionError(f"Expected {n}*{m}^{n} = {n * m ** n} payoffs, got {flat.size}")
        if np.any(flat < 0) or np.any(flat > 1):
            raise ValueError("Explicit payoffs must lie in [0, 1]")
        flat.setflags(write=False)
        self._flat = flat
        self._blocks = flat.reshape(n, m ** n)
        self._strides = m ** np.arange(n)

    @property
    def payoffs(self) -> np.ndarray:
        return self._flat

    def tensor(self, i: int) -> np.ndarray:
        """Player i's payoffs as an n-dimensional array indexed [a_0, ..., a_{n-1}]."""
        return self._blocks[i].reshape((self.m,) * self.n, order="F")

    def profile_index(self, actions: PureProfile) -> int:
        return int(np.dot(np.asarray(actions, dtype=np.int64), self._strides))

    def payoff(self, i: int, actions: PureProfile) -> float:
        return float(self._blocks[i, self.profile_index(actions)])

    def deviation_row(self, i: int, actions: PureProfile) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.int64)
        base = self.profile_index(actions) - actions[i] * self._strides[i]
        return self._blocks[i, base + np.arange(self.m) * self._strides[i]].copy()

    def deviation_table(self, actions: PureProfile) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.int64)
        index = self.profile_index(actions)
        base = index - actions * self._strides
        columns = base[:, None] + np.arange(self.m)[None, :] * self._strides[:, None]
        return self._blocks[np.arange(self.n)[:, None], columns]

    def deviation_payoffs(self, i: int, profile: MixedProfile) -> np.ndarray:
        """Contract every opponent axis of player i's tensor with its mixed strategy."""
        self.check_profile(profile)
        self.check_player(i)
        if self.m ** self.n > Guards.EXACT_PROFILES:
            raise GuardError(f"{self.m}^{self.n} profiles exceed the exact guard")
        result = self.tensor(i)
        for j in reversed(range(self.n)):
            if j == i:
                continue
            result = np.tensordot(result, profile.probs(j), axes=([j], [0]))
        return np.asarray(result, dtype=float).reshape(self.m)

    def to_explicit(self) -> "ExplicitGame":
        return self

    def descriptor(self) -> Dict:
        return {"family": self.family, "n": self.n, "m": self.m, "payoffs": self._flat.tolist()}
