#!/usr/bin/env python3
"""
Majority matching-pennies game over a 0/1 matrix M.

Rows 0..r-1 are row players, then one column player per column. Action index 0
is +1 and index 1 is -1. Row player i is paid the sign of its own row sum
a_i * sum_j M[i, j] * a_j; column player j is paid minus the sign of its own
column sum. Payoffs live on the +/-1 scale internally and are rescaled by
v -> (v + 1) / 2 at the payoff interface.
"""

from typing import Dict

import numpy as np

from src.kernels import signed_sum_dist
from src.strategies import DimensionError, MixedProfile, MixedStrategy, PureProfile
from .base_game import BaseGame

SIGNS = np.array([1, -1])


def rescale(value):
    """+/-1 scale to [0, 1]."""
    return (np.asarray(value, dtype=float) + 1.0) / 2.0


class MajorityMPGame(BaseGame):
    """Bipartite sign-of-sum matching-pennies game."""

    family = "majority_mp"
    has_exact_kernel = True

    def __init__(self, matrix):
        """Initialize the game from a 0/1 matrix with no empty row or column."""
        matrix = np.array(matrix, dtype=np.int64)
        if matrix.ndim != 2 or matrix.size == 0:
            raise DimensionError("The matrix must be a non-empty 2-D 0/1 array")
        if not np.isin(matrix, (0, 1)).all():
            raise ValueError("Matrix entries must be 0 or 1")
        if (matrix.sum(axis=1) == 0).any() or (matrix.sum(axis=0) == 0).any():
            raise ValueError("Every row and column of the matrix needs at least one 1")
        matrix.setflags(write=False)
        self.matrix = matrix
        self.rows, self.cols = matrix.shape
        super().__init__(self.rows + self.cols, 2)
        self._neighbours = [np.flatnonzero(matrix[i]) + self.rows for i in range(self.rows)]
        self._neighbours += [np.flatnonzero(matrix[:, j]) for j in range(self.cols)]

    def is_row(self, i: int) -> bool:
        return i < self.rows

    def relevant_players(self, i: int):
        return sorted([i] + self._neighbours[i].tolist())

    def line_sum(self, i: int, actions: PureProfile) -> int:
        """Signed sum of player i's own line, including its own sign."""
        if isinstance(actions, dict):
            actions = [actions.get(j, 0) for j in range(self.n)]
        actions = np.asarray(actions)
        own = SIGNS[actions[i]]
        return int(own * SIGNS[actions[self._neighbours[i]]].sum())

    def signed_payoff(self, i: int, actions: PureProfile) -> int:
        value = int(np.sign(self.line_sum(i, actions)))
        return value if self.is_row(i) else -value

    def payoff(self, i: int, actions: PureProfile) -> float:
        return float(rescale(self.signed_payoff(i, actions)))

    def deviation_table(self, actions: PureProfile) -> np.ndarray:
        signs = SIGNS[np.asarray(actions, dtype=np.int64)]
        row_totals = self.matrix @ signs[self.rows:]
        col_totals = self.matrix.T @ signs[: self.rows]
        signed = np.empty((self.n, 2))
        signed[: self.rows] = np.sign(row_totals[:, None] * SIGNS[None, :])
        signed[self.rows:] = -np.sign(col_totals[:, None] * SIGNS[None, :])
        return rescale(signed)

    def signed_deviation_payoffs(self, i: int, profile: MixedProfile) -> np.ndarray:
        """Exact expected +/-1 payoff of player i for playing +1 and -1."""
        self.check_profile(profile)
        self.check_player(i)
        dist = signed_sum_dist([profile.probs(j)[0] for j in self._neighbours[i]])
        plus = dist.sign_expectation()
        values = np.array([plus, -plus])
        return values if self.is_row(i) else -values

    def deviation_payoffs(self, i: int, profile: MixedProfile) -> np.ndarray:
        return rescale(self.signed_deviation_payoffs(i, profile))

    def signed_regret(self, i: int, profile: MixedProfile) -> float:
        values = self.signed_deviation_payoffs(i, profile)
        return max(0.0, float(values.max() - np.dot(profile.probs(i), values)))

    def exact_equilibrium(self) -> MixedProfile:
        """Every player at (1/2, 1/2)."""
        return MixedProfile(tuple(MixedStrategy.uniform(2) for _ in range(self.n)))

    def descriptor(self) -> Dict:
        return {"family": self.family, "matrix": self.matrix.tolist()}
