#!/usr/bin/env python3
"""
Base Game class that provides the common interface and the generic
(enumeration-based) expected-payoff machinery for every game family.
"""

import itertools
import logging
from abc import ABC, abstractmethod
from typing import Dict, Optional, Sequence

import numpy as np

from settings.tolerances import Guards
from src.strategies import DimensionError, GuardError, MixedProfile, PureProfile

logger = logging.getLogger(__name__)


class BaseGame(ABC):
    """
    An n-player m-action game with payoffs in [0, 1].

    Subclasses implement ``payoff``; families with a closed-form or DP expected
    payoff override ``deviation_payoffs`` and set ``has_exact_kernel``.
    """

    family = "abstract"
    has_exact_kernel = False

    def __init__(self, n: int, m: int):
        """Initialize the game with its player and action counts."""
        if n < 1 or m < 1:
            raise DimensionError(f"Games need n >= 1 and m >= 1, got n={n}, m={m}")
        self._n = n
        self._m = m

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return self._m

    @property
    def is_enumerable(self) -> bool:
        """Whether a full pure profile (one entry per player) can be materialised."""
        return self._n <= Guards.ENUMERABLE_PLAYERS

    @abstractmethod
    def payoff(self, i: int, actions: PureProfile) -> float:
        """Payoff of player i at a pure profile; ``actions`` is indexable by player."""

    def relevant_players(self, i: int) -> Sequence[int]:
        """Players whose actions can change u_i (always includes i)."""
        return range(self._n)

    def declared_ir_level(self, i: int) -> Optional[float]:
        """Individually rational level stated by the family, if any."""
        return None

    def exact_equilibrium(self) -> Optional[MixedProfile]:
        """A known exact Nash equilibrium, if the family declares one."""
        return None

    def descriptor(self) -> Dict:
        """One-line description from which the game can be re-created."""
        return {"family": self.family}

    def check_player(self, i: int):
        if i < 0 or i >= self._n:
            raise DimensionError(f"Player {i} outside [0, {self._n})")

    def check_profile(self, profile: MixedProfile):
        if profile.n != self._n:
            raise DimensionError(f"Profile has {profile.n} players, game has {self._n}")
        if profile.m != self._m:
            raise DimensionError(f"Profile has {profile.m} actions, game has {self._m}")

    def check_actions(self, actions: PureProfile):
        if len(actions) != self._n:
            raise DimensionError(f"Pure profile has {len(actions)} entries, game has {self._n} players")
        if any(a < 0 or a >= self._m for a in np.asarray(actions).tolist()):
            raise DimensionError(f"Pure profile entries must lie in [0, {self._m})")

    def deviation_row(self, i: int, actions: PureProfile) -> np.ndarray:
        """u_i(a', a_{-i}) for every action a' of player i."""
        values = np.empty(self._m)
        deviated = dict(actions) if isinstance(actions, dict) else list(np.asarray(actions).tolist())
        for action in range(self._m):
            deviated[i] = action
            values[action] = self.payoff(i, deviated)
        return values

    def deviation_table(self, actions: PureProfile) -> np.ndarray:
        """(n x m) table of every player's unilateral deviation payoffs."""
        if not self.is_enumerable:
            raise GuardError(f"{self.family} game with n={self._n} has no full deviation table")
        return np.vstack([self.deviation_row(i, actions) for i in range(self._n)])

    def deviation_payoffs(self, i: int, profile: MixedProfile) -> np.ndarray:
        """
        Exact u_i(a', x_{-i}) for every action a', by enumerating the opponents
        that matter to player i.
        """
        self.check_profile(profile)
        self.check_player(i)
        opponents = [j for j in self.relevant_players(i) if j != i]
        size = self._m ** (len(opponents) + 1)
        if size > Guards.EXACT_PROFILES:
            raise GuardError(
                f"Exact enumeration needs {self._m}^{len(opponents) + 1} profiles, guard is {Guards.EXACT_PROFILES}"
            )
        values = np.zeros(self._m)
        actions: Dict[int, int] = {}
        full = [0] * self._n if self.is_enumerable else None
        for combo in itertools.product(range(self._m), repeat=len(opponents)):
            weight = 1.0
            for j, a in zip(opponents, combo):
                weight *= profile.probs(j)[a]
                if weight == 0.0:
                    break
            if weight == 0.0:
                continue
            if full is not None:
                for j, a in zip(opponents, combo):
                    full[j] = a
                values += weight * self.deviation_row(i, full)
            else:
                actions.clear()
                actions.update(zip(opponents, combo))
                values += weight * self.deviation_row(i, actions)
        return values

    def expected_payoff(self, i: int, profile: MixedProfile) -> float:
        """u_i(x) for a mixed profile."""
        return float(np.dot(profile.probs(i), self.deviation_payoffs(i, profile)))

    def expected_payoff_correlated(self, i: int, dist) -> float:
        """u_i under a correlated distribution, by summing over its support."""
        return float(sum(w * self.payoff(i, a) for a, w in dist))

    def to_explicit(self):
        """Export the full payoff tensor (player-0 action varies fastest)."""
        from games.explicit_game import ExplicitGame

        if self._n * self._m ** self._n > Guards.EXACT_PROFILES:
            raise GuardError(f"Tensor of {self._n}*{self._m}^{self._n} entries exceeds the guard")
        total = self._m ** self._n
        payoffs = np.empty((self._n, total))
        for index, digits in enumerate(itertools.product(range(self._m), repeat=self._n)):
            actions = list(reversed(digits))
            payoffs[:, index] = [self.payoff(i, actions) for i in range(self._n)]
        logger.debug("Exported %s game to a %d x %d tensor", self.family, self._n, total)
        return ExplicitGame(self._n, self._m, payoffs.reshape(-1))

    def cube_certificate(self, profile: MixedProfile, k: int) -> Dict:
        """
        Witness that a cube vertex is not an equilibrium: the player with the
        largest regret. Families with a structural argument override this.
        """
        regrets = []
        for i in range(self._n):
            values = self.deviation_payoffs(i, profile)
            regrets.append(max(0.0, float(values.max() - np.dot(profile.probs(i), values))))
        worst = int(np.argmax(regrets))
        return {"player": worst, "regret": regrets[worst], "kind": "worst-player"}
