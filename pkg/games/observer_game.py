#!/usr/bin/env python3
"""
Observer game: b matching-pennies pairs watched by one observer per size-b
subset of the 2b pair players. An observer is paid 1/2 for action 0 and, for
action 1, 1 if the number of its members playing 1 falls in the window
b/2 +/- w*sqrt(b), else 0.

Observers are addressed by the colex rank of their subset and never
enumerated.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.kernels import poisson_binomial_pmf
from src.seeding import derive_rng
from src.strategies import DimensionError, MixedProfile, MixedStrategy, PureProfile
from .base_game import BaseGame


def rank_subset(subset: Sequence[int]) -> int:
    """Colex rank of a sorted subset."""
    return sum(math.comb(c, j + 1) for j, c in enumerate(sorted(subset)))


def unrank_subset(rank: int, n: int, k: int) -> Tuple[int, ...]:
    """Subset of size k of {0..n-1} with the given colex rank."""
    subset = [0] * k
    while k > 0:
        n -= 1
        offset = math.comb(n, k)
        if rank >= offset:
            rank -= offset
            k -= 1
            subset[k] = n
    return tuple(subset)


class ObserverGame(BaseGame):
    """Matching-pennies pairs plus window-guessing observers."""

    family = "observer"
    has_exact_kernel = True

    def __init__(self, b: int, w: float = 1.0):
        """Initialize the game for b pairs and window half-width w*sqrt(b)."""
        if b < 2 or b % 2:
            raise ValueError(f"b must be a positive even integer, got {b}")
        if w < 0:
            raise ValueError(f"Window width must be non-negative, got {w}")
        self.b = b
        self.w = float(w)
        self.pair_players = 2 * b
        self.observer_count = math.comb(2 * b, b)
        super().__init__(self.pair_players + self.observer_count, 2)
        half_width = self.w * math.sqrt(b)
        self.window = (math.ceil(b / 2 - half_width - 1e-12), math.floor(b / 2 + half_width + 1e-12))

    # Player addressing

    def is_observer(self, i: int) -> bool:
        return i >= self.pair_players

    def partner(self, i: int) -> int:
        return i + 1 if i % 2 == 0 else i - 1

    def observer_subset(self, i: int) -> Tuple[int, ...]:
        if not self.is_observer(i):
            raise DimensionError(f"Player {i} is a matching-pennies player")
        self.check_player(i)
        return unrank_subset(i - self.pair_players, self.pair_players, self.b)

    def observer_index(self, subset: Sequence[int]) -> int:
        subset = sorted(subset)
        if len(subset) != self.b or len(set(subset)) != self.b:
            raise DimensionError(f"Observers watch exactly {self.b} distinct pair players")
        if subset[0] < 0 or subset[-1] >= self.pair_players:
            raise DimensionError("Observer members must be pair players")
        return self.pair_players + rank_subset(subset)

    def relevant_players(self, i: int) -> Sequence[int]:
        if self.is_observer(i):
            return list(self.observer_subset(i)) + [i]
        return sorted((i, self.partner(i)))

    # Payoffs

    def in_window(self, count: int) -> bool:
        return self.window[0] <= count <= self.window[1]

    def payoff(self, i: int, actions: PureProfile) -> float:
        own = actions[i]
        if not self.is_observer(i):
            match = own == actions[self.partner(i)]
            return float(match if i % 2 == 0 else not match)
        if own == 0:
            return 0.5
        count = sum(actions[j] for j in self.observer_subset(i))
        return float(self.in_window(count))

    def window_probability(self, probs_one: Sequence[float]) -> float:
        """P(window contains the number of members playing 1), exact DP."""
        pmf = poisson_binomial_pmf(probs_one)
        lo = max(self.window[0], 0)
        hi = min(self.window[1], pmf.size - 1)
        if lo > hi:
            return 0.0
        return float(pmf[lo:hi + 1].sum())

    def deviation_payoffs(self, i: int, profile: MixedProfile) -> np.ndarray:
        self.check_profile(profile)
        self.check_player(i)
        if not self.is_observer(i):
            q = profile.probs(self.partner(i))[1]
            if i % 2 == 0:
                return np.array([1.0 - q, q])
            return np.array([q, 1.0 - q])
        members = [profile.probs(j)[1] for j in self.observer_subset(i)]
        return np.array([0.5, self.window_probability(members)])

    def declared_ir_level(self, i: int) -> Optional[float]:
        if self.is_observer(i) and self.window[0] <= 0 and self.window[1] >= self.b:
            return 1.0
        return 0.5

    def exact_equilibrium(self) -> MixedProfile:
        """Pair players at (1/2, 1/2); every observer plays action 1."""
        return MixedProfile(
            tuple(MixedStrategy.uniform(2) for _ in range(self.pair_players)),
            default=MixedStrategy.pure(1, 2),
            n=self.n,
        )

    def descriptor(self) -> Dict:
        return {"family": self.family, "b": self.b, "w": self.w}

    # Audits

    def random_observers(self, count: int, seed: int) -> List[int]:
        rng = derive_rng(seed, "observer-sample")
        players = []
        for _ in range(count):
            subset = rng.choice(self.pair_players, size=self.b, replace=False)
            players.append(self.observer_index(subset.tolist()))
        return players

    def audit_players(self, count: int, seed: int) -> List[int]:
        """Every pair player plus ``count`` random observers."""
        return list(range(self.pair_players)) + self.random_observers(count, seed)

    def pigeonhole_observer(self, profile: MixedProfile) -> int:
        """
        Observer whose members all sit strictly on the same side of 1/2.
        Among 2b pair players off 1/2, at least b share a side.
        """
        probs_one = [profile.probs(j)[1] for j in range(self.pair_players)]
        below = [j for j, q in enumerate(probs_one) if q < 0.5]
        above = [j for j, q in enumerate(probs_one) if q > 0.5]
        side = below if len(below) >= len(above) else above
        if len(side) < self.b:
            raise ValueError("No b pair players share a side of 1/2; some sit exactly at 1/2")
        return self.observer_index(side[: self.b])

    def cube_certificate(self, profile: MixedProfile, k: int) -> Dict:
        """
        Pigeonhole observer with its smallest regret over the cube range of its
        own coordinate. The exact-equilibrium coordinate 1 gives the range
        [(k-1)/k, 1], and regret is linear in the observer's own probability.
        """
        player = self.pigeonhole_observer(profile)
        u_zero, u_one = self.deviation_payoffs(player, profile)
        best = max(u_zero, u_one)
        low = (k - 1) / k
        regrets = [best - (q * u_one + (1 - q) * u_zero) for q in (low, 1.0)]
        return {
            "player": player,
            "subset": list(self.observer_subset(player)),
            "regret": max(0.0, min(regrets)),
            "payoff_action_one": float(u_one),
            "kind": "pigeonhole-observer",
        }
