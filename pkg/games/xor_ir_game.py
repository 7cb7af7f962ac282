#!/usr/bin/env python3
"""
XOR individual-rationality game.

Players are pairs (s, p) with a nonzero label s in {0,1}^kappa and a choice
vector p in {0,1}^(2^(kappa-1)). The profile a is mapped to
f(a) = XOR of s over the players that play 1, and player (s, p) is paid 1 iff
f(a) lies in its half-set V(s, p). V picks one endpoint from each pair
{x, x XOR s}: pairs are ordered by their smaller endpoint, and bit j of p
(least significant first) selects the larger endpoint of pair j.

Labels are integers whose most significant bit is the first coordinate.
"""

from typing import Dict, Optional, Tuple

import numpy as np

from settings.tolerances import Guards
from src.kernels import label_to_bits, xor_pushforward
from src.seeding import derive_rng
from src.strategies import DimensionError, GuardError, MixedProfile, PureProfile
from .base_game import BaseGame


def player_count(kappa: int) -> int:
    return (2 ** kappa - 1) * 2 ** (2 ** (kappa - 1))


class XorIrGame(BaseGame):
    """Binary-action game in which every deviation flips the deviator's payoff."""

    family = "xor"
    has_exact_kernel = True

    def __init__(self, kappa: int):
        """Initialize the fully instantiated game for label dimension kappa."""
        low, high = Guards.XOR_KAPPA
        if not low <= kappa <= high:
            raise GuardError(f"kappa must lie in [{low}, {high}], got {kappa}")
        self.kappa = kappa
        self.size = 2 ** kappa
        self.choice_bits = 2 ** (kappa - 1)
        super().__init__(player_count(kappa), 2)
        index = np.arange(self.n, dtype=np.int64)
        self.labels = (index >> self.choice_bits) + 1
        self.choices = index & ((1 << self.choice_bits) - 1)
        self._high_bits = np.floor(np.log2(self.labels)).astype(np.int64)
        self.labels.setflags(write=False)
        self.choices.setflags(write=False)

    # Player addressing

    def player_index(self, s: int, p: int) -> int:
        if not 0 < s < self.size or not 0 <= p < 2 ** self.choice_bits:
            raise DimensionError(f"No player (s={s}, p={p}) for kappa={self.kappa}")
        return ((s - 1) << self.choice_bits) | p

    def player_pair(self, i: int) -> Tuple[int, int]:
        self.check_player(i)
        return int(self.labels[i]), int(self.choices[i])

    def describe_player(self, i: int) -> Dict:
        s, p = self.player_pair(i)
        return {
            "index": i,
            "s": list(label_to_bits(s, self.kappa)),
            "p": [(p >> j) & 1 for j in range(self.choice_bits)],
            "V": [list(label_to_bits(x, self.kappa)) for x in self.half_set(i)],
        }

    # Half-sets

    def in_half_set(self, players, x):
        """Vectorised membership test x in V(player); broadcasts over arrays."""
        players = np.asarray(players, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        s = self.labels[players]
        h = self._high_bits[players]
        partner = x ^ s
        lower = np.minimum(x, partner)
        rank = ((lower >> (h + 1)) << h) | (lower & ((np.int64(1) << h) - 1))
        bit = (self.choices[players] >> rank) & 1
        return (x > partner) == (bit == 1)

    def half_set(self, i: int) -> Tuple[int, ...]:
        members = self.in_half_set(np.full(self.size, i), np.arange(self.size))
        return tuple(int(x) for x in np.flatnonzero(members))

    def half_set_mask(self, s: int, p: int) -> np.ndarray:
        return np.array(self.in_half_set(np.full(self.size, self.player_index(s, p)), np.arange(self.size)))

    # Payoffs

    def outcome(self, actions: PureProfile) -> int:
        """f(a): XOR of the labels of the players that play 1."""
        actions = np.asarray(actions, dtype=np.int64)
        return int(np.bitwise_xor.reduce(np.where(actions == 1, self.labels, 0)))

    def outcomes(self, rounds: np.ndarray) -> np.ndarray:
        """f applied to every row of a (T x n) action array."""
        return np.bitwise_xor.reduce(np.where(np.asarray(rounds) == 1, self.labels[None, :], 0), axis=1)

    def payoff(self, i: int, actions: PureProfile) -> float:
        return float(self.in_half_set(i, self.outcome(actions)))

    def deviation_row(self, i: int, actions: PureProfile) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.int64)
        without = self.outcome(actions) ^ (int(self.labels[i]) if actions[i] == 1 else 0)
        zero = float(self.in_half_set(i, without))
        return np.array([zero, 1.0 - zero])

    def deviation_table(self, actions: PureProfile) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.int64)
        total = self.outcome(actions)
        without = total ^ np.where(actions == 1, self.labels, 0)
        zero = self.in_half_set(np.arange(self.n), without).astype(float)
        return np.column_stack([zero, 1.0 - zero])

    def deviation_payoffs(self, i: int, profile: MixedProfile) -> np.ndarray:
        """Exact kernel: push the opponents' product strategy through f."""
        self.check_profile(profile)
        self.check_player(i)
        q = np.array([profile.probs(j)[1] for j in range(self.n)])
        q[i] = 0.0
        nu = xor_pushforward(q, self.labels.tolist(), self.kappa)
        mask = np.array(self.in_half_set(np.full(self.size, i), np.arange(self.size)))
        zero = float(nu[mask].sum())
        return np.array([zero, 1.0 - zero])

    def pushforward(self, dist) -> np.ndarray:
        """Law of f(a) under a correlated distribution."""
        nu = np.zeros(self.size)
        np.add.at(nu, self.outcomes(dist.profiles), dist.weights)
        return nu

    def declared_ir_level(self, i: int) -> Optional[float]:
        return 0.5

    def check_flip_invariant(self, samples: int, seed: int) -> bool:
        """u(0, a_-i) + u(1, a_-i) == 1 on random players and opponent profiles."""
        rng = derive_rng(seed, "xor-flip-invariant")
        for _ in range(samples):
            actions = rng.integers(0, 2, size=self.n)
            i = int(rng.integers(0, self.n))
            zero = list(actions)
            zero[i] = 0
            one = list(actions)
            one[i] = 1
            if self.payoff(i, zero) + self.payoff(i, one) != 1.0:
                return False
        return True

    def descriptor(self) -> Dict:
        return {"family": self.family, "kappa": self.kappa}
