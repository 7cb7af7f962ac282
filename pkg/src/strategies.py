"""
Strategy and distribution types shared by every module.

All types are immutable after construction. Probability vectors are stored as
read-only numpy arrays; k-uniform types also keep their integer counts so grid
membership can be checked with exact rational arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from settings.tolerances import Tolerances


class DimensionError(ValueError):
    """Raised when a profile, game or matrix has the wrong shape."""


class GuardError(ValueError):
    """Raised when a size guard refuses an exact computation."""


class SpecError(ValueError):
    """Raised when a file or descriptor fails to parse or validate."""


PureProfile = Sequence[int]


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MixedStrategy:
    """A probability vector over the m actions of one player."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise DimensionError("A mixed strategy needs a non-empty probability vector")
        if np.any(probs < 0):
            raise ValueError(f"Negative probability in {probs.tolist()}")
        if abs(probs.sum() - 1.0) > Tolerances.PROBABILITY_INPUT * max(1, probs.size):
            raise ValueError(f"Probabilities sum to {probs.sum()!r}, expected 1")
        object.__setattr__(self, "probs", probs)

    @property
    def m(self) -> int:
        return int(self.probs.size)

    @classmethod
    def pure(cls, action: int, m: int) -> "MixedStrategy":
        probs = np.zeros(m)
        probs[action] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, m: int) -> "MixedStrategy":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def binary(cls, prob_one: float) -> "MixedStrategy":
        """Two-action strategy playing action index 1 with the given probability."""
        return cls(np.array([1.0 - prob_one, prob_one]))

    def is_point_mass(self) -> bool:
        return bool(np.isclose(self.probs.max(), 1.0, rtol=0, atol=Tolerances.PROBABILITY_INPUT))

    def to_dict(self) -> dict:
        return {"probs": self.probs.tolist()}


@dataclass(frozen=True)
class KUniformStrategy:
    """The uniform distribution over a multiset of k actions, stored as counts."""

    counts: Tuple[int, ...]
    k: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if any(c < 0 for c in counts):
            raise ValueError(f"Negative count in {counts}")
        if sum(counts) != self.k:
            raise ValueError(f"Counts {counts} do not sum to k={self.k}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "_probs", _frozen(np.array(counts, dtype=float) / self.k))

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def m(self) -> int:
        return len(self.counts)

    @classmethod
    def pure(cls, action: int, m: int, k: int) -> "KUniformStrategy":
        counts = [0] * m
        counts[action] = k
        return cls(tuple(counts), k)

    def fractions(self) -> List[Fraction]:
        return [Fraction(c, self.k) for c in self.counts]

    def is_point_mass(self) -> bool:
        return max(self.counts) == self.k

    def to_dict(self) -> dict:
        return {"counts": list(self.counts), "k": self.k}


Strategy = Union[MixedStrategy, KUniformStrategy]


@dataclass(frozen=True)
class MixedProfile:
    """
    One strategy per player.

    Players with index >= len(strategies) play ``default``; this lets games with
    astronomically many players (observer games) carry a profile without
    materialising it. ``n`` defaults to len(strategies) when no default is set.
    """

    strategies: Tuple[Strategy, ...]
    default: Optional[Strategy] = None
    n: Optional[int] = None

    def __post_init__(self):
        strategies = tuple(self.strategies)
        object.__setattr__(self, "strategies", strategies)
        n = self.n if self.n is not None else len(strategies)
        if self.default is None and n != len(strategies):
            raise DimensionError(f"Profile lists {len(strategies)} strategies for {n} players")
        if n < len(strategies):
            raise DimensionError(f"Profile lists {len(strategies)} strategies for {n} players")
        object.__setattr__(self, "n", n)
        sizes = {s.m for s in strategies}
        if self.default is not None:
            sizes.add(self.default.m)
        if len(sizes) > 1:
            raise DimensionError(f"Strategies disagree on the action count: {sorted(sizes)}")

    @property
    def m(self) -> int:
        if self.strategies:
            return self.strategies[0].m
        return self.default.m

    @property
    def explicit_count(self) -> int:
        return len(self.strategies)

    def __getitem__(self, i: int) -> Strategy:
        if i < 0 or i >= self.n:
            raise IndexError(f"Player {i} outside [0, {self.n})")
        if i < len(self.strategies):
            return self.strategies[i]
        return self.default

    def probs(self, i: int) -> np.ndarray:
        return self[i].probs

    def matrix(self) -> np.ndarray:
        """(explicit players x m) array of probabilities."""
        return np.vstack([s.probs for s in self.strategies])

    def replace(self, i: int, strategy: Strategy) -> "MixedProfile":
        if i >= len(self.strategies):
            raise DimensionError(f"Player {i} is not explicitly listed in the profile")
        strategies = list(self.strategies)
        strategies[i] = strategy
        return MixedProfile(tuple(strategies), self.default, self.n)

    def is_k_uniform(self, k: int) -> bool:
        """Exact check that every listed coordinate is an integer multiple of 1/k."""
        members = list(self.strategies) + ([self.default] if self.default is not None else [])
        for strategy in members:
            if isinstance(strategy, KUniformStrategy):
                if any(k * c % strategy.k for c in strategy.counts):
                    return False
                continue
            for p in strategy.probs:
                if abs(p * k - round(p * k)) > Tolerances.GRID_COORDINATE * k:
                    return False
        return True

    @classmethod
    def uniform(cls, n: int, m: int) -> "MixedProfile":
        return cls(tuple(MixedStrategy.uniform(m) for _ in range(n)))

    @classmethod
    def from_pure(cls, actions: PureProfile, m: int) -> "MixedProfile":
        return cls(tuple(MixedStrategy.pure(int(a), m) for a in actions))

    @classmethod
    def from_matrix(cls, probs: Iterable[Sequence[float]]) -> "MixedProfile":
        return cls(tuple(MixedStrategy(np.asarray(row, dtype=float)) for row in probs))

    @classmethod
    def binary(cls, probs_one: Iterable[float]) -> "MixedProfile":
        return cls(tuple(MixedStrategy.binary(float(q)) for q in probs_one))

    def to_dict(self) -> dict:
        data = {"n": self.n, "strategies": [s.to_dict() for s in self.strategies]}
        if self.default is not None:
            data["default"] = self.default.to_dict()
        return data


@dataclass(frozen=True)
class CorrelatedDistribution:
    """
    A finite distribution over pure profiles.

    Identical profiles are merged. ``k`` is set for k-uniform distributions,
    in which case every weight is a multiple of 1/k.
    """

    profiles: np.ndarray
    weights: np.ndarray
    k: Optional[int] = None

    def __post_init__(self):
        profiles = np.array(self.profiles, dtype=np.int64)
        weights = np.array(self.weights, dtype=float)
        if profiles.ndim != 2 or profiles.shape[0] == 0:
            raise DimensionError("A correlated distribution needs a non-empty (support x n) array")
        if weights.shape != (profiles.shape[0],):
            raise DimensionError("One weight per support profile is required")
        if np.any(weights <= 0):
            raise ValueError("Support weights must be positive")
        if abs(weights.sum() - 1.0) > Tolerances.PROBABILITY_INPUT * max(1, weights.size):
            raise ValueError(f"Weights sum to {weights.sum()!r}, expected 1")
        unique, inverse = np.unique(profiles, axis=0, return_inverse=True)
        merged = np.zeros(unique.shape[0])
        np.add.at(merged, inverse.reshape(-1), weights)
        if self.k is not None:
            if unique.shape[0] > self.k:
                raise ValueError(f"Support {unique.shape[0]} exceeds k={self.k}")
            scaled = merged * self.k
            if np.any(np.abs(scaled - np.round(scaled)) > 1e-9):
                raise ValueError(f"Weights are not multiples of 1/{self.k}")
        unique.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "profiles", unique)
        object.__setattr__(self, "weights", merged)

    @property
    def n(self) -> int:
        return int(self.profiles.shape[1])

    @property
    def support_size(self) -> int:
        return int(self.profiles.shape[0])

    def __iter__(self):
        return iter(zip(self.profiles, self.weights))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[PureProfile, float]], k: Optional[int] = None):
        pairs = list(pairs)
        if not pairs:
            raise ValueError("Empty support")
        profiles = np.array([list(a) for a, _ in pairs], dtype=np.int64)
        weights = np.array([w for _, w in pairs], dtype=float)
        return cls(profiles, weights, k)

    @classmethod
    def point_mass(cls, actions: PureProfile) -> "CorrelatedDistribution":
        return cls(np.array([list(actions)], dtype=np.int64), np.array([1.0]))

    @classmethod
    def uniform_over(cls, profiles: Sequence[PureProfile]) -> "CorrelatedDistribution":
        profiles = np.array([list(a) for a in profiles], dtype=np.int64)
        return cls(profiles, np.full(profiles.shape[0], 1.0 / profiles.shape[0]))

    def to_dict(self) -> dict:
        data = {"support": [
            {"actions": a.tolist(), "weight": float(w)} for a, w in zip(self.profiles, self.weights)
        ]}
        if self.k is not None:
            data["k"] = self.k
        return data


class KUniformDistribution(CorrelatedDistribution):
    """Uniform distribution over a multiset of k pure profiles."""

    def __init__(self, profiles: np.ndarray):
        profiles = np.array(profiles, dtype=np.int64)
        if profiles.ndim != 2 or profiles.shape[0] == 0:
            raise DimensionError("A k-uniform distribution needs at least one profile")
        k = int(profiles.shape[0])
        super().__init__(profiles, np.full(k, 1.0 / k), k)

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.weights * self.k).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "support": [
                {"actions": a.tolist(), "count": int(c)} for a, c in zip(self.profiles, self.counts)
            ],
        }
