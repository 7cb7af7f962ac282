"""
Sampling k-uniform strategies and distributions from exact equilibria, the
k bounds that make sampling succeed, and the product concentration check.
"""

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from games.base_game import BaseGame
from settings.tolerances import Defaults, Guards, Tolerances
from src.seeding import derive_rng, derive_seed
from src.strategies import (
    CorrelatedDistribution,
    GuardError,
    KUniformDistribution,
    KUniformStrategy,
    MixedProfile,
    PureProfile,
    Strategy,
)
from src.verify import check_weak_ce, check_weak_nash

logger = logging.getLogger(__name__)

FOUND = "found"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SamplingBudget:
    epsilon: float
    delta: float
    m: int
    k: int


def _check_domain(epsilon: float, delta: float, m: int):
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError(f"epsilon and delta must lie in (0, 1), got {epsilon}, {delta}")
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")


def k_bound_weak_nash(epsilon: float, delta: float, m: int) -> int:
    """ceil(32 (ln 8 + ln m - ln epsilon - ln delta) / epsilon^2)"""
    _check_domain(epsilon, delta, m)
    return math.ceil(32 * (math.log(8) + math.log(m) - math.log(epsilon) - math.log(delta)) / epsilon ** 2)


def k_bound_weak_ce(epsilon: float, delta: float, m: int) -> int:
    """ceil(2 (m ln m - ln delta) / epsilon^2)"""
    _check_domain(epsilon, delta, m)
    return math.ceil(2 * (m * math.log(m) - math.log(delta)) / epsilon ** 2)


def sampling_budget(epsilon: float, delta: float, m: int, correlated: bool = False) -> SamplingBudget:
    bound = k_bound_weak_ce if correlated else k_bound_weak_nash
    return SamplingBudget(epsilon, delta, m, bound(epsilon, delta, m))


def concentration_bound(eps_hat: float, k: int) -> float:
    """min(1, 4 exp(-(eps_hat^2 / 8) k) / eps_hat)"""
    return min(1.0, 4 * math.exp(-(eps_hat ** 2 / 8) * k) / eps_hat)


# Product sampling


def sample_k_uniform_strategy(strategy: Strategy, k: int, rng: np.random.Generator) -> KUniformStrategy:
    """Counts of k independent draws from the strategy."""
    probs = np.clip(strategy.probs, 0.0, None)
    counts = rng.multinomial(k, probs / probs.sum())
    return KUniformStrategy(tuple(int(c) for c in counts), k)


def sample_k_uniform_profile(profile: MixedProfile, k: int, seed: int) -> MixedProfile:
    """
    Every listed player is sampled from its own stream. A point-mass default
    strategy stays a point mass; any other default is expanded first.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    default = profile.default
    listed = profile.explicit_count
    if default is not None and not default.is_point_mass():
        if profile.n > Guards.ENUMERABLE_PLAYERS:
            raise GuardError(f"Cannot sample a mixed default strategy for {profile.n} players")
        listed = profile.n
    strategies = tuple(
        sample_k_uniform_strategy(profile[i], k, derive_rng(seed, "sample_k_uniform_profile", i))
        for i in range(listed)
    )
    if listed == profile.n:
        return MixedProfile(strategies)
    pure_default = KUniformStrategy.pure(int(np.argmax(default.probs)), default.m, k)
    return MixedProfile(strategies, pure_default, profile.n)


def sample_correlated_k_uniform(dist: CorrelatedDistribution, k: int, seed: int) -> KUniformDistribution:
    """k independent profiles drawn from the distribution."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    rng = derive_rng(seed, "sample_correlated_k_uniform")
    rows = rng.choice(dist.support_size, size=k, p=dist.weights / dist.weights.sum())
    return KUniformDistribution(dist.profiles[rows])


# Attempt loops


@dataclass(frozen=True)
class AttemptRecord:
    attempt: int
    seed: int
    k: int
    satisfied_fraction: float
    max_regret: float


@dataclass
class SamplingOutcome:
    """Result of a sampling experiment; status is ``found`` or ``exhausted``."""

    status: str
    k: int
    attempts: int
    result: object = None
    best_fraction: float = 0.0
    records: List[AttemptRecord] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def to_dict(self) -> Dict:
        data = {
            "status": self.status,
            "k": self.k,
            "attempts": self.attempts,
            "best_fraction": self.best_fraction,
        }
        if self.result is not None:
            data["result"] = self.result.to_dict()
        return data

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["attempt", "seed", "k", "satisfied_fraction", "max_regret"])
        for record in self.records:
            writer.writerow([record.attempt, record.seed, record.k, repr(record.satisfied_fraction),
                             repr(record.max_regret)])
        return buffer.getvalue()


def _run_attempts(sample, check, k: int, seed: int, max_attempts: int, tag: str) -> SamplingOutcome:
    outcome = SamplingOutcome(EXHAUSTED, k, 0)
    for attempt in range(max_attempts):
        attempt_seed = derive_seed(seed, tag, attempt)
        candidate = sample(attempt_seed)
        ok, report = check(candidate)
        outcome.attempts = attempt + 1
        outcome.best_fraction = max(outcome.best_fraction, report.satisfied_fraction)
        outcome.records.append(
            AttemptRecord(attempt, attempt_seed, k, report.satisfied_fraction, report.max_regret)
        )
        logger.debug("%s attempt %d: satisfied fraction %.4f", tag, attempt, report.satisfied_fraction)
        if ok:
            outcome.status = FOUND
            outcome.result = candidate
            logger.info("%s succeeded on attempt %d with k=%d", tag, attempt + 1, k)
            return outcome
    logger.warning("%s exhausted after %d attempts, best fraction %.4f", tag, max_attempts, outcome.best_fraction)
    return outcome


def weak_nash_by_sampling(
    game: BaseGame,
    exact_equilibrium: MixedProfile,
    epsilon: float,
    delta: float,
    seed: int,
    max_attempts: int = Defaults.MAX_ATTEMPTS,
    players: Optional[Sequence[int]] = None,
    k: Optional[int] = None,
) -> SamplingOutcome:
    """
    Sample k-uniform profiles from an exact equilibrium until one passes the
    weak Nash test. ``k`` defaults to the weak Nash bound.
    """
    k = k if k is not None else k_bound_weak_nash(epsilon, delta, game.m)
    if game.has_exact_kernel:
        ok, report = check_weak_nash(game, exact_equilibrium, 0.0, 0.0, players)
        if not ok:
            raise ValueError(f"Input is not an exact equilibrium: max regret {report.max_regret:.3g}")

    def check(candidate):
        return check_weak_nash(game, candidate, epsilon, delta, players)

    return _run_attempts(
        lambda s: sample_k_uniform_profile(exact_equilibrium, k, s), check, k, seed, max_attempts, "weak_nash"
    )


def weak_ce_by_sampling(
    game: BaseGame,
    exact_ce: CorrelatedDistribution,
    epsilon: float,
    delta: float,
    seed: int,
    max_attempts: int = Defaults.MAX_ATTEMPTS,
    k: Optional[int] = None,
) -> SamplingOutcome:
    k = k if k is not None else k_bound_weak_ce(epsilon, delta, game.m)
    ok, report = check_weak_ce(game, exact_ce, 0.0, 0.0)
    if not ok:
        raise ValueError(f"Input is not an exact correlated equilibrium: max regret {report.max_regret:.3g}")

    def check(candidate):
        return check_weak_ce(game, candidate, epsilon, delta)

    return _run_attempts(
        lambda s: sample_correlated_k_uniform(exact_ce, k, s), check, k, seed, max_attempts, "weak_ce"
    )


def product_distribution(profile: MixedProfile) -> CorrelatedDistribution:
    """The product measure of a small profile as an explicit correlated distribution."""
    supports = [np.flatnonzero(profile.probs(i) > 0) for i in range(profile.n)]
    size = math.prod(len(s) for s in supports)
    if size > Guards.EXACT_PROFILES:
        raise GuardError(f"Product support of {size} profiles exceeds the exact guard")
    pairs = []
    for actions in itertools.product(*supports):
        weight = math.prod(profile.probs(i)[a] for i, a in enumerate(actions))
        pairs.append((actions, weight))
    return CorrelatedDistribution.from_pairs(pairs)


# Concentration


def product_expectation(profile: MixedProfile, f: Callable[[PureProfile], float]) -> float:
    """E[f] under the product measure, by enumeration of the product support."""
    return float(sum(w * f(a) for a, w in product_distribution(profile)))


def concentration_trial(
    strategies: Sequence[Strategy],
    f: Callable[[PureProfile], float],
    eps_hat: float,
    k: int,
    trials: int,
    seed: int,
    expectation: Optional[Callable[[MixedProfile], float]] = None,
) -> float:
    """
    Fraction of trials in which the exact expectation of f under the product
    of empirical k-sample measures is more than eps_hat away from E[f].
    ``expectation`` replaces enumeration when a game kernel is available.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    expectation = expectation or (lambda profile: product_expectation(profile, f))
    base = MixedProfile(tuple(strategies))
    target = expectation(base)
    violations = 0
    for trial in range(trials):
        resampled = sample_k_uniform_profile(base, k, derive_seed(seed, "concentration_trial", trial))
        if abs(expectation(resampled) - target) > eps_hat + Tolerances.PROBABILITY_COMPUTED:
            violations += 1
    frequency = violations / trials
    logger.info("Concentration: %d/%d violations at k=%d, bound %.4g", violations, trials, k,
                concentration_bound(eps_hat, k))
    return frequency
