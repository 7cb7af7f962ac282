"""
Expected payoffs of mixed profiles: exact tensor contraction for explicit
games and a seeded Monte-Carlo estimator for any game.
"""

import logging
import math
from typing import Tuple

import numpy as np

from games.base_game import BaseGame
from games.explicit_game import ExplicitGame
from settings.tolerances import Defaults, Guards
from src.seeding import derive_rng
from src.strategies import GuardError, MixedProfile

logger = logging.getLogger(__name__)


def expected_payoff_exact(game: ExplicitGame, profile: MixedProfile, i: int) -> float:
    """Sum over all m^n pure profiles of (product of probabilities) * u_i."""
    game.check_profile(profile)
    game.check_player(i)
    if game.m ** game.n > Guards.EXACT_PROFILES:
        raise GuardError(f"{game.m}^{game.n} profiles exceed the exact guard {Guards.EXACT_PROFILES}")
    result = game.tensor(i)
    for j in reversed(range(game.n)):
        result = np.tensordot(result, profile.probs(j), axes=([j], [0]))
    return float(result)


def hoeffding_halfwidth(samples: int) -> float:
    """99% Hoeffding half-width for the mean of [0, 1] samples."""
    return math.sqrt(Defaults.MC_CONFIDENCE_LOG / (2 * samples))


def sample_actions(profile: MixedProfile, players, samples: int, rng: np.random.Generator) -> np.ndarray:
    """(samples x len(players)) independent draws, one column per player."""
    draws = np.empty((samples, len(players)), dtype=np.int64)
    for column, j in enumerate(players):
        cumulative = np.cumsum(profile.probs(j))
        draws[:, column] = np.minimum(
            np.searchsorted(cumulative, rng.random(samples), side="right"), profile.m - 1
        )
    return draws


def expected_payoff_mc(
    game: BaseGame, profile: MixedProfile, i: int, samples: int, seed: int
) -> Tuple[float, float]:
    """
    Mean of i.i.d. sampled payoffs of player i and the 99% Hoeffding half-width.
    Only the players relevant to u_i are sampled.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    game.check_profile(profile)
    game.check_player(i)
    players = list(game.relevant_players(i))
    rng = derive_rng(seed, "expected_payoff_mc", i)
    draws = sample_actions(profile, players, samples, rng)
    sparse = not game.is_enumerable
    base = None if sparse else [0] * game.n
    total = 0.0
    for row in draws:
        if sparse:
            actions = dict(zip(players, row.tolist()))
        else:
            for j, a in zip(players, row.tolist()):
                base[j] = a
            actions = base
        total += game.payoff(i, actions)
    estimate = total / samples
    logger.debug("MC payoff of player %d: %.6f over %d samples", i, estimate, samples)
    return estimate, hoeffding_halfwidth(samples)


def deviation_payoffs_mc(game: BaseGame, profile: MixedProfile, i: int, samples: int, seed: int) -> np.ndarray:
    """
    Monte-Carlo estimate of u_i(a', x_{-i}) for every action a', sharing the
    same opponent draws across actions.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    game.check_profile(profile)
    game.check_player(i)
    opponents = [j for j in game.relevant_players(i) if j != i]
    rng = derive_rng(seed, "deviation_payoffs_mc", i)
    draws = sample_actions(profile, opponents, samples, rng)
    totals = np.zeros(game.m)
    for row in draws:
        actions = dict(zip(opponents, row.tolist()))
        if game.is_enumerable:
            full = [0] * game.n
            for j, a in actions.items():
                full[j] = a
            actions = full
        totals += game.deviation_row(i, actions)
    return totals / samples
