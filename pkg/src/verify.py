"""
Verification of the solution concepts: epsilon-Nash, weak Nash, well-supported
Nash, (weak) correlated and coarse correlated equilibria, and individual
rationality. Nothing here computes an equilibrium.
"""

import csv
import io
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from games.base_game import BaseGame
from games.xor_ir_game import XorIrGame
from settings.tolerances import Guards, Tolerances
from src.constructions import find_violated_player, outcome_distribution, worst_xor_player
from src.payoffs import deviation_payoffs_mc
from src.strategies import CorrelatedDistribution, GuardError, MixedProfile

logger = logging.getLogger(__name__)

EXACT = "exact"
MONTE_CARLO = "mc"
ANALYTIC = "analytic"

# Unique payoff lines above which the m = 2 maximin goes through the LP
CROSSING_LINES = 256


@dataclass(frozen=True)
class RegretReport:
    """Per-player regrets against an epsilon threshold."""

    players: Tuple[int, ...]
    per_player: Tuple[float, ...]
    epsilon: float
    satisfied_fraction: float
    violators: Tuple[int, ...]

    @classmethod
    def build(cls, players: Sequence[int], regrets: Sequence[float], epsilon: float) -> "RegretReport":
        players = tuple(int(p) for p in players)
        regrets = tuple(float(r) for r in regrets)
        violators = tuple(p for p, r in zip(players, regrets) if not satisfies(r, epsilon))
        fraction = 1.0 - len(violators) / len(regrets) if regrets else 1.0
        return cls(players, regrets, float(epsilon), fraction, violators)

    @property
    def max_regret(self) -> float:
        return max(self.per_player) if self.per_player else 0.0

    def to_dict(self) -> Dict:
        return {
            "epsilon": self.epsilon,
            "players": list(self.players),
            "regrets": list(self.per_player),
            "max_regret": self.max_regret,
            "satisfied_fraction": self.satisfied_fraction,
            "violators": list(self.violators),
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["player", "regret", "satisfied"])
        for player, regret in zip(self.players, self.per_player):
            writer.writerow([player, repr(regret), int(satisfies(regret, self.epsilon))])
        return buffer.getvalue()


@dataclass(frozen=True)
class CERegret:
    """Internal (switching-function) and external (constant-function) regret of one player."""

    internal: float
    external: float
    worst_switch: Tuple[int, ...]


@dataclass(frozen=True)
class IRResult:
    satisfied: bool
    worst_player: int
    worst_gap: float
    certificate: Optional[Dict] = None

    def to_dict(self) -> Dict:
        data = {"satisfied": self.satisfied, "worst_player": self.worst_player, "worst_gap": self.worst_gap}
        if self.certificate is not None:
            data["certificate"] = self.certificate
        return data


def satisfies(regret: float, epsilon: float) -> bool:
    return regret <= epsilon + Tolerances.REGRET


def clamp(regret: float) -> float:
    return max(0.0, float(regret))


def audited_players(game: BaseGame, players: Optional[Sequence[int]]) -> Sequence[int]:
    if players is not None:
        players = list(players)
        for i in players:
            game.check_player(i)
        return players
    if not game.is_enumerable:
        raise GuardError(f"{game.family} game has {game.n} players; pass the players to audit")
    return range(game.n)


# Nash


def deviation_values(
    game: BaseGame, profile: MixedProfile, i: int, evaluator: str = EXACT, samples: int = 10 ** 4, seed: int = 0
) -> np.ndarray:
    if evaluator == EXACT:
        return game.deviation_payoffs(i, profile)
    if evaluator == MONTE_CARLO:
        return deviation_payoffs_mc(game, profile, i, samples, seed)
    raise ValueError(f"Unknown evaluator {evaluator!r}")


def nash_regret(
    game: BaseGame, profile: MixedProfile, i: int, evaluator: str = EXACT, samples: int = 10 ** 4, seed: int = 0
) -> float:
    """max_a u_i(a, x_{-i}) - u_i(x), clamped below at 0."""
    values = deviation_values(game, profile, i, evaluator, samples, seed)
    return clamp(values.max() - np.dot(profile.probs(i), values))


def well_supported_regret(game: BaseGame, profile: MixedProfile, i: int) -> float:
    """Largest shortfall of an action in the support of x_i against the best reply."""
    values = game.deviation_payoffs(i, profile)
    support = profile.probs(i) > 0
    return clamp(values.max() - values[support].min())


def nash_report(
    game: BaseGame,
    profile: MixedProfile,
    epsilon: float,
    players: Optional[Sequence[int]] = None,
    evaluator: str = EXACT,
    samples: int = 10 ** 4,
    seed: int = 0,
) -> RegretReport:
    game.check_profile(profile)
    audited = audited_players(game, players)
    regrets = [nash_regret(game, profile, i, evaluator, samples, seed) for i in audited]
    return RegretReport.build(audited, regrets, epsilon)


def _check_thresholds(epsilon: float, delta: float):
    if epsilon < 0 or not 0 <= delta < 1:
        raise ValueError(f"Need epsilon >= 0 and delta in [0, 1), got epsilon={epsilon}, delta={delta}")


def _weak(report: RegretReport, delta: float) -> bool:
    return report.satisfied_fraction >= 1.0 - delta - Tolerances.PROBABILITY_INPUT


def check_weak_nash(
    game: BaseGame,
    profile: MixedProfile,
    epsilon: float,
    delta: float,
    players: Optional[Sequence[int]] = None,
    evaluator: str = EXACT,
    samples: int = 10 ** 4,
    seed: int = 0,
) -> Tuple[bool, RegretReport]:
    """True iff at least a 1 - delta fraction of the audited players is epsilon-best-replying."""
    _check_thresholds(epsilon, delta)
    report = nash_report(game, profile, epsilon, players, evaluator, samples, seed)
    return _weak(report, delta), report


def check_well_supported_nash(
    game: BaseGame, profile: MixedProfile, epsilon: float, players: Optional[Sequence[int]] = None
) -> Tuple[bool, RegretReport]:
    _check_thresholds(epsilon, 0.0)
    game.check_profile(profile)
    audited = audited_players(game, players)
    report = RegretReport.build(audited, [well_supported_regret(game, profile, i) for i in audited], epsilon)
    return not report.violators, report


# Correlated


def _ce_from_rows(rows: np.ndarray, own: np.ndarray, weights: np.ndarray) -> CERegret:
    """rows[s] = u_i(., a_{-i}) at support profile s, own[s] = a_i."""
    m = rows.shape[1]
    realised = rows[np.arange(own.size), own]
    gains = np.zeros((m, m))
    for j in np.unique(own):
        chosen = own == j
        gains[j] = weights[chosen] @ (rows[chosen] - realised[chosen, None])
    # gains[j, j] == 0, so keeping j wins ties
    switch = tuple(j if gains[j].max() <= gains[j, j] else int(np.argmax(gains[j])) for j in range(m))
    internal = sum(gains[j, switch[j]] for j in range(m))
    external = (weights @ rows).max() - weights @ realised
    return CERegret(clamp(internal), clamp(external), switch)


def _check_distribution(game: BaseGame, dist: CorrelatedDistribution):
    if dist.n != game.n:
        raise ValueError(f"Distribution has {dist.n} players, game has {game.n}")
    if dist.profiles.max() >= game.m:
        raise ValueError(f"Distribution uses actions outside [0, {game.m})")


def ce_regret(game: BaseGame, dist: CorrelatedDistribution, i: int) -> CERegret:
    """
    The maximum over switching functions decomposes by recommended action, so
    each recommendation j gets its own best switch.
    """
    game.check_player(i)
    _check_distribution(game, dist)
    rows = np.stack([game.deviation_row(i, a) for a in dist.profiles])
    return _ce_from_rows(rows, dist.profiles[:, i], dist.weights)


def ce_report(
    game: BaseGame, dist: CorrelatedDistribution, epsilon: float, players: Optional[Sequence[int]] = None,
    coarse: bool = False,
) -> RegretReport:
    """Internal (or external when ``coarse``) regrets; all players share one pass over the support."""
    audited = audited_players(game, players)
    _check_distribution(game, dist)
    if players is None:
        stack = np.stack([game.deviation_table(a) for a in dist.profiles])
        results = [_ce_from_rows(stack[:, i, :], dist.profiles[:, i], dist.weights) for i in audited]
    else:
        results = [ce_regret(game, dist, i) for i in audited]
    regrets = [r.external if coarse else r.internal for r in results]
    return RegretReport.build(audited, regrets, epsilon)


def check_weak_ce(
    game: BaseGame, dist: CorrelatedDistribution, epsilon: float, delta: float, players: Optional[Sequence[int]] = None
) -> Tuple[bool, RegretReport]:
    _check_thresholds(epsilon, delta)
    report = ce_report(game, dist, epsilon, players)
    return _weak(report, delta), report


def check_cce(
    game: BaseGame, dist: CorrelatedDistribution, epsilon: float, delta: float = 0.0,
    players: Optional[Sequence[int]] = None,
) -> Tuple[bool, RegretReport]:
    """Weak coarse correlated equilibrium test on external regret."""
    _check_thresholds(epsilon, delta)
    report = ce_report(game, dist, epsilon, players, coarse=True)
    return _weak(report, delta), report


# Individual rationality


def opponent_payoff_lines(game: BaseGame, i: int) -> np.ndarray:
    """(m x profiles) matrix of u_i(a_i, b) over every opponent profile b that matters to i."""
    game.check_player(i)
    opponents = [j for j in game.relevant_players(i) if j != i]
    if game.m ** len(opponents) > Guards.IR_OPPONENT_PROFILES:
        raise GuardError(
            f"Maximin over {game.m}^{len(opponents)} opponent profiles exceeds {Guards.IR_OPPONENT_PROFILES}"
        )
    columns = []
    for combo in itertools.product(range(game.m), repeat=len(opponents)):
        if game.is_enumerable:
            actions = [0] * game.n
            for j, a in zip(opponents, combo):
                actions[j] = a
        else:
            actions = dict(zip(opponents, combo))
        columns.append(game.deviation_row(i, actions))
    return np.column_stack(columns)


def _maximin_two_actions(lines: np.ndarray) -> float:
    """max over q in [0, 1] of min over lines of (1 - q) * u0 + q * u1."""
    u0, u1 = lines
    slopes = u1 - u0
    candidates = [0.0, 1.0]
    for a, b in itertools.combinations(range(u0.size), 2):
        if slopes[a] != slopes[b]:
            q = (u0[b] - u0[a]) / (slopes[a] - slopes[b])
            if 0.0 < q < 1.0:
                candidates.append(q)
    q = np.array(candidates)
    return float((u0[None, :] + q[:, None] * slopes[None, :]).min(axis=1).max())


def _maximin_lp(lines: np.ndarray) -> float:
    """max v subject to x^T U >= v on every column, x in the simplex."""
    m, columns = lines.shape
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    upper = np.hstack([-lines.T, np.ones((columns, 1))])
    equality = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    bounds = [(0, None)] * m + [(None, None)]
    result = linprog(cost, A_ub=upper, b_ub=np.zeros(columns), A_eq=equality, b_eq=[1.0], bounds=bounds,
                     method="highs")
    if not result.success:
        raise ValueError(f"Maximin LP failed: {result.message}")
    return float(-result.fun)


def ir_level(game: BaseGame, i: int, method: str = EXACT) -> float:
    """v_i = max over mixed x_i of min over pure a_{-i} of u_i(x_i, a_{-i})."""
    if method == ANALYTIC:
        declared = game.declared_ir_level(i)
        if declared is None:
            raise ValueError(f"The {game.family} family declares no individually rational level")
        if isinstance(game, XorIrGame) and not game.check_flip_invariant(64, seed=i):
            raise ValueError("Flip invariant failed; the declared level 1/2 does not hold")
        return float(declared)
    if method != EXACT:
        raise ValueError(f"Unknown method {method!r}")
    lines = np.unique(opponent_payoff_lines(game, i), axis=1)
    if game.m == 1:
        return float(lines.min())
    if game.m == 2 and lines.shape[1] <= CROSSING_LINES:
        return _maximin_two_actions(lines)
    return _maximin_lp(lines)


def _ir_level_any(game: BaseGame, i: int) -> float:
    declared = game.declared_ir_level(i)
    return float(declared) if declared is not None else ir_level(game, i, EXACT)


def expected_payoff_any(game: BaseGame, i: int, dist: Union[CorrelatedDistribution, MixedProfile]) -> float:
    if isinstance(dist, MixedProfile):
        return game.expected_payoff(i, dist)
    return game.expected_payoff_correlated(i, dist)


def check_ir(
    game: BaseGame,
    dist: Union[CorrelatedDistribution, MixedProfile],
    epsilon: float,
    players: Optional[Sequence[int]] = None,
) -> IRResult:
    """
    True iff every audited player gets at least v_i - epsilon. The XOR family
    is decided through the outcome law: the certificate search first, then the
    exact minimum over all half-sets.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if isinstance(game, XorIrGame) and players is None:
        level = game.declared_ir_level(0)
        certificate = find_violated_player(game, dist)
        if certificate.payoff - level < -epsilon - Tolerances.REGRET:
            logger.info("IR violated by player %d with payoff %.6f", certificate.player, certificate.payoff)
            return IRResult(False, certificate.player, certificate.payoff - level, certificate.to_dict())
        player, payoff = worst_xor_player(game, outcome_distribution(game, dist))
        return IRResult(payoff - level >= -epsilon - Tolerances.REGRET, player, payoff - level)
    worst_player, worst_gap = -1, float("inf")
    for i in audited_players(game, players):
        gap = expected_payoff_any(game, i, dist) - _ir_level_any(game, i)
        if gap < worst_gap:
            worst_player, worst_gap = i, gap
    return IRResult(worst_gap >= -epsilon - Tolerances.REGRET, int(worst_player), float(worst_gap))
