"""
Internal-regret matching dynamics, hitting times to approximate correlated
equilibrium, and the support audit for the XOR game.

Each player runs one regret-matching expert per recommended action and plays
the stationary distribution of the experts' switching matrix, so the
empirical distribution of play has vanishing internal regret.
"""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np

from games.base_game import BaseGame
from games.xor_ir_game import XorIrGame
from settings.tolerances import Defaults, Tolerances
from src.constructions import violated_player_for_law
from src.seeding import derive_rng, derive_seed
from src.strategies import GuardError, KUniformDistribution

logger = logging.getLogger(__name__)

MIXING = 1e-12


@dataclass
class PlayTrace:
    """Rounds of play with the realised internal-regret accumulators."""

    seed: int
    rounds: np.ndarray
    accumulators: np.ndarray
    max_internal_regret: np.ndarray

    @property
    def length(self) -> int:
        return int(self.rounds.shape[0])

    def prefix_distribution(self, t: int) -> KUniformDistribution:
        """Empirical distribution of the first t rounds."""
        if not 1 <= t <= self.length:
            raise ValueError(f"Prefix length {t} outside [1, {self.length}]")
        return KUniformDistribution(self.rounds[:t])

    def empirical_distribution(self) -> KUniformDistribution:
        return self.prefix_distribution(self.length)

    def hitting_time(self, epsilon: float) -> Optional[int]:
        """First t whose prefix has internal regret <= epsilon for every player."""
        hits = np.flatnonzero(self.max_internal_regret <= epsilon + Tolerances.REGRET)
        return int(hits[0]) + 1 if hits.size else None


def switching_matrices(regrets: np.ndarray) -> np.ndarray:
    """Row j of player i's matrix is proportional to the positive part of regrets[i, j]."""
    positive = np.maximum(regrets, 0.0)
    totals = positive.sum(axis=2, keepdims=True)
    m = regrets.shape[2]
    return np.where(totals > 0, positive / np.where(totals > 0, totals, 1.0), 1.0 / m)


def stationary(matrices: np.ndarray) -> np.ndarray:
    """Stationary distribution p = p Q of each player's switching matrix."""
    count, m, _ = matrices.shape
    if m == 1:
        return np.ones((count, 1))
    if m == 2:
        a = matrices[:, 0, 1]
        b = matrices[:, 1, 0]
        total = a + b
        safe = np.where(total > 0, total, 1.0)
        return np.where(total[:, None] > 0, np.column_stack([b, a]) / safe[:, None], 0.5)
    mixed = (1 - MIXING) * matrices + MIXING / m
    system = np.transpose(mixed, (0, 2, 1)) - np.eye(m)[None, :, :]
    system[:, -1, :] = 1.0
    rhs = np.zeros((count, m))
    rhs[:, -1] = 1.0
    probs = np.linalg.solve(system, rhs[:, :, None])[:, :, 0]
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum(axis=1, keepdims=True)


def run_regret_matching(game: BaseGame, T: int, seed: int) -> PlayTrace:
    """T rounds of internal-regret matching, deterministic per seed."""
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    if not game.is_enumerable:
        raise GuardError(f"Regret matching needs a full deviation table; the game has {game.n} players")
    n, m = game.n, game.m
    rng = derive_rng(seed, "run_regret_matching")
    expert_regrets = np.zeros((n, m, m))
    accumulators = np.zeros((n, m, m))
    rounds = np.empty((T, n), dtype=np.int64)
    max_internal = np.empty(T)
    players = np.arange(n)
    for t in range(T):
        matrices = switching_matrices(expert_regrets)
        probs = stationary(matrices)
        cumulative = np.cumsum(probs, axis=1)
        draws = rng.random(n)
        actions = np.minimum((draws[:, None] >= cumulative).sum(axis=1), m - 1)
        table = game.deviation_table(actions)
        switched = np.einsum("ijl,il->ij", matrices, table)
        expert_regrets += probs[:, :, None] * (table[:, None, :] - switched[:, :, None])
        accumulators[players, actions, :] += table - table[players, actions][:, None]
        rounds[t] = actions
        per_player = np.maximum(accumulators.max(axis=2), 0.0).sum(axis=1) / (t + 1)
        max_internal[t] = per_player.max()
        if (t + 1) % 1000 == 0:
            logger.debug("Round %d: max internal regret %.5f", t + 1, max_internal[t])
    return PlayTrace(seed, rounds, accumulators, max_internal)


def _trace_for(game: BaseGame, T: int, seed: int) -> PlayTrace:
    return run_regret_matching(game, T, seed)


def run_trials(game: BaseGame, T: int, seeds: Sequence[int], threads: int = 1) -> List[PlayTrace]:
    """One trace per seed, returned in seed order."""
    if threads <= 1:
        return [run_regret_matching(game, T, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(partial(_trace_for, game, T), seeds))


def trial_seeds(seed: int, trials: int) -> List[int]:
    return [derive_seed(seed, "dynamics-trial", trial) for trial in range(trials)]


@dataclass(frozen=True)
class HittingTime:
    trial: int
    seed: int
    t_hit: Optional[int]
    t_max: int

    @property
    def censored(self) -> bool:
        return self.t_hit is None


def convergence_time(
    game: BaseGame, epsilon: float, t_max: int, trials: int, seed: int, threads: int = 1
) -> List[HittingTime]:
    """Per trial, the first T at which the empirical distribution is an epsilon-CE; None if censored."""
    seeds = trial_seeds(seed, trials)
    traces = run_trials(game, t_max, seeds, threads)
    times = [HittingTime(i, s, trace.hitting_time(epsilon), t_max) for i, (s, trace) in enumerate(zip(seeds, traces))]
    logger.info("Convergence at epsilon=%g: %d of %d trials hit", epsilon, sum(not h.censored for h in times), trials)
    return times


def hitting_times_csv(times: Sequence[HittingTime]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["trial", "seed", "t_hit", "censored"])
    for h in times:
        writer.writerow([h.trial, h.seed, "" if h.t_hit is None else h.t_hit, int(h.censored)])
    return buffer.getvalue()


# Support audit


@dataclass
class AuditReport:
    """
    Prefixes whose outcome support is at most 2^kappa / 4 carry a player paid at
    most 1/4 while its individually rational level is 1/2. Such a prefix is not
    1/4-individually rational and so not a 1/4-correlated equilibrium.
    """

    kappa: int
    support_bound: int
    threshold: float
    checked: int = 0
    certified: int = 0
    skipped: int = 0
    failures: List[int] = field(default_factory=list)
    certificates: List[Dict] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return self.checked == self.certified

    def to_dict(self) -> Dict:
        return {
            "anchor": "support-lower-bound-audit",
            "kappa": self.kappa,
            "support_bound": self.support_bound,
            "threshold": self.threshold,
            "checked": self.checked,
            "sound": self.sound,
            "certified": self.certified,
            "skipped": self.skipped,
            "failures": self.failures,
            "certificates": self.certificates,
            "implication": "payoff below 1/2 - 1/4 => not 1/4-individually rational => not a 1/4-correlated equilibrium",
        }


def support_lower_bound_audit(
    game: XorIrGame, trace: PlayTrace, threshold: float = Defaults.AUDIT_THRESHOLD
) -> AuditReport:
    """
    Certify every prefix of the trace whose law of f has small support. The
    support only grows with the prefix, so the scan stops at the first prefix
    over the bound.
    """
    if not isinstance(game, XorIrGame):
        raise TypeError(f"The support audit runs on XOR games, got {game.family}")
    bound = game.size // 4
    report = AuditReport(game.kappa, bound, threshold)
    outcomes = game.outcomes(trace.rounds)
    histogram = np.zeros(game.size)
    for t, x in enumerate(outcomes.tolist(), start=1):
        histogram[x] += 1
        if np.count_nonzero(histogram) > bound:
            report.skipped = trace.length - t + 1
            break
        report.checked += 1
        certificate = violated_player_for_law(game, histogram / t, threshold)
        # replay the certificate against the realised outcomes
        replayed = float(np.mean(game.in_half_set(certificate.player, outcomes[:t])))
        if certificate.found and replayed <= threshold + Tolerances.PROBABILITY_COMPUTED:
            report.certified += 1
            entry = certificate.to_dict()
            entry["prefix"] = t
            entry["replayed_payoff"] = replayed
            report.certificates.append(entry)
        else:
            report.failures.append(t)
            logger.warning("Prefix %d has support within the bound but no certificate", t)
    return report
