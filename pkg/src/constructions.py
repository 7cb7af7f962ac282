"""
Game factories for the lower-bound families, balanced random matrices, and
the XOR-game certificate search.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import jsonschema
import numpy as np

from games.explicit_game import ExplicitGame
from games.majority_mp_game import MajorityMPGame
from games.observer_game import ObserverGame
from games.xor_ir_game import XorIrGame
from settings.schemas import DESCRIPTOR_SCHEMA, EXPLICIT_GAME_SCHEMA
from settings.tolerances import Defaults, Guards, Tolerances
from src.kernels import xor_pushforward
from src.seeding import derive_rng
from src.strategies import CorrelatedDistribution, DimensionError, MixedProfile, SpecError

logger = logging.getLogger(__name__)


def observer_game(b: int, w: float = Defaults.OBSERVER_WIDTH) -> ObserverGame:
    return ObserverGame(b, w)


def majority_mp_game(matrix) -> MajorityMPGame:
    return MajorityMPGame(matrix)


def xor_ir_game(kappa: int) -> XorIrGame:
    return XorIrGame(kappa)


def matching_pennies() -> ExplicitGame:
    """Player 0 is paid 1 on a match, player 1 on a mismatch."""
    match = np.array([1.0, 0.0, 0.0, 1.0])
    return ExplicitGame(2, 2, np.concatenate([match, 1.0 - match]))


def random_explicit_game(n: int, m: int, seed: int) -> ExplicitGame:
    """Payoffs drawn uniformly from [0, 1]."""
    if n * m ** n > Guards.EXACT_PROFILES:
        raise DimensionError(f"A random {n}-player {m}-action tensor exceeds the exact guard")
    rng = derive_rng(seed, "random_explicit_game", n, m)
    return ExplicitGame(n, m, rng.random(n * m ** n))


def observer_probability_cap(u_one: float, epsilon: float) -> float:
    """
    Largest probability an observer can put on action 1 in any epsilon-Nash
    profile when action 1 pays u_one < 1/2: regret p * (1/2 - u_one) <= epsilon.
    """
    gap = 0.5 - u_one
    if gap <= 0:
        return 1.0
    return min(1.0, epsilon / gap)


# Balanced matrices


def random_regular_matrix(n: int, m: int, t: int, seed: int) -> np.ndarray:
    """
    n x m 0/1 matrix with every row sum t and every column sum t*n/m, drawn by
    the configuration model with rejection of repeated entries.
    """
    if n < 1 or m < 1 or not 1 <= t <= m:
        raise ValueError(f"Infeasible degrees: n={n}, m={m}, t={t}")
    if (t * n) % m:
        raise ValueError(f"Row degree t={t} with n={n} rows cannot be split evenly over m={m} columns")
    column_degree = t * n // m
    if column_degree > n:
        raise ValueError(f"Column degree {column_degree} exceeds the row count {n}")
    rng = derive_rng(seed, "random_regular_matrix", n, m, t)
    row_stubs = np.repeat(np.arange(n), t)
    col_stubs = np.repeat(np.arange(m), column_degree)
    for attempt in range(Guards.MATRIX_RETRIES):
        cols = rng.permutation(col_stubs)
        matrix = np.zeros((n, m), dtype=np.int64)
        np.add.at(matrix, (row_stubs, cols), 1)
        if matrix.max() == 1:
            logger.debug("Regular %dx%d matrix with t=%d after %d attempts", n, m, t, attempt + 1)
            return matrix
    raise ValueError(f"No simple {n}x{m} matrix with t={t} after {Guards.MATRIX_RETRIES} attempts")


def balance_ratio(matrix) -> float:
    """Smallest alpha for which the matrix is alpha-balanced."""
    matrix = np.asarray(matrix)
    rows = matrix.sum(axis=1)
    cols = matrix.sum(axis=0)
    if rows.min() == 0 or cols.min() == 0:
        raise ValueError("An empty row or column is not balanced for any alpha")
    return float(max(
        rows.max() / rows.min(),
        cols.max() / cols.min(),
        rows.max() / cols.min(),
        cols.max() / rows.min(),
    ))


# XOR-game certificates


@dataclass(frozen=True)
class ViolationCertificate:
    """A player of the XOR game and its exact expected payoff under a distribution."""

    found: bool
    player: int
    s: int
    p: int
    payoff: float
    escape_probability: float

    def to_dict(self) -> Dict:
        return {
            "status": "found" if self.found else "not_found",
            "player": self.player,
            "s": self.s,
            "p": self.p,
            "payoff": self.payoff,
            "escape_probability": self.escape_probability,
        }


def outcome_distribution(game: XorIrGame, dist: Union[CorrelatedDistribution, MixedProfile]) -> np.ndarray:
    """Law of f(a) over {0,1}^kappa as a vector indexed by label."""
    if isinstance(dist, MixedProfile):
        game.check_profile(dist)
        probs_one = [dist.probs(j)[1] for j in range(game.n)]
        return xor_pushforward(probs_one, game.labels.tolist(), game.kappa)
    if dist.n != game.n:
        raise DimensionError(f"Distribution has {dist.n} players, game has {game.n}")
    return game.pushforward(dist)


def _pairs(game: XorIrGame, s: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lower endpoints, upper endpoints and choice-bit ranks of the matching x <-> x ^ s."""
    xs = np.arange(game.size, dtype=np.int64)
    lower = xs[xs < (xs ^ s)]
    upper = lower ^ s
    h = s.bit_length() - 1
    rank = ((lower >> (h + 1)) << h) | (lower & ((1 << h) - 1))
    return lower, upper, rank


def _choice_vector(rank: np.ndarray, take_upper: np.ndarray) -> int:
    return int(sum(1 << int(r) for r in rank[take_upper]))


def find_violated_player(
    game: XorIrGame, dist: Union[CorrelatedDistribution, MixedProfile], threshold: float = Defaults.AUDIT_THRESHOLD
) -> ViolationCertificate:
    """
    For every label s', put into V' the partner of each support point whose
    partner lies outside the support; pairs with both or neither endpoint in
    the support contribute their larger endpoint. s' is the label with the
    largest escape probability P(x ^ s' not in the support), the smallest
    label on ties.
    """
    return violated_player_for_law(game, outcome_distribution(game, dist), threshold)


def violated_player_for_law(
    game: XorIrGame, nu: np.ndarray, threshold: float = Defaults.AUDIT_THRESHOLD
) -> ViolationCertificate:
    """The certificate search of find_violated_player on a given law of f(a)."""
    nu = np.asarray(nu, dtype=float)
    supported = nu > 0
    best = None
    for s in range(1, game.size):
        lower, upper, rank = _pairs(game, s)
        in_lower = supported[lower]
        in_upper = supported[upper]
        take_upper = ~(in_upper & ~in_lower)
        chosen = np.where(take_upper, upper, lower)
        payoff = float(nu[chosen].sum())
        escape = float(nu[supported & ~supported[np.arange(game.size) ^ s]].sum())
        if best is None or escape > best[0] + Tolerances.PROBABILITY_COMPUTED:
            best = (escape, s, _choice_vector(rank, take_upper), payoff)
    escape, s, p, payoff = best
    found = payoff <= threshold + Tolerances.PROBABILITY_COMPUTED
    if not found:
        logger.info("No XOR certificate below %.3f; payoff %.6f at s=%d", threshold, payoff, s)
    return ViolationCertificate(found, game.player_index(s, p), s, p, payoff, escape)


def worst_xor_player(game: XorIrGame, nu: np.ndarray) -> Tuple[int, float]:
    """
    Exact minimum payoff over all players: for each s the best half-set takes
    the lighter endpoint of every pair.
    """
    best = None
    for s in range(1, game.size):
        lower, upper, rank = _pairs(game, s)
        take_upper = nu[upper] <= nu[lower]
        payoff = float(np.minimum(nu[lower], nu[upper]).sum())
        if best is None or payoff < best[1]:
            best = (game.player_index(s, _choice_vector(rank, take_upper)), payoff)
    return best


# Descriptors


def game_from_descriptor(descriptor: Dict):
    """Re-create a game from its descriptor dictionary."""
    try:
        jsonschema.validate(instance=descriptor, schema=DESCRIPTOR_SCHEMA)
        family = descriptor.get("family", "explicit")
        if family == "explicit":
            jsonschema.validate(instance=descriptor, schema=EXPLICIT_GAME_SCHEMA)
            return ExplicitGame(descriptor["n"], descriptor["m"], descriptor["payoffs"])
        if family == "random_explicit":
            return random_explicit_game(int(descriptor["n"]), int(descriptor["m"]), int(descriptor.get("seed", 0)))
        if family == "matching_pennies":
            return matching_pennies()
        if family == "observer":
            return observer_game(int(descriptor["b"]), float(descriptor.get("w", Defaults.OBSERVER_WIDTH)))
        if family == "majority_mp":
            if "matrix" in descriptor:
                return majority_mp_game(descriptor["matrix"])
            matrix = random_regular_matrix(
                int(descriptor["rows"]),
                int(descriptor.get("cols", descriptor["rows"])),
                int(descriptor["t"]),
                int(descriptor.get("seed", 0)),
            )
            return majority_mp_game(matrix)
        return xor_ir_game(int(descriptor["kappa"]))
    except jsonschema.ValidationError as error:
        raise SpecError(f"Invalid game descriptor: {error.message}") from error
    except KeyError as error:
        raise SpecError(f"Game descriptor for {descriptor.get('family')!r} is missing {error}") from error


def _inline_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_inline_descriptor(text: str) -> Dict:
    """'family:key=value,key=value' into a descriptor dictionary."""
    family, _, rest = text.strip().partition(":")
    descriptor: Dict = {"family": family}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise SpecError(f"Malformed descriptor item {item!r} in {text!r}")
        descriptor[key.strip()] = _inline_value(value.strip())
    return descriptor


def game_from_inline(text: str, default_seed: Optional[int] = None):
    descriptor = parse_inline_descriptor(text)
    if default_seed is not None:
        descriptor.setdefault("seed", default_seed)
    return game_from_descriptor(descriptor)
