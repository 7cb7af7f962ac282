"""
Search over k-uniform grids: exhaustive weak-Nash search over every grid
profile and the vertex search on the 1/k cube around a mixed profile.

Scans are split into contiguous index chunks. With several workers the chunks
run in a process pool, and the winner is always the smallest passing index,
so results do not depend on the worker count.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from games.base_game import BaseGame
from settings.tolerances import Defaults, Guards, Tolerances
from src.constructions import observer_probability_cap
from src.seeding import derive_rng
from src.strategies import DimensionError, GuardError, KUniformStrategy, MixedProfile
from src.verify import check_weak_nash, nash_report, satisfies

logger = logging.getLogger(__name__)

FOUND = "found"
NOT_FOUND = "not_found"
NOT_FOUND_IN_BUDGET = "not_found_in_budget"
ALL_FAIL = "all_fail"
INCONCLUSIVE = "inconclusive"

CHUNK_SIZE = 4096


# Parallel scan


def first_passing(task: Callable[[int, int], Optional[int]], total: int, threads: int = 1,
                  chunk_size: int = CHUNK_SIZE) -> Optional[int]:
    """
    Smallest index in [0, total) accepted by ``task``, which scans one
    half-open index range and returns its first hit or None.
    """
    ranges = [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]
    if threads <= 1:
        for start, stop in ranges:
            hit = task(start, stop)
            if hit is not None:
                return hit
        return None
    with ProcessPoolExecutor(max_workers=threads) as executor:
        for batch in range(0, len(ranges), threads):
            window = ranges[batch:batch + threads]
            hits = list(executor.map(task, [r[0] for r in window], [r[1] for r in window]))
            found = [h for h in hits if h is not None]
            if found:
                return min(found)
    return None


# Grid enumeration


def strategy_count(k: int, m: int) -> int:
    return math.comb(k + m - 1, m - 1)


def _compositions(k: int, m: int) -> Iterator[Tuple[int, ...]]:
    if m == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, m - 1):
            yield (first,) + rest


def enumerate_k_uniform(k: int, m: int) -> Iterator[KUniformStrategy]:
    """Every k-uniform strategy over m actions, counts in lexicographic order."""
    if k < 1 or m < 1:
        raise ValueError(f"Need k >= 1 and m >= 1, got k={k}, m={m}")
    if strategy_count(k, m) > Guards.GRID_STRATEGIES:
        raise GuardError(f"C({k + m - 1}, {m - 1}) strategies exceed {Guards.GRID_STRATEGIES}")
    for counts in _compositions(k, m):
        yield KUniformStrategy(counts, k)


class GridIterator:
    """
    Odometer over k-uniform profiles: profile index d_0 + d_1*S + ..., where
    d_i indexes player i's strategy and player 0 varies fastest.
    """

    def __init__(self, n: int, m: int, k: int):
        self.n = n
        self.m = m
        self.k = k
        self.strategies = list(enumerate_k_uniform(k, m))
        self.total = len(self.strategies) ** n

    def __len__(self) -> int:
        return self.total

    def profile_at(self, index: int) -> MixedProfile:
        if not 0 <= index < self.total:
            raise IndexError(f"Grid index {index} outside [0, {self.total})")
        size = len(self.strategies)
        chosen = []
        for _ in range(self.n):
            index, digit = divmod(index, size)
            chosen.append(self.strategies[digit])
        return MixedProfile(tuple(chosen))

    def __iter__(self) -> Iterator[MixedProfile]:
        for index in range(self.total):
            yield self.profile_at(index)


@dataclass(frozen=True)
class GridBound:
    strategies_per_player: int
    profiles: int
    loose_bound: int
    input_size: int
    exponent: float

    def to_dict(self) -> Dict:
        return {
            "strategies_per_player": self.strategies_per_player,
            "profiles": self.profiles,
            "loose_bound": self.loose_bound,
            "input_size": self.input_size,
            "exponent": self.exponent,
        }


def polynomial_grid_bound(n: int, m: int, k: int) -> GridBound:
    """
    Exhaustive search visits at most (k^m)^n profiles, which is N^(m log k / log m)
    for the input size N = n * m^n.
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    per_player = strategy_count(k, m)
    return GridBound(per_player, per_player ** n, (k ** m) ** n, n * m ** n, m * math.log(k) / math.log(m))


# Exhaustive weak Nash


@dataclass
class ScanResult:
    status: str
    scanned: int
    total: int
    profile: Optional[MixedProfile] = None
    index: Optional[int] = None
    report: Optional[object] = None
    elapsed: Optional[float] = None

    def to_dict(self) -> Dict:
        data = {
            "anchor": "exhaustive-grid-search",
            "status": self.status,
            "found": self.status == FOUND,
            "scanned": self.scanned,
            "total": self.total,
            "index": self.index,
            "profile": self.profile.to_dict() if self.profile is not None else None,
        }
        if self.report is not None:
            data["report"] = self.report.to_dict()
        if self.elapsed is not None:
            data["elapsed"] = self.elapsed
        return data


def _scan_grid(game: BaseGame, k: int, epsilon: float, delta: float, start: int, stop: int) -> Optional[int]:
    grid = GridIterator(game.n, game.m, k)
    for index in range(start, stop):
        ok, _ = check_weak_nash(game, grid.profile_at(index), epsilon, delta)
        if ok:
            return index
    return None


def exhaustive_weak_nash(
    game: BaseGame, k: int, epsilon: float, delta: float, budget: int = Defaults.SEARCH_BUDGET, threads: int = 1
) -> ScanResult:
    """First grid profile, in iterator order, passing the (epsilon, delta) weak Nash test."""
    grid = GridIterator(game.n, game.m, k)
    limit = min(grid.total, budget)
    if grid.total > budget:
        logger.warning("Grid of %d profiles exceeds the budget %d; scanning a prefix", grid.total, budget)
    hit = first_passing(partial(_scan_grid, game, k, epsilon, delta), limit, threads)
    if hit is None:
        status = NOT_FOUND if limit == grid.total else NOT_FOUND_IN_BUDGET
        logger.info("Grid search at k=%d: %s after %d profiles", k, status, limit)
        return ScanResult(status, limit, grid.total)
    profile = grid.profile_at(hit)
    _, report = check_weak_nash(game, profile, epsilon, delta)
    logger.info("Grid search at k=%d found profile %d", k, hit)
    return ScanResult(FOUND, hit + 1, grid.total, profile, hit, report)


# Cube search


@dataclass(frozen=True)
class Cube:
    """
    The 1/k cube around a binary-action profile. Vertex 0 takes the corner
    nearest to each coordinate; bit i of a vertex mask moves player i to the
    other corner.
    """

    k: int
    near: Tuple[int, ...]
    far: Tuple[int, ...]

    @classmethod
    def around(cls, coordinates: Sequence[float], k: int) -> "Cube":
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        near, far = [], []
        for x in coordinates:
            c = min(math.floor(k * x + Tolerances.GRID_COORDINATE), k - 1)
            low, high = c, c + 1
            if x * k - low <= high - x * k:
                near.append(low)
                far.append(high)
            else:
                near.append(high)
                far.append(low)
        return cls(k, tuple(near), tuple(far))

    @property
    def dimension(self) -> int:
        return len(self.near)

    def numerators(self, mask: int) -> List[int]:
        return [self.far[i] if (mask >> i) & 1 else self.near[i] for i in range(self.dimension)]

    def vertex(self, mask: int, template: MixedProfile) -> MixedProfile:
        strategies = tuple(KUniformStrategy((self.k - c, c), self.k) for c in self.numerators(mask))
        return MixedProfile(strategies, template.default, template.n)


@dataclass
class CubeResult:
    status: str
    scanned: int
    vertex: Optional[MixedProfile] = None
    mask: Optional[int] = None
    report: Optional[object] = None
    evidence: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "anchor": "cube-vertex-search",
            "status": self.status,
            "scanned": self.scanned,
            "mask": self.mask,
            "vertex": self.vertex.to_dict() if self.vertex is not None else None,
            "report": self.report.to_dict() if self.report is not None else None,
            "evidence": self.evidence,
        }


def _scan_cube(game: BaseGame, cube: Cube, template: MixedProfile, epsilon: float,
               start: int, stop: int) -> Optional[int]:
    for mask in range(start, stop):
        if satisfies(nash_report(game, cube.vertex(mask, template), epsilon).max_regret, epsilon):
            return mask
    return None


def _coordinates(game: BaseGame, x: MixedProfile) -> List[float]:
    if game.m != 2:
        raise DimensionError(f"Cube search needs a binary-action game, got m={game.m}")
    game.check_profile(x)
    return [float(x.probs(i)[1]) for i in range(x.explicit_count)]


def cube_search(
    game: BaseGame,
    x: MixedProfile,
    k: int,
    epsilon: float,
    mode: str = "exhaustive",
    samples: int = 100,
    seed: int = 0,
    threads: int = 1,
) -> CubeResult:
    """
    Look for an epsilon-Nash vertex of the cube around x. Exhaustive mode
    checks all 2^n vertices; sampled mode asks the game for a violation
    certificate at each of ``samples`` random vertices.
    """
    cube = Cube.around(_coordinates(game, x), k)
    if mode == "exhaustive":
        if x.explicit_count != game.n or game.n > Guards.CUBE_EXHAUSTIVE_PLAYERS:
            raise GuardError(f"Exhaustive cube search needs n <= {Guards.CUBE_EXHAUSTIVE_PLAYERS}, got {game.n}")
        total = 2 ** game.n
        hit = first_passing(partial(_scan_cube, game, cube, x, epsilon), total, threads)
        if hit is None:
            logger.info("All %d cube vertices fail at epsilon=%g", total, epsilon)
            return CubeResult(ALL_FAIL, total)
        vertex = cube.vertex(hit, x)
        return CubeResult(FOUND, hit + 1, vertex, hit, nash_report(game, vertex, epsilon))
    if mode != "sampled":
        raise ValueError(f"Unknown cube search mode {mode!r}")
    rng = derive_rng(seed, "cube_search", k)
    evidence = []
    for draw in range(samples):
        bits = rng.integers(0, 2, size=cube.dimension)
        mask = int(sum(1 << i for i in np.flatnonzero(bits)))
        vertex = cube.vertex(mask, x)
        try:
            certificate = dict(game.cube_certificate(vertex, k))
        except ValueError as error:
            evidence.append({"mask": mask, "kind": "no-certificate", "reason": str(error)})
            continue
        certificate["mask"] = mask
        if "payoff_action_one" in certificate:
            certificate["probability_cap"] = observer_probability_cap(certificate["payoff_action_one"], epsilon)
        evidence.append(certificate)
        if certificate["kind"] == "worst-player" and satisfies(certificate["regret"], epsilon):
            return CubeResult(FOUND, draw + 1, vertex, mask, nash_report(game, vertex, epsilon), evidence)
    failed = sum(1 for e in evidence if "regret" in e and not satisfies(e["regret"], epsilon))
    status = ALL_FAIL if failed == samples else INCONCLUSIVE
    logger.info("Sampled cube search: %d/%d vertices refuted", failed, samples)
    return CubeResult(status, samples, evidence=evidence)
