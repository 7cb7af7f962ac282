"""
Combinatorial discrepancy of 0/1 matrices and the correspondence between
low-discrepancy colorings and near-half equilibria of majority
matching-pennies games.

Colorings are +/-1 vectors. Column colorings chi multiply the columns of M;
row colorings chi' multiply the rows.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from games.majority_mp_game import MajorityMPGame
from settings.tolerances import Defaults, Guards, Tolerances
from src.constructions import balance_ratio
from src.kernels import signed_sum_dist
from src.seeding import derive_rng
from src.strategies import DimensionError, GuardError, KUniformStrategy, MixedProfile

logger = logging.getLogger(__name__)

EXACT = "exact"
BECK_FIALA = "beck-fiala"

CHUNK_BITS = 16


@dataclass(frozen=True)
class DiscReport:
    value: int
    coloring: Tuple[int, ...]
    row_sums: Tuple[int, ...]
    method: str
    restarts: int = 0

    def to_dict(self) -> Dict:
        return {
            "disc": self.value,
            "coloring": list(self.coloring),
            "row_sums": list(self.row_sums),
            "method": self.method,
            "restarts": self.restarts,
        }


def _as_matrix(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise DimensionError("Discrepancy needs a non-empty 2-D matrix")
    if not np.isin(matrix, (0, 1)).all():
        raise ValueError("Matrix entries must be 0 or 1")
    return matrix


def report_for(matrix, coloring: Sequence[int], method: str, restarts: int = 0) -> DiscReport:
    sums = np.asarray(matrix) @ np.asarray(coloring, dtype=np.int64)
    return DiscReport(int(np.abs(sums).max()), tuple(int(c) for c in coloring),
                      tuple(int(s) for s in sums), method, restarts)


# Exact


def _signs(indices: np.ndarray, m: int) -> np.ndarray:
    """Coloring per index: bit m-1-j set means chi_j = +1, so integer order is lexicographic."""
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((indices[:, None] >> shifts[None, :]) & 1) * 2 - 1


def _disc_chunk(matrix: np.ndarray, start: int, stop: int) -> Tuple[int, int]:
    indices = np.arange(start, stop, dtype=np.int64)
    values = np.abs(_signs(indices, matrix.shape[1]) @ matrix.T).max(axis=1)
    best = int(np.argmin(values))
    return int(values[best]), start + best


def disc_exact(matrix, threads: int = 1) -> DiscReport:
    """
    min over chi of max |(M chi)_i|. chi and -chi give the same value, so only
    chi_0 = -1 is scanned; ties go to the lexicographically smallest chi with
    -1 < +1. The scan stops once the parity bound is met.
    """
    matrix = _as_matrix(matrix)
    m = matrix.shape[1]
    if m > Guards.DISC_COLUMNS:
        raise GuardError(f"Exact discrepancy scans 2^{m - 1} colorings; the guard is {Guards.DISC_COLUMNS} columns")
    floor = int((matrix.sum(axis=1) % 2).any())
    total = 1 << (m - 1)
    step = 1 << CHUNK_BITS
    ranges = [(start, min(start + step, total)) for start in range(0, total, step)]
    best = (None, None)

    def merge(results):
        nonlocal best
        for value, index in results:
            if best[0] is None or (value, index) < best:
                best = (value, index)

    if threads <= 1:
        for start, stop in ranges:
            merge([_disc_chunk(matrix, start, stop)])
            if best[0] == floor:
                break
    else:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            for batch in range(0, len(ranges), threads):
                window = ranges[batch:batch + threads]
                merge(executor.map(partial(_disc_chunk, matrix), [r[0] for r in window], [r[1] for r in window]))
                if best[0] == floor:
                    break
    coloring = _signs(np.array([best[1]], dtype=np.int64), m)[0]
    logger.debug("disc of %dx%d matrix is %d", matrix.shape[0], m, best[0])
    return report_for(matrix, coloring, EXACT)


# Beck-Fiala


def beck_fiala_color(matrix, t: Optional[int] = None) -> DiscReport:
    """
    Floating colors start at 0 and move inside the kernel of the active rows
    (rows with more than t floating columns) until one more color reaches
    +/-1. Every row ends with |sum| < 2t.
    """
    matrix = _as_matrix(matrix).astype(float)
    n, m = matrix.shape
    degree = int(matrix.sum(axis=0).max())
    t = degree if t is None else t
    if t < degree:
        raise ValueError(f"Declared t={t} is below the largest column sum {degree}")
    x = np.zeros(m)
    restarts = 0
    retired = np.zeros(n, dtype=bool)
    while True:
        floating = np.flatnonzero(np.abs(x) < 1 - Tolerances.PROBABILITY_COMPUTED)
        if floating.size == 0:
            break
        counts = matrix[:, floating].sum(axis=1)
        active = np.flatnonzero((counts > t) & ~retired)
        if active.size:
            basis = null_space(matrix[np.ix_(active, floating)])
        else:
            basis = np.eye(floating.size)
        if basis.shape[1] == 0:
            # degenerate active set: retire the row with the fewest floating columns
            retired[active[np.argmin(counts[active])]] = True
            restarts += 1
            logger.warning("Beck-Fiala degenerate step; retired a row (%d so far)", restarts)
            continue
        y = basis[:, 0]
        y = y * np.sign(y[np.flatnonzero(np.abs(y) > Tolerances.PROBABILITY_COMPUTED)[0]])
        current = x[floating]
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = np.where(y > 0, (1 - current) / y, np.where(y < 0, (-1 - current) / y, np.inf))
        x[floating] = current + steps.min() * y
        x[np.abs(x - 1) <= Tolerances.PROBABILITY_COMPUTED] = 1.0
        x[np.abs(x + 1) <= Tolerances.PROBABILITY_COMPUTED] = -1.0
    coloring = np.where(x >= 0, 1, -1)
    return report_for(matrix.astype(np.int64), coloring, BECK_FIALA, restarts)


# Colorings and profiles


def coloring_to_profile(chi_cols: Sequence[int], chi_rows: Sequence[int], k: int) -> MixedProfile:
    """
    Row players first, then columns; each plays +1 (action index 0) with
    probability (k + chi) / (2k).
    """
    if k < 3 or k % 2 == 0:
        raise ValueError(f"k must be odd and at least 3, got {k}")
    signs = list(chi_rows) + list(chi_cols)
    if any(c not in (-1, 1) for c in signs):
        raise ValueError("Colorings hold +1/-1 entries only")
    return MixedProfile(tuple(KUniformStrategy((k + c, k - c), 2 * k) for c in signs))


def profile_to_coloring(profile: MixedProfile, k: int, rows: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Inverse of coloring_to_profile; returns (chi_cols, chi_rows)."""
    if not 0 <= rows <= profile.n:
        raise DimensionError(f"{rows} row players in a profile of {profile.n}")
    high, low = (k + 1) / (2 * k), (k - 1) / (2 * k)
    signs = []
    for i in range(profile.n):
        plus = profile.probs(i)[0]
        if abs(plus - high) <= Tolerances.GRID_COORDINATE:
            signs.append(1)
        elif abs(plus - low) <= Tolerances.GRID_COORDINATE:
            signs.append(-1)
        else:
            raise ValueError(f"Player {i} plays +1 with probability {plus}, off the two-point grid for k={k}")
    return tuple(signs[rows:]), tuple(signs[:rows])


def odd_grid_k(alpha: float, constant: float) -> int:
    """Smallest odd integer >= 3 * alpha * constant, and at least 3."""
    k = max(3, math.ceil(3 * alpha * constant - Tolerances.GRID_COORDINATE))
    return k if k % 2 else k + 1


# Equivalence harness


class TwoPointRegrets:
    """
    +/-1 scale regrets of every player at two-point grid profiles. A player's
    neighbour sum only depends on how many neighbours sit at (k+1)/(2k), so
    E[sign] is tabulated per (degree, count).
    """

    def __init__(self, matrix: np.ndarray, k: int):
        self.matrix = matrix
        self.k = k
        self.rows, self.cols = matrix.shape
        self.n = self.rows + self.cols
        self.neighbours = [np.flatnonzero(matrix[i]) + self.rows for i in range(self.rows)]
        self.neighbours += [np.flatnonzero(matrix[:, j]) for j in range(self.cols)]
        self.degrees = np.array([nb.size for nb in self.neighbours])
        high, low = (k + 1) / (2 * k), (k - 1) / (2 * k)
        width = int(self.degrees.max()) + 1
        self.table = np.zeros((width, width))
        for d in range(1, width):
            for c in range(d + 1):
                self.table[d, c] = signed_sum_dist([high] * c + [low] * (d - c)).sign_expectation()
        self.is_row = np.arange(self.n) < self.rows

    def regrets(self, signs: np.ndarray, counts: np.ndarray, players=slice(None)) -> np.ndarray:
        """signs: chi per player; counts: neighbours with chi = +1."""
        plus = self.table[self.degrees[players], counts[players]]
        own = signs[players] / self.k
        return np.where(self.is_row[players], np.abs(plus) - own * plus, np.abs(plus) + own * plus)

    def counts(self, signs: np.ndarray) -> np.ndarray:
        up = (signs > 0).astype(np.int64)
        return np.concatenate([self.matrix @ up[self.rows:], self.matrix.T @ up[: self.rows]])


@dataclass
class EquivalenceReport:
    direction: str
    alpha: float
    t: int
    k: int
    threshold: float
    data: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "anchor": f"coloring-equilibrium-{self.direction}",
            "direction": self.direction,
            "alpha": self.alpha,
            "t": self.t,
            "k": self.k,
            "threshold": self.threshold,
            **self.data,
        }


def _check_balance(matrix: np.ndarray, alpha: Optional[float]) -> float:
    measured = balance_ratio(matrix)
    if alpha is None:
        return measured
    if measured > alpha + Tolerances.GRID_COORDINATE:
        raise ValueError(f"Matrix is only {measured:.4g}-balanced, not {alpha}-balanced")
    return float(alpha)


def forward_report(matrix, alpha: Optional[float] = None, k: Optional[int] = None, threads: int = 1) -> EquivalenceReport:
    """
    Low-discrepancy colorings of M and M^T give a near-half profile; report
    every player's exact +/-1 regret there against the threshold.
    """
    matrix = _as_matrix(matrix)
    alpha = _check_balance(matrix, alpha)
    t = int(matrix[0].sum())
    columns = disc_exact(matrix, threads)
    rows = disc_exact(matrix.T, threads)
    constant = max(columns.value, rows.value) / math.sqrt(t)
    k = k if k is not None else odd_grid_k(alpha, constant)
    game = MajorityMPGame(matrix)
    profile = coloring_to_profile(columns.coloring, rows.coloring, k)
    regrets = [game.signed_regret(i, profile) for i in range(game.n)]
    threshold = Defaults.CORRESPONDENCE_THRESHOLD
    worst = max(regrets)
    logger.info("Forward harness: k=%d, max regret %.4f", k, worst)
    return EquivalenceReport("forward", alpha, t, k, threshold, {
        "constant": constant,
        "disc_columns": columns.to_dict(),
        "disc_rows": rows.to_dict(),
        "regrets": regrets,
        "max_regret": worst,
        "satisfied": worst <= threshold + Tolerances.REGRET,
    })


def _record(matrix: np.ndarray, signs: np.ndarray, rows: int, bound: float, found: Dict):
    chi_cols = signs[rows:]
    chi_rows = signs[:rows]
    norm = int(np.abs(matrix @ chi_cols).max())
    found["profiles"] += 1
    found["max_norm"] = max(found["max_norm"], norm)
    found["max_row_norm"] = max(found["max_row_norm"], int(np.abs(matrix.T @ chi_rows).max()))
    if norm > bound + Tolerances.GRID_COORDINATE:
        found["violations"] += 1
    if len(found["examples"]) < 10:
        found["examples"].append({"chi_cols": chi_cols.tolist(), "chi_rows": chi_rows.tolist(), "norm": norm})


def reverse_report(
    matrix,
    k: int,
    alpha: Optional[float] = None,
    budget: int = 2 ** 16,
    samples: int = Defaults.REVERSE_SAMPLES,
    seed: int = 0,
) -> EquivalenceReport:
    """
    Scan two-point grid profiles for threshold-Nash profiles and check the
    coloring read off each one against ||M chi|| <= k sqrt(alpha t). All
    2^(n+m) profiles are visited in Gray-code order when that fits the
    budget; otherwise ``samples`` seeded random profiles are checked.
    """
    matrix = _as_matrix(matrix)
    if k < 3 or k % 2 == 0:
        raise ValueError(f"k must be odd and at least 3, got {k}")
    alpha = _check_balance(matrix, alpha)
    t = int(matrix[0].sum())
    bound = k * math.sqrt(alpha * t)
    threshold = Defaults.CORRESPONDENCE_THRESHOLD + Tolerances.REGRET
    harness = TwoPointRegrets(matrix, k)
    found = {"profiles": 0, "violations": 0, "max_norm": 0, "max_row_norm": 0, "examples": []}
    players = harness.n
    exhaustive = 2 ** players <= budget
    if exhaustive:
        signs = -np.ones(players, dtype=np.int64)
        counts = harness.counts(signs)
        regrets = harness.regrets(signs, counts)
        scanned = 2 ** players
        for step in range(scanned):
            if step:
                flipped = (step & -step).bit_length() - 1
                signs[flipped] = -signs[flipped]
                touched = harness.neighbours[flipped]
                counts[touched] += 1 if signs[flipped] > 0 else -1
                touched = np.append(touched, flipped)
                regrets[touched] = harness.regrets(signs, counts, touched)
            if regrets.max() <= threshold:
                _record(matrix, signs, harness.rows, bound, found)
    else:
        rng = derive_rng(seed, "reverse_report", k)
        scanned = samples
        for _ in range(samples):
            signs = rng.integers(0, 2, size=players) * 2 - 1
            if harness.regrets(signs, harness.counts(signs)).max() <= threshold:
                _record(matrix, signs, harness.rows, bound, found)
    logger.info("Reverse harness: %d threshold-Nash profiles, %d violations", found["profiles"], found["violations"])
    return EquivalenceReport("reverse", alpha, t, k, Defaults.CORRESPONDENCE_THRESHOLD, {
        "mode": "exhaustive" if exhaustive else "sampled",
        "scanned": scanned,
        "bound": bound,
        **found,
    })


def equivalence_report(
    matrix,
    alpha: Optional[float] = None,
    k: Optional[int] = None,
    direction: str = "forward",
    budget: int = 2 ** 16,
    samples: int = Defaults.REVERSE_SAMPLES,
    seed: int = 0,
    threads: int = 1,
) -> EquivalenceReport:
    if direction == "forward":
        return forward_report(matrix, alpha, k, threads)
    if direction == "reverse":
        if k is None:
            k = forward_report(matrix, alpha, None, threads).k
        return reverse_report(matrix, k, alpha, budget, samples, seed)
    raise ValueError(f"Unknown direction {direction!r}")
