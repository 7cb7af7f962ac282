"""
Exact probability kernels: Poisson-binomial counts, signed sums of
independent +/-1 variables, and XOR pushforwards of independent bits.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from settings.tolerances import Guards, Tolerances
from src.strategies import GuardError


def _check_probabilities(probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if np.any(probs < 0) or np.any(probs > 1):
        raise ValueError("Every probability must lie in [0, 1]")
    return probs


def poisson_binomial_pmf(probs: Sequence[float]) -> np.ndarray:
    """
    Distribution of the number of successes among independent Bernoulli trials.
    Entry c is P(count = c); computed by incremental convolution in O(t^2).
    """
    probs = _check_probabilities(probs)
    pmf = np.ones(1)
    for p in probs:
        nxt = np.zeros(pmf.size + 1)
        nxt[:-1] += pmf * (1.0 - p)
        nxt[1:] += pmf * p
        pmf = nxt
    return pmf


@dataclass(frozen=True)
class SignedSumDistribution:
    """
    Exact law of S = sum of t independent +/-1 variables.

    ``count_pmf[c]`` is P(exactly c terms equal +1), so S = 2c - t and the
    support is {-t, -t+2, ..., t}.
    """

    count_pmf: np.ndarray

    def __post_init__(self):
        pmf = np.array(self.count_pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise ValueError("count_pmf must be a non-empty vector")
        if np.any(pmf < -Tolerances.PROBABILITY_COMPUTED):
            raise ValueError("Negative probability in signed-sum distribution")
        if abs(pmf.sum() - 1.0) > Tolerances.PROBABILITY_COMPUTED:
            raise ValueError(f"Signed-sum pmf sums to {pmf.sum()!r}")
        pmf.setflags(write=False)
        object.__setattr__(self, "count_pmf", pmf)

    @property
    def t(self) -> int:
        return int(self.count_pmf.size - 1)

    @property
    def support(self) -> np.ndarray:
        return np.arange(-self.t, self.t + 1, 2)

    def prob(self, total: int) -> float:
        if (total + self.t) % 2 or abs(total) > self.t:
            return 0.0
        return float(self.count_pmf[(total + self.t) // 2])

    def as_dict(self) -> dict:
        return {int(s): float(p) for s, p in zip(self.support, self.count_pmf)}

    @property
    def p_positive(self) -> float:
        return float(self.count_pmf[self.support > 0].sum())

    @property
    def p_zero(self) -> float:
        return float(self.count_pmf[self.support == 0].sum())

    @property
    def p_negative(self) -> float:
        return float(self.count_pmf[self.support < 0].sum())

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.count_pmf))

    @property
    def variance(self) -> float:
        return float(np.dot(self.support.astype(float) ** 2, self.count_pmf) - self.mean ** 2)

    def sign_expectation(self) -> float:
        """E[sign(S)] = P(S > 0) - P(S < 0)."""
        return self.p_positive - self.p_negative


def signed_sum_dist(probs: Sequence[float]) -> SignedSumDistribution:
    """Exact pmf of a sum of independent +/-1 variables, probs[j] = P(term j is +1)."""
    return SignedSumDistribution(poisson_binomial_pmf(probs))


def bits_to_label(bits: Sequence[int]) -> int:
    """Binary vector to integer; the first coordinate is the most significant bit."""
    label = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError(f"Binary vectors hold 0/1 entries, got {bit!r}")
        label = (label << 1) | int(bit)
    return label


def label_to_bits(label: int, kappa: int) -> tuple:
    return tuple((label >> (kappa - 1 - j)) & 1 for j in range(kappa))


def xor_pushforward(strategies: Sequence[float], labels, kappa: int = None) -> np.ndarray:
    """
    Exact law of the XOR of labels[i] over the players that play 1, when player i
    plays 1 independently with probability strategies[i].

    ``labels`` holds either binary vectors (kappa inferred from their length) or
    integer labels together with an explicit ``kappa``. The result has length
    2^kappa and is indexed by integer label.
    """
    q = _check_probabilities(strategies)
    labels = list(labels)
    if len(labels) != q.size:
        raise ValueError(f"{q.size} probabilities but {len(labels)} labels")
    if labels and not isinstance(labels[0], (int, np.integer)):
        if kappa is None:
            kappa = len(labels[0])
        labels = [bits_to_label(v) for v in labels]
    if kappa is None:
        raise ValueError("kappa is required with integer labels")
    if kappa > Guards.XOR_DIMENSION:
        raise GuardError(f"kappa={kappa} exceeds the XOR guard {Guards.XOR_DIMENSION}")
    size = 1 << kappa
    index = np.arange(size)
    dist = np.zeros(size)
    dist[0] = 1.0
    for p, s in zip(q, labels):
        s = int(s)
        if s < 0 or s >= size:
            raise ValueError(f"Label {s} outside [0, 2^{kappa})")
        if p == 0.0:
            continue
        dist = (1.0 - p) * dist + p * dist[index ^ s]
    return dist
