import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.kernels import (
    bits_to_label,
    label_to_bits,
    poisson_binomial_pmf,
    signed_sum_dist,
    xor_pushforward,
)
from src.strategies import GuardError

probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def enumerate_counts(probs):
    pmf = np.zeros(len(probs) + 1)
    for bits in itertools.product((0, 1), repeat=len(probs)):
        pmf[sum(bits)] += math.prod(p if b else 1 - p for p, b in zip(probs, bits))
    return pmf


class TestPoissonBinomial:
    """Tests for the success-count distribution."""

    def test_ten_thirds_match_enumeration(self):
        """Test ten trials at 1/3 against all 2^10 outcomes."""
        probs = [1 / 3] * 10
        assert np.allclose(poisson_binomial_pmf(probs), enumerate_counts(probs), atol=1e-12)

    def test_empty_input(self):
        """Test that no trials put all mass on zero successes."""
        assert poisson_binomial_pmf([]).tolist() == [1.0]

    def test_rejects_out_of_range(self):
        """Test that probabilities outside [0, 1] raise."""
        with pytest.raises(ValueError):
            poisson_binomial_pmf([0.5, 1.5])

    @given(st.lists(probabilities, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_matches_enumeration(self, probs):
        """Test random trial vectors against enumeration."""
        assert np.allclose(poisson_binomial_pmf(probs), enumerate_counts(probs), atol=1e-12)


class TestSignedSum:
    """Tests for sums of independent +/-1 terms."""

    def test_two_fair_terms(self):
        """Test the law of the sum of two fair signs."""
        dist = signed_sum_dist([0.5, 0.5])
        assert dist.support.tolist() == [-2, 0, 2]
        assert dist.prob(0) == pytest.approx(0.5)
        assert dist.prob(1) == 0.0
        assert dist.prob(4) == 0.0
        assert dist.sign_expectation() == pytest.approx(0.0)

    def test_single_term_sign(self):
        """Test that one term has E[sign] = 2p - 1."""
        assert signed_sum_dist([0.8]).sign_expectation() == pytest.approx(0.6)

    @given(st.lists(probabilities, min_size=1, max_size=10))
    @settings(max_examples=60, deadline=None)
    def test_moments(self, probs):
        """Test mean and variance against the per-term formulas."""
        dist = signed_sum_dist(probs)
        assert dist.mean == pytest.approx(sum(2 * p - 1 for p in probs), abs=1e-9)
        assert dist.variance == pytest.approx(sum(4 * p * (1 - p) for p in probs), abs=1e-9)
        assert dist.p_positive + dist.p_zero + dist.p_negative == pytest.approx(1.0)


class TestXorPushforward:
    """Tests for the law of an XOR of independent labels."""

    def test_labels_and_bits(self):
        """Test that the first coordinate is the most significant bit."""
        assert bits_to_label((1, 0)) == 2
        assert label_to_bits(2, 2) == (1, 0)
        assert bits_to_label((0, 1, 1)) == 3
        with pytest.raises(ValueError):
            bits_to_label((2, 0))

    def test_five_players_match_enumeration(self):
        """Test five players with kappa=2 against all 2^5 action profiles."""
        rng = np.random.default_rng(3)
        q = rng.random(5)
        labels = rng.integers(0, 4, size=5).tolist()
        expected = np.zeros(4)
        for bits in itertools.product((0, 1), repeat=5):
            x = 0
            for b, s in zip(bits, labels):
                if b:
                    x ^= s
            expected[x] += math.prod(p if b else 1 - p for p, b in zip(q, bits))
        assert np.allclose(xor_pushforward(q, labels, 2), expected, atol=1e-12)

    def test_binary_vector_labels(self):
        """Test that binary vectors infer kappa."""
        dist = xor_pushforward([1.0, 1.0], [(0, 1), (1, 1)])
        assert dist.tolist() == [0.0, 0.0, 1.0, 0.0]

    def test_errors(self):
        """Test guard, missing kappa and label range errors."""
        with pytest.raises(ValueError, match="kappa is required"):
            xor_pushforward([0.5], [1])
        with pytest.raises(ValueError, match="outside"):
            xor_pushforward([0.5], [4], 2)
        with pytest.raises(GuardError):
            xor_pushforward([0.5], [1], 21)
