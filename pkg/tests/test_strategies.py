import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.strategies import (
    CorrelatedDistribution,
    DimensionError,
    KUniformDistribution,
    KUniformStrategy,
    MixedProfile,
    MixedStrategy,
)


class TestMixedStrategy:
    """Tests for probability vectors."""

    def test_uniform_and_pure(self):
        """Test the uniform and pure constructors."""
        assert MixedStrategy.uniform(4).probs.tolist() == [0.25] * 4
        assert MixedStrategy.pure(1, 3).probs.tolist() == [0.0, 1.0, 0.0]
        assert MixedStrategy.pure(1, 3).is_point_mass()
        assert not MixedStrategy.uniform(2).is_point_mass()

    def test_rejects_bad_vectors(self):
        """Test that negative entries, wrong sums and empty vectors raise."""
        with pytest.raises(ValueError, match="Negative"):
            MixedStrategy(np.array([1.5, -0.5]))
        with pytest.raises(ValueError, match="sum to"):
            MixedStrategy(np.array([0.5, 0.4]))
        with pytest.raises(DimensionError):
            MixedStrategy(np.array([]))

    def test_probabilities_are_read_only(self):
        """Test that the stored vector cannot be mutated."""
        strategy = MixedStrategy.binary(0.25)
        with pytest.raises(ValueError):
            strategy.probs[0] = 0.0


class TestKUniformStrategy:
    """Tests for count-based strategies."""

    def test_counts_and_probs(self):
        """Test probabilities and exact fractions of a 4-uniform strategy."""
        strategy = KUniformStrategy((1, 3), 4)
        assert strategy.probs.tolist() == [0.25, 0.75]
        assert [str(f) for f in strategy.fractions()] == ["1/4", "3/4"]
        assert strategy.m == 2

    def test_counts_must_sum_to_k(self):
        """Test that counts off k raise."""
        with pytest.raises(ValueError, match="do not sum"):
            KUniformStrategy((1, 1), 3)
        with pytest.raises(ValueError, match="Negative"):
            KUniformStrategy((4, -1), 3)

    @given(st.lists(st.integers(min_value=0, max_value=20), min_size=1, max_size=6).filter(lambda c: sum(c) > 0))
    @settings(max_examples=50, deadline=None)
    def test_probs_sum_to_one(self, counts):
        """Test that any count vector gives a probability vector."""
        strategy = KUniformStrategy(tuple(counts), sum(counts))
        assert strategy.probs.sum() == pytest.approx(1.0)
        assert sum(strategy.fractions()) == 1


class TestMixedProfile:
    """Tests for profiles with and without a default strategy."""

    def test_default_strategy_covers_unlisted_players(self):
        """Test that players past the listed ones play the default."""
        profile = MixedProfile((MixedStrategy.uniform(2),), default=MixedStrategy.pure(1, 2), n=10)
        assert profile.n == 10
        assert profile.explicit_count == 1
        assert profile.probs(7).tolist() == [0.0, 1.0]
        with pytest.raises(IndexError):
            profile[10]

    def test_shape_errors(self):
        """Test that mismatched player or action counts raise."""
        with pytest.raises(DimensionError):
            MixedProfile((MixedStrategy.uniform(2),), n=3)
        with pytest.raises(DimensionError):
            MixedProfile((MixedStrategy.uniform(2), MixedStrategy.uniform(3)))

    def test_replace_listed_player_only(self):
        """Test that replace works on listed players and refuses default players."""
        profile = MixedProfile((MixedStrategy.uniform(2),), default=MixedStrategy.pure(0, 2), n=3)
        replaced = profile.replace(0, MixedStrategy.pure(1, 2))
        assert replaced.probs(0).tolist() == [0.0, 1.0]
        with pytest.raises(DimensionError):
            profile.replace(2, MixedStrategy.uniform(2))

    def test_grid_membership(self):
        """Test the exact k-uniform check."""
        profile = MixedProfile.binary([0.5, 0.25])
        assert profile.is_k_uniform(4)
        assert profile.is_k_uniform(8)
        assert not profile.is_k_uniform(3)
        counted = MixedProfile((KUniformStrategy((1, 1), 2),))
        assert counted.is_k_uniform(4)
        assert not counted.is_k_uniform(3)

    def test_grid_membership_reduces_counts(self):
        """Test that counts over a finer k still sit on a coarser grid when they reduce."""
        halves = MixedProfile((KUniformStrategy((3, 3), 6),))
        assert halves.is_k_uniform(2)
        assert halves.is_k_uniform(4)
        assert not halves.is_k_uniform(3)
        thirds = MixedProfile((KUniformStrategy((2, 4), 6),))
        assert thirds.is_k_uniform(3)
        assert not thirds.is_k_uniform(2)


class TestCorrelatedDistribution:
    """Tests for finite distributions over pure profiles."""

    def test_duplicates_are_merged(self):
        """Test that repeated profiles add their weights."""
        dist = CorrelatedDistribution.from_pairs([((0, 1), 0.25), ((0, 1), 0.25), ((1, 0), 0.5)])
        assert dist.support_size == 2
        assert dist.weights.tolist() == [0.5, 0.5]
        assert dist.n == 2

    def test_k_weights_must_be_multiples(self):
        """Test that a declared k is enforced."""
        with pytest.raises(ValueError, match="multiples"):
            CorrelatedDistribution.from_pairs([((0,), 0.3), ((1,), 0.7)], k=2)
        with pytest.raises(ValueError, match="exceeds"):
            CorrelatedDistribution.from_pairs([((0,), 1 / 3), ((1,), 1 / 3), ((2,), 1 / 3)], k=2)

    def test_rejects_bad_weights(self):
        """Test that zero weights and wrong totals raise."""
        with pytest.raises(ValueError):
            CorrelatedDistribution.from_pairs([((0,), 0.0), ((1,), 1.0)])
        with pytest.raises(ValueError):
            CorrelatedDistribution.from_pairs([((0,), 0.5)])

    def test_k_uniform_distribution_counts(self):
        """Test that a multiset of profiles keeps its counts."""
        dist = KUniformDistribution(np.array([[0, 0], [0, 0], [1, 1]]))
        assert dist.k == 3
        assert dist.counts.tolist() == [2, 1]
        assert dist.to_dict()["support"][0] == {"actions": [0, 0], "count": 2}
