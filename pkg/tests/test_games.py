import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from games.base_game import BaseGame
from games.explicit_game import ExplicitGame
from games.majority_mp_game import MajorityMPGame
from games.observer_game import ObserverGame, rank_subset, unrank_subset
from games.xor_ir_game import XorIrGame, player_count
from src.discrepancy import coloring_to_profile
from src.strategies import DimensionError, GuardError, MixedProfile, MixedStrategy


class TestExplicitGame:
    """Tests for games given by a payoff tensor."""

    def test_matching_pennies_payoffs(self, pennies):
        """Test the match and mismatch payoffs."""
        assert pennies.payoff(0, [0, 0]) == 1.0
        assert pennies.payoff(1, [0, 0]) == 0.0
        assert pennies.payoff(0, [1, 0]) == 0.0
        assert pennies.payoff(1, [1, 0]) == 1.0

    def test_tensor_order(self):
        """Test that player 0's action varies fastest in the flat array."""
        game = ExplicitGame(2, 2, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7])
        assert game.payoff(0, [1, 0]) == 0.1
        assert game.payoff(0, [0, 1]) == 0.2
        assert game.tensor(0)[1, 0] == 0.1
        assert game.payoff(1, [1, 1]) == 0.7

    def test_bad_tensors(self):
        """Test that wrong sizes and payoffs outside [0, 1] raise."""
        with pytest.raises(DimensionError):
            ExplicitGame(2, 2, [0.5] * 7)
        with pytest.raises(ValueError):
            ExplicitGame(1, 2, [0.5, 1.5])

    def test_deviation_table_matches_payoffs(self, small_game):
        """Test every deviation table entry against the payoff oracle."""
        for actions in itertools.product(range(2), repeat=3):
            table = small_game.deviation_table(actions)
            for i in range(3):
                for a in range(2):
                    deviated = list(actions)
                    deviated[i] = a
                    assert table[i, a] == small_game.payoff(i, deviated)

    def test_contraction_matches_enumeration(self, small_game):
        """Test the tensor kernel against the generic enumeration."""
        profile = MixedProfile.binary([0.3, 0.6, 0.9])
        for i in range(3):
            assert np.allclose(small_game.deviation_payoffs(i, profile),
                               BaseGame.deviation_payoffs(small_game, i, profile))

    def test_profile_shape_checked(self, pennies):
        """Test that a profile for the wrong game raises."""
        with pytest.raises(DimensionError):
            pennies.deviation_payoffs(0, MixedProfile.uniform(3, 2))


class TestMajorityMPGame:
    """Tests for the sign-of-sum matching-pennies game."""

    def test_rejects_empty_lines(self):
        """Test that an empty row or column raises."""
        with pytest.raises(ValueError):
            MajorityMPGame([[1, 0], [1, 0]])
        with pytest.raises(ValueError):
            MajorityMPGame([[1, 2]])

    def test_all_plus_profile(self, shifted_identity):
        """Test that rows win and columns lose when everybody plays +1."""
        game = MajorityMPGame(shifted_identity)
        actions = [0] * game.n
        assert game.line_sum(0, actions) == 2
        assert game.payoff(0, actions) == 1.0
        assert game.payoff(4, actions) == 0.0

    def test_tied_sum_pays_half(self, shifted_identity):
        """Test that a zero line sum pays 1/2."""
        game = MajorityMPGame(shifted_identity)
        actions = [0] * 4 + [0, 1, 0, 1]
        assert game.line_sum(0, actions) == 0
        assert game.payoff(0, actions) == 0.5

    def test_kernel_matches_tensor(self, shifted_identity):
        """Test the signed-sum kernel against the exported tensor at a two-point profile."""
        game = MajorityMPGame(shifted_identity)
        explicit = game.to_explicit()
        profile = coloring_to_profile([1, -1, -1, 1], [1, 1, -1, 1], 3)
        for i in range(game.n):
            assert np.allclose(game.deviation_payoffs(i, profile), explicit.deviation_payoffs(i, profile))

    def test_table_matches_rows(self, regular_8x8):
        """Test the vectorised deviation table against the payoff oracle."""
        game = MajorityMPGame(regular_8x8)
        rng = np.random.default_rng(0)
        for _ in range(5):
            actions = rng.integers(0, 2, size=game.n).tolist()
            assert np.allclose(game.deviation_table(actions), BaseGame.deviation_table(game, actions))

    def test_half_profile_is_exact_equilibrium(self, majority_8x8):
        """Test that all-1/2 has zero regret for every player."""
        profile = majority_8x8.exact_equilibrium()
        assert all(majority_8x8.signed_regret(i, profile) == pytest.approx(0.0) for i in range(majority_8x8.n))


class TestObserverGame:
    """Tests for the observer game."""

    def test_sizes_and_window(self, observer_16):
        """Test the player count and the counting window."""
        assert observer_16.n == 32 + math.comb(32, 16)
        assert observer_16.window == (4, 12)
        assert not observer_16.is_enumerable

    def test_b_must_be_even(self):
        """Test that odd b raises."""
        with pytest.raises(ValueError):
            ObserverGame(5)

    @given(st.sets(st.integers(min_value=0, max_value=9), min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_subset_rank_round_trip(self, subset):
        """Test that colex unranking inverts ranking."""
        assert unrank_subset(rank_subset(subset), 10, 4) == tuple(sorted(subset))

    def test_observer_addressing(self, observer_16):
        """Test that an observer index maps back to its subset."""
        subset = tuple(range(0, 32, 2))
        index = observer_16.observer_index(subset)
        assert observer_16.observer_subset(index) == subset
        assert observer_16.relevant_players(index) == list(subset) + [index]
        with pytest.raises(DimensionError):
            observer_16.observer_index(range(15))

    def test_payoffs(self, observer_16):
        """Test pair and observer payoffs on a sparse profile."""
        observer = observer_16.observer_index(range(16))
        actions = {j: int(j < 8) for j in range(32)}
        actions[observer] = 1
        assert observer_16.payoff(observer, actions) == 1.0
        actions[observer] = 0
        assert observer_16.payoff(observer, actions) == 0.5
        assert observer_16.payoff(0, {0: 1, 1: 1}) == 1.0
        assert observer_16.payoff(1, {0: 1, 1: 1}) == 0.0

    def test_exact_equilibrium_kernel(self, observer_16):
        """Test the observer kernel at the declared equilibrium."""
        profile = observer_16.exact_equilibrium()
        observer = observer_16.observer_index(range(16))
        expected = 1 - 2 * (1 + 16 + 120 + 560) / 2 ** 16
        assert observer_16.deviation_payoffs(observer, profile)[1] == pytest.approx(expected)
        assert observer_16.deviation_payoffs(0, profile).tolist() == [0.5, 0.5]
        assert observer_16.declared_ir_level(observer) == 0.5

    def test_audit_players(self, observer_16):
        """Test that audits cover every pair player plus sampled observers."""
        players = observer_16.audit_players(5, seed=1)
        assert players[:32] == list(range(32))
        assert len(players) == 37
        assert all(observer_16.is_observer(i) for i in players[32:])
        assert players == observer_16.audit_players(5, seed=1)

    def test_pigeonhole_observer(self, observer_16):
        """Test that the pigeonhole observer watches one side of 1/2."""
        probs = [0.25] * 20 + [0.75] * 12
        profile = MixedProfile(tuple(MixedStrategy.binary(q) for q in probs), MixedStrategy.pure(1, 2),
                               observer_16.n)
        subset = observer_16.observer_subset(observer_16.pigeonhole_observer(profile))
        assert subset == tuple(range(16))


class TestXorIrGame:
    """Tests for the XOR individual-rationality game."""

    def test_player_counts(self):
        """Test the player count formula."""
        assert player_count(3) == 112
        assert player_count(4) == 3840
        with pytest.raises(GuardError):
            XorIrGame(6)

    def test_addressing(self, xor_3):
        """Test that (s, p) pairs map to indices and back."""
        i = xor_3.player_index(5, 9)
        assert xor_3.player_pair(i) == (5, 9)
        described = xor_3.describe_player(i)
        assert described["s"] == [1, 0, 1]
        assert len(described["V"]) == 4
        with pytest.raises(DimensionError):
            xor_3.player_index(0, 0)

    @given(st.integers(min_value=0, max_value=111))
    @settings(max_examples=40, deadline=None)
    def test_half_set_picks_one_per_pair(self, i):
        """Test that V(s, p) holds exactly one endpoint of every pair {x, x^s}."""
        game = XorIrGame(3)
        s, _ = game.player_pair(i)
        members = set(game.half_set(i))
        assert len(members) == 4
        assert all((x in members) != ((x ^ s) in members) for x in range(8))

    def test_deviation_flips_payoff(self, xor_3):
        """Test that both actions of a player always pay 0 and 1 in some order."""
        assert xor_3.check_flip_invariant(64, seed=0)
        actions = np.random.default_rng(1).integers(0, 2, size=xor_3.n)
        assert np.allclose(xor_3.deviation_table(actions).sum(axis=1), 1.0)

    def test_outcomes(self, xor_2):
        """Test the XOR map on single rounds and on a batch."""
        assert xor_2.outcome([0] * xor_2.n) == 0
        actions = [0] * xor_2.n
        actions[xor_2.player_index(3, 0)] = 1
        assert xor_2.outcome(actions) == 3
        rounds = np.random.default_rng(2).integers(0, 2, size=(6, xor_2.n))
        assert xor_2.outcomes(rounds).tolist() == [xor_2.outcome(r) for r in rounds]

    def test_kernel_matches_enumeration(self, xor_2):
        """Test the pushforward kernel against enumeration of all 2^12 profiles."""
        profile = MixedProfile.binary(np.random.default_rng(4).random(xor_2.n))
        for i in (0, 5, 11):
            assert np.allclose(xor_2.deviation_payoffs(i, profile), BaseGame.deviation_payoffs(xor_2, i, profile))
