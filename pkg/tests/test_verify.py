import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from games.explicit_game import ExplicitGame
from src.constructions import random_explicit_game
from src.strategies import CorrelatedDistribution, GuardError, MixedProfile, MixedStrategy
from src.verify import (
    ANALYTIC,
    _maximin_lp,
    _maximin_two_actions,
    ce_regret,
    check_cce,
    check_ir,
    check_weak_ce,
    check_weak_nash,
    check_well_supported_nash,
    ir_level,
    nash_regret,
    nash_report,
)


def brute_nash_regret(game, profile, i):
    values = np.zeros(game.m)
    for actions in itertools.product(range(game.m), repeat=game.n):
        if actions[i]:
            continue
        weight = math.prod(profile.probs(j)[a] for j, a in enumerate(actions) if j != i)
        for a in range(game.m):
            deviated = list(actions)
            deviated[i] = a
            values[a] += weight * game.payoff(i, deviated)
    return max(0.0, values.max() - np.dot(profile.probs(i), values))


def brute_switch_regret(game, dist, i, constant_only=False):
    functions = ([(a,) * game.m for a in range(game.m)] if constant_only
                 else itertools.product(range(game.m), repeat=game.m))
    best = 0.0
    for f in functions:
        gain = 0.0
        for actions, weight in dist:
            deviated = list(actions)
            deviated[i] = f[actions[i]]
            gain += weight * (game.payoff(i, deviated) - game.payoff(i, actions))
        best = max(best, gain)
    return best


def random_profile(rng, n, m):
    return MixedProfile.from_matrix(rng.dirichlet(np.ones(m), size=n))


def rock_paper_scissors():
    payoffs = np.zeros((2, 9))
    for a0, a1 in itertools.product(range(3), repeat=2):
        win = 0.5 if a0 == a1 else (1.0 if (a0 - a1) % 3 == 1 else 0.0)
        payoffs[0, a0 + 3 * a1] = win
        payoffs[1, a0 + 3 * a1] = 1.0 - win
    return ExplicitGame(2, 3, payoffs.reshape(-1))


class TestNashVerification:
    """Tests for Nash regrets and the weak Nash test."""

    @pytest.mark.parametrize("seed", range(10))
    def test_regret_matches_enumeration(self, seed):
        """Test exact regrets on seeded games against a brute-force deviation scan."""
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        game = random_explicit_game(n, m, seed)
        profile = random_profile(rng, n, m)
        for i in range(n):
            assert nash_regret(game, profile, i) == pytest.approx(brute_nash_regret(game, profile, i), abs=1e-9)

    def test_matching_pennies(self, pennies):
        """Test that uniform play is exact and pure play is not."""
        ok, report = check_weak_nash(pennies, MixedProfile.uniform(2, 2), 0.0, 0.0)
        assert ok
        assert report.max_regret == pytest.approx(0.0)
        report = nash_report(pennies, MixedProfile.from_pure([0, 0], 2), 0.5)
        assert report.per_player == (0.0, 1.0)
        assert report.violators == (1,)

    def test_weak_fraction(self, pennies):
        """Test that delta lets a fraction of players fail."""
        profile = MixedProfile.from_pure([0, 0], 2)
        ok, report = check_weak_nash(pennies, profile, 0.1, 0.5)
        assert ok
        assert report.satisfied_fraction == 0.5
        assert not check_weak_nash(pennies, profile, 0.1, 0.4)[0]

    def test_threshold_domain(self, pennies):
        """Test that negative epsilon and delta = 1 raise."""
        with pytest.raises(ValueError):
            check_weak_nash(pennies, MixedProfile.uniform(2, 2), -0.1, 0.0)
        with pytest.raises(ValueError):
            check_weak_nash(pennies, MixedProfile.uniform(2, 2), 0.1, 1.0)

    def test_well_supported_is_stricter(self, pennies):
        """Test that a mixed best-responder with a poor support action fails the well-supported test."""
        profile = MixedProfile.binary([0.5, 0.4])
        assert nash_regret(pennies, profile, 0) == pytest.approx(0.1)
        ok, report = check_well_supported_nash(pennies, profile, 0.15)
        assert not ok
        assert report.per_player[0] == pytest.approx(0.2)

    def test_observer_game_needs_players(self, observer_16):
        """Test that auditing every observer is refused."""
        with pytest.raises(GuardError):
            nash_report(observer_16, observer_16.exact_equilibrium(), 0.1)

    def test_observer_exact_equilibrium(self, observer_16):
        """Test the declared observer equilibrium on an audited sample."""
        players = observer_16.audit_players(20, seed=0)
        ok, report = check_weak_nash(observer_16, observer_16.exact_equilibrium(), 0.0, 0.0, players)
        assert ok
        assert len(report.players) == 52

    def test_observer_exact_equilibrium_wide_audit(self, observer_16):
        """Test zero regret for every pair player and 200 sampled observers."""
        players = observer_16.audit_players(200, seed=3)
        report = nash_report(observer_16, observer_16.exact_equilibrium(), 0.0, players)
        assert len(report.players) == 232
        assert report.max_regret <= 1e-9

    def test_monte_carlo_evaluator(self, small_game):
        """Test that the sampled evaluator is close to the exact one."""
        profile = MixedProfile.uniform(3, 2)
        exact = nash_regret(small_game, profile, 0)
        sampled = nash_regret(small_game, profile, 0, evaluator="mc", samples=5000, seed=1)
        assert sampled == pytest.approx(exact, abs=0.08)
        with pytest.raises(ValueError):
            nash_regret(small_game, profile, 0, evaluator="guess")


class TestCorrelatedVerification:
    """Tests for correlated and coarse correlated regrets."""

    @pytest.mark.parametrize("seed", range(5))
    def test_internal_regret_matches_switch_scan(self, seed):
        """Test internal regret against all m^m switching functions."""
        game = random_explicit_game(3, 3, seed)
        rng = np.random.default_rng(seed)
        dist = CorrelatedDistribution(rng.integers(0, 3, size=(4, 3)), rng.dirichlet(np.ones(4)))
        for i in range(3):
            regret = ce_regret(game, dist, i)
            assert regret.internal == pytest.approx(brute_switch_regret(game, dist, i), abs=1e-9)
            assert regret.external == pytest.approx(brute_switch_regret(game, dist, i, True), abs=1e-9)

    def test_internal_exceeds_external(self, pennies):
        """Test a distribution that is coarse correlated but not correlated at 1/2."""
        dist = CorrelatedDistribution.uniform_over([(0, 0), (1, 1)])
        regret = ce_regret(pennies, dist, 1)
        assert regret.internal == pytest.approx(1.0)
        assert regret.external == pytest.approx(0.5)
        assert regret.worst_switch == (1, 0)
        assert check_cce(pennies, dist, 0.5)[0]
        assert not check_weak_ce(pennies, dist, 0.5, 0.0)[0]

    def test_uniform_is_exact(self, pennies):
        """Test that the uniform product is an exact correlated equilibrium."""
        dist = CorrelatedDistribution.uniform_over(list(itertools.product(range(2), repeat=2)))
        ok, report = check_weak_ce(pennies, dist, 0.0, 0.0)
        assert ok
        assert report.max_regret == pytest.approx(0.0)

    def test_player_subset_matches_full_pass(self, small_game):
        """Test that auditing listed players gives the same regrets as the shared pass."""
        rng = np.random.default_rng(9)
        dist = CorrelatedDistribution(rng.integers(0, 2, size=(5, 3)), rng.dirichlet(np.ones(5)))
        full = check_weak_ce(small_game, dist, 0.1, 0.0)[1]
        listed = check_weak_ce(small_game, dist, 0.1, 0.0, players=[0, 1, 2])[1]
        assert np.allclose(full.per_player, listed.per_player)

    def test_wrong_player_count(self, pennies):
        """Test that a distribution for another game raises."""
        with pytest.raises(ValueError):
            check_weak_ce(pennies, CorrelatedDistribution.point_mass([0, 0, 0]), 0.1, 0.0)


class TestIndividualRationality:
    """Tests for maximin levels and the IR test."""

    def test_matching_pennies_level(self, pennies):
        """Test that both players can guarantee 1/2."""
        assert ir_level(pennies, 0) == pytest.approx(0.5)
        assert ir_level(pennies, 1) == pytest.approx(0.5)

    def test_three_action_level(self):
        """Test the LP path on rock-paper-scissors with payoffs in [0, 1]."""
        assert ir_level(rock_paper_scissors(), 0) == pytest.approx(0.5, abs=1e-8)

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=12))
    @settings(max_examples=40, deadline=None)
    def test_crossing_scan_matches_lp(self, lines):
        """Test the two-action crossing scan against the LP."""
        array = np.array(lines, dtype=float).T
        assert _maximin_two_actions(array) == pytest.approx(_maximin_lp(array), abs=1e-7)

    def test_analytic_levels(self, xor_2, pennies):
        """Test declared levels and families without one."""
        assert ir_level(xor_2, 3, ANALYTIC) == 0.5
        with pytest.raises(ValueError):
            ir_level(pennies, 0, ANALYTIC)

    def test_xor_exact_level(self, xor_2):
        """Test that the exact maximin of an XOR player is 1/2."""
        assert ir_level(xor_2, 4) == pytest.approx(0.5)

    def test_check_ir(self, pennies, xor_2):
        """Test IR on uniform play and on a point mass of the XOR game."""
        assert check_ir(pennies, MixedProfile.uniform(2, 2), 0.0).satisfied
        result = check_ir(xor_2, CorrelatedDistribution.point_mass([0] * xor_2.n), 0.25)
        assert not result.satisfied
        assert result.worst_gap == pytest.approx(-0.5)
        assert result.certificate["status"] == "found"
        uniform = check_ir(xor_2, MixedProfile.uniform(xor_2.n, 2), 0.0)
        assert uniform.satisfied
        assert uniform.worst_gap == pytest.approx(0.0)

    def test_check_ir_listed_players(self, observer_16):
        """Test IR on an audited sample of the observer game."""
        players = observer_16.audit_players(5, seed=2)
        result = check_ir(observer_16, observer_16.exact_equilibrium(), 0.0, players)
        assert result.satisfied
        assert result.worst_gap == pytest.approx(0.0)
