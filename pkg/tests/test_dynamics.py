import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.dynamics import (
    convergence_time,
    hitting_times_csv,
    run_regret_matching,
    run_trials,
    stationary,
    support_lower_bound_audit,
    switching_matrices,
    trial_seeds,
)
from src.strategies import GuardError
from src.verify import ce_report


class TestSwitching:
    """Tests for the experts' switching matrices."""

    def test_rows_are_distributions(self):
        """Test that positive regrets normalise and zero regrets give uniform rows."""
        regrets = np.array([[[0.0, 2.0, 2.0], [0.0, 0.0, 0.0], [-1.0, 3.0, 0.0]]])
        matrices = switching_matrices(regrets)
        assert matrices[0, 0].tolist() == [0.0, 0.5, 0.5]
        assert np.allclose(matrices[0, 1], 1 / 3)
        assert matrices[0, 2].tolist() == [0.0, 1.0, 0.0]

    @given(st.integers(min_value=2, max_value=4), st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=30, deadline=None)
    def test_stationary_fixed_point(self, m, seed):
        """Test p Q = p for random stochastic matrices."""
        matrices = np.random.default_rng(seed).dirichlet(np.ones(m), size=(3, m))
        probs = stationary(matrices)
        assert np.allclose(probs.sum(axis=1), 1.0)
        assert np.allclose(np.einsum("pj,pjl->pl", probs, matrices), probs, atol=1e-6)


class TestRegretMatching:
    """Tests for the regret-matching dynamics."""

    def test_reproducible(self, pennies):
        """Test that a trace is fixed by its seed."""
        first = run_regret_matching(pennies, 100, seed=3)
        assert first.rounds.shape == (100, 2)
        assert np.array_equal(first.rounds, run_regret_matching(pennies, 100, seed=3).rounds)
        assert set(np.unique(first.rounds)) <= {0, 1}

    def test_tracked_regret_matches_verifier(self, small_game):
        """Test the running internal regret against the verifier on prefixes."""
        trace = run_regret_matching(small_game, 200, seed=1)
        for t in (1, 10, 57, 200):
            report = ce_report(small_game, trace.prefix_distribution(t), 0.0)
            assert trace.max_internal_regret[t - 1] == pytest.approx(report.max_regret, abs=1e-9)

    def test_hitting_time(self, pennies):
        """Test hitting times against the recorded regret curve."""
        trace = run_regret_matching(pennies, 300, seed=0)
        assert trace.hitting_time(1.0) == 1
        hit = trace.hitting_time(0.1)
        if hit is not None:
            assert trace.max_internal_regret[hit - 1] <= 0.1 + 1e-9
            assert (trace.max_internal_regret[: hit - 1] > 0.1 + 1e-9).all()
        with pytest.raises(ValueError):
            trace.prefix_distribution(301)

    def test_errors(self, pennies, observer_16):
        """Test non-positive horizons and games without a deviation table."""
        with pytest.raises(ValueError):
            run_regret_matching(pennies, 0, seed=0)
        with pytest.raises(GuardError):
            run_regret_matching(observer_16, 10, seed=0)

    def test_trials_in_seed_order(self, pennies):
        """Test that trials come back in seed order."""
        seeds = trial_seeds(4, 3)
        assert len(set(seeds)) == 3
        traces = run_trials(pennies, 30, seeds)
        assert [t.seed for t in traces] == seeds
        assert np.array_equal(traces[1].rounds, run_regret_matching(pennies, 30, seeds[1]).rounds)

    def test_convergence_times(self, pennies):
        """Test the hitting-time table and its CSV."""
        times = convergence_time(pennies, 0.2, 200, trials=3, seed=0)
        assert [h.trial for h in times] == [0, 1, 2]
        assert all(h.censored == (h.t_hit is None) for h in times)
        lines = hitting_times_csv(times).splitlines()
        assert lines[0] == "trial,seed,t_hit,censored"
        assert len(lines) == 4

    @pytest.mark.slow
    def test_regret_shrinks_with_horizon(self, xor_3):
        """Test that internal regret after 10^4 rounds is below its value after 10^3."""
        traces = run_trials(xor_3, 10 ** 4, trial_seeds(0, 10))
        early = np.array([t.max_internal_regret[999] for t in traces])
        late = np.array([t.max_internal_regret[-1] for t in traces])
        assert late.mean() < early.mean()
        assert (late < early).sum() >= 9


class TestSupportAudit:
    """Tests for the support lower-bound audit on the XOR game."""

    def test_small_support_prefixes_are_certified(self, xor_3):
        """Test that every prefix within the support bound carries a certificate."""
        trace = run_regret_matching(xor_3, 40, seed=2)
        report = support_lower_bound_audit(xor_3, trace)
        assert report.support_bound == 2
        assert report.checked >= 1
        assert report.sound
        assert report.checked + report.skipped == 40
        assert all(c["replayed_payoff"] <= 0.25 + 1e-9 for c in report.certificates)
        assert report.to_dict()["anchor"] == "support-lower-bound-audit"

    def test_audit_needs_xor_game(self, pennies):
        """Test that other games raise."""
        trace = run_regret_matching(pennies, 5, seed=0)
        with pytest.raises(TypeError):
            support_lower_bound_audit(pennies, trace)

    @pytest.mark.slow
    def test_every_seed_hits_the_support_bound(self, xor_3):
        """Test that each of 10 long traces has certified prefixes and no unsound one."""
        for trace in run_trials(xor_3, 10 ** 4, trial_seeds(1, 10)):
            report = support_lower_bound_audit(xor_3, trace)
            assert report.sound
            assert report.checked >= 1
            assert report.checked + report.skipped == 10 ** 4
