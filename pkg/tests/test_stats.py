"""Streaming statistics against two-pass oracles; activation-time summaries."""

import numpy as np
import pytest

from volpath.errors import ConfigurationError, DataError
from volpath.stats import (
    ActivationSummary,
    BaselineStats,
    NEVER_ACTIVE_DAY,
    baseline_merge,
    ensemble_summarize,
    first_activation,
    total_active,
)


def fill(stats, members):
    for m in members:
        stats.update(m)
    return stats


class TestBaselineStats:
    def test_hand_example(self):
        # Members 2, 4, 6 (constant in time): mean 4, sample std 2.
        stats = BaselineStats("q", n_steps=3)
        fill(stats, [np.full(4, v) for v in (2.0, 4.0, 6.0)])
        assert np.allclose(stats.mean, 4.0)
        assert np.allclose(stats.std(), 2.0)
        assert stats.mean_at(2) == 4.0
        assert stats.std_at(2) == 2.0

    def test_matches_two_pass(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            members = rng.standard_normal((7, 50)) * rng.uniform(0.1, 100)
            stats = fill(BaselineStats("q", 49), members)
            assert np.allclose(stats.mean, members.mean(axis=0), rtol=1e-12, atol=1e-12)
            assert np.allclose(
                stats.std(), members.std(axis=0, ddof=1), rtol=1e-12, atol=1e-12
            )

    def test_length_mismatch_rejected(self):
        stats = BaselineStats("q", 3)
        with pytest.raises(ConfigurationError):
            stats.update(np.zeros(3))

    def test_nonfinite_rejected(self):
        stats = BaselineStats("q", 3)
        bad = np.array([0.0, np.nan, 0.0, 0.0])
        with pytest.raises(DataError):
            stats.update(bad)

    def test_std_requires_two_members(self):
        stats = fill(BaselineStats("q", 3), [np.zeros(4)])
        with pytest.raises(ConfigurationError):
            stats.std()
        with pytest.raises(ConfigurationError):
            stats.std_at(0)

    def test_from_arrays_round_trip(self):
        rng = np.random.default_rng(1)
        stats = fill(BaselineStats("q", 20), rng.standard_normal((5, 21)))
        rebuilt = BaselineStats.from_arrays("q", stats.n, stats.mean, stats.std())
        assert rebuilt.n == 5
        assert np.allclose(rebuilt.mean, stats.mean, rtol=1e-15)
        assert np.allclose(rebuilt.std(), stats.std(), rtol=1e-12)


class TestBaselineMerge:
    def test_merge_equals_sequential(self):
        rng = np.random.default_rng(2)
        members = rng.standard_normal((9, 30))
        sequential = fill(BaselineStats("q", 29), members)
        a = fill(BaselineStats("q", 29), members[:4])
        b = fill(BaselineStats("q", 29), members[4:])
        merged = baseline_merge(a, b)
        assert merged.n == 9
        assert np.allclose(merged.mean, sequential.mean, rtol=1e-12)
        assert np.allclose(merged.std(), sequential.std(), rtol=1e-12)

    def test_merge_commutes(self):
        rng = np.random.default_rng(3)
        a = fill(BaselineStats("q", 9), rng.standard_normal((3, 10)))
        b = fill(BaselineStats("q", 9), rng.standard_normal((5, 10)))
        ab, ba = baseline_merge(a, b), baseline_merge(b, a)
        assert np.allclose(ab.mean, ba.mean, rtol=1e-12)
        assert np.allclose(ab.m2, ba.m2, rtol=1e-12)

    def test_merge_associative(self):
        rng = np.random.default_rng(4)
        parts = [fill(BaselineStats("q", 9), rng.standard_normal((3, 10))) for _ in range(3)]
        left = baseline_merge(baseline_merge(parts[0], parts[1]), parts[2])
        right = baseline_merge(parts[0], baseline_merge(parts[1], parts[2]))
        assert np.allclose(left.mean, right.mean, rtol=1e-12)
        assert np.allclose(left.m2, right.m2, rtol=1e-12)

    def test_merge_with_empty(self):
        rng = np.random.default_rng(5)
        a = fill(BaselineStats("q", 9), rng.standard_normal((4, 10)))
        empty = BaselineStats("q", 9)
        for merged in (baseline_merge(a, empty), baseline_merge(empty, a)):
            assert merged.n == 4
            assert np.allclose(merged.mean, a.mean)
            assert np.allclose(merged.m2, a.m2)

    def test_mismatches_rejected(self):
        with pytest.raises(ConfigurationError):
            baseline_merge(BaselineStats("a", 9), BaselineStats("b", 9))
        with pytest.raises(ConfigurationError):
            baseline_merge(BaselineStats("a", 9), BaselineStats("a", 8))


class TestActivationTimes:
    def test_hand_examples(self):
        taus = np.array([0, 0, 1, 1, 0, 1])
        assert first_activation(taus, dt=0.5) == 1.0
        assert total_active(taus, dt=0.5) == 1.5
        assert first_activation(np.zeros(6), dt=0.5) == NEVER_ACTIVE_DAY
        assert first_activation(np.zeros(6), dt=0.5, never_value=10.0) == 10.0
        assert total_active(np.zeros(6), dt=0.5) == 0.0

    def test_matches_index_scan(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            taus = rng.random(80) < 0.1
            dt = float(rng.uniform(0.1, 2.0))
            hits = [m for m, t in enumerate(taus) if t]
            expected_first = hits[0] * dt if hits else NEVER_ACTIVE_DAY
            assert first_activation(taus, dt) == expected_first
            assert total_active(taus, dt) == len(hits) * dt


class TestEnsembleSummary:
    def test_hand_example(self):
        summaries = [
            ActivationSummary("q", 0, first_active=100.0, total_active=10.0),
            ActivationSummary("q", 1, first_active=200.0, total_active=30.0),
        ]
        s = ensemble_summarize(summaries)
        assert s.qoi_id == "q" and s.n_members == 2
        assert s.mean_first == 150.0
        assert s.se_first == pytest.approx(50.0)
        assert s.mean_total == 20.0
        assert s.se_total == pytest.approx(10.0)

    def test_validation(self):
        one = [ActivationSummary("q", 0, 1.0, 1.0)]
        with pytest.raises(ConfigurationError):
            ensemble_summarize(one)
        mixed = one + [ActivationSummary("r", 1, 1.0, 1.0)]
        with pytest.raises(ConfigurationError):
            ensemble_summarize(mixed)
