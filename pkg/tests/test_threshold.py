"""Threshold selection against exact brute-force oracles."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctprev.errors import (
    DegenerateHistogram,
    EmptyHistogram,
    EmptyRegion,
    NonConvergence,
    RangeOutOfBounds,
)
from ctprev.threshold import (
    OTSU_SWEEP_STEPS,
    apply_threshold,
    its_threshold,
    otsu_threshold,
)
from ctprev.volume import Histogram256, Volume

from oracle_threshold import (
    between_class_argmax,
    bimodal_fixture_hist,
    mean_split_iterate,
    random_histogram,
    two_spike_hist,
    within_class_argmin,
)


def _hist(bins: list[int]) -> Histogram256:
    return Histogram256(np.asarray(bins, dtype=np.int64))


class TestOtsu:
    def test_two_spike_frozen(self):
        # oracle: argmax plateau starts right after the low spike
        result = otsu_threshold(_hist(two_spike_hist()))
        assert result.value == 51
        assert result.iterations == OTSU_SWEEP_STEPS == 256
        assert result.region_scans == 512

    def test_two_spike_matches_both_oracles(self):
        h = two_spike_hist()
        assert otsu_threshold(_hist(h)).value == between_class_argmax(h)[0]
        assert otsu_threshold(_hist(h)).value == within_class_argmin(h)[0]

    def test_bimodal_fixture_frozen(self):
        result = otsu_threshold(_hist(bimodal_fixture_hist()))
        assert result.value == 103

    def test_trace_stats_are_consistent(self):
        h = bimodal_fixture_hist()
        result = otsu_threshold(_hist(h), with_trace=True)
        assert len(result.trace) == 256
        best = max(result.trace, key=lambda s: s.sigma_b)
        assert best.t == result.value
        for stats in result.trace[1:-1]:
            if stats.w_a > 0 and stats.w_b > 0:
                assert stats.w_a + stats.w_b == pytest.approx(1.0)

    def test_empty_histogram(self):
        with pytest.raises(EmptyHistogram):
            otsu_threshold(_hist([0] * 256))

    def test_single_bin_is_degenerate(self):
        bins = [0] * 256
        bins[77] = 10
        with pytest.raises(DegenerateHistogram):
            otsu_threshold(_hist(bins))

    @pytest.mark.parametrize("seed", range(60))
    def test_matches_oracles_on_random_histograms(self, seed):
        h = random_histogram(seed)
        value = otsu_threshold(_hist(h)).value
        assert value == between_class_argmax(h)[0]
        assert value == within_class_argmin(h)[0]


class TestIts:
    def test_two_spike_from_default_start(self):
        result = its_threshold(_hist(two_spike_hist()))
        # 128 -> 125, then 125 confirms itself
        assert result.value == 125
        assert result.iterations == 2
        assert result.region_scans == 4

    def test_two_spike_matches_oracle_trace(self):
        h = two_spike_hist()
        want_t, want_iters, _ = mean_split_iterate(h, 128)
        result = its_threshold(_hist(h))
        assert (result.value, result.iterations) == (want_t, want_iters)

    def test_bimodal_fixture_frozen(self):
        result = its_threshold(_hist(bimodal_fixture_hist()))
        assert result.value == 120
        assert result.iterations <= 15

    def test_t_start_must_split(self):
        with pytest.raises(RangeOutOfBounds):
            its_threshold(_hist(two_spike_hist()), t_start=0)
        with pytest.raises(RangeOutOfBounds):
            its_threshold(_hist(two_spike_hist()), t_start=255)

    def test_empty_region(self):
        with pytest.raises(EmptyRegion):
            its_threshold(_hist(two_spike_hist()), t_start=1)

    def test_non_convergence_cap(self):
        with pytest.raises(NonConvergence):
            its_threshold(_hist(two_spike_hist()), max_iterations=1)

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_oracle_on_random_histograms(self, seed):
        h = random_histogram(seed)
        c = np.cumsum(h)
        if c[127] == 0 or c[127] == c[-1]:
            pytest.skip("start split empty for this histogram")
        want_t, want_iters, _ = mean_split_iterate(h, 128)
        result = its_threshold(_hist(h))
        assert (result.value, result.iterations) == (want_t, want_iters)

    def test_trace_ends_at_fixed_point(self):
        result = its_threshold(_hist(bimodal_fixture_hist()), with_trace=True)
        assert result.trace
        last = result.trace[-1]
        assert last.t_next == last.t == result.value
        for step in result.trace:
            assert 0 <= step.t <= 255
            assert step.mu_lo < step.mu_hi
        # successive steps chain: t_next of one step is t of the next
        for a, b in zip(result.trace, result.trace[1:]):
            assert a.t_next == b.t

    def test_trace_off_by_default(self):
        assert its_threshold(_hist(bimodal_fixture_hist())).trace is None


class TestApplyThreshold:
    def test_mask_semantics(self):
        data = np.arange(27, dtype=np.uint8).reshape(3, 3, 3)
        mask = apply_threshold(Volume(data), 13)
        assert mask.dtype == bool
        assert mask.sum() == 14
        assert (data[mask] >= 13).all()

    def test_zero_keeps_everything(self):
        v = Volume(np.zeros((4, 4, 4), dtype=np.uint8))
        assert apply_threshold(v, 0).all()

    def test_bounds(self):
        v = Volume(np.zeros((4, 4, 4), dtype=np.uint8))
        with pytest.raises(RangeOutOfBounds):
            apply_threshold(v, 256)
        with pytest.raises(RangeOutOfBounds):
            apply_threshold(v, -1)

    @given(t=st.integers(0, 254))
    @settings(max_examples=30)
    def test_mask_shrinks_as_threshold_rises(self, t):
        rng = np.random.default_rng(4)
        v = Volume(rng.integers(0, 256, size=(6, 6, 6), dtype=np.uint8))
        assert apply_threshold(v, t).sum() >= apply_threshold(v, t + 1).sum()
