"""Metric definitions: exact values on constructed inputs."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdegen.errors import InvalidArgumentError, UndefinedMetricError
from spdegen.metrics import (
    ErrorReport,
    TimingReport,
    high_freq_energy_fraction,
    relative_l2,
    time_callable,
    time_solver,
)
from spdegen.solvers import Trajectory, preset


class TestRelativeL2:
    def test_exact_match_is_zero(self):
        a = np.random.default_rng(0).normal(size=(4, 8))
        assert relative_l2(a, a) == 0.0

    def test_zero_prediction_is_one(self):
        a = np.random.default_rng(1).normal(size=(4, 8))
        assert relative_l2(np.zeros_like(a), a) == pytest.approx(1.0)

    def test_double_is_one(self):
        a = np.random.default_rng(2).normal(size=16)
        assert relative_l2(2 * a, a) == pytest.approx(1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=-8, max_value=8, allow_nan=False))
    def test_scale_homogeneity(self, c):
        truth = np.linspace(0.5, 2.0, 24).reshape(4, 6)
        assert relative_l2(c * truth, truth) == pytest.approx(abs(c - 1.0), abs=1e-12)

    def test_accepts_trajectories(self):
        cfg = preset("ginzburg-landau")
        vals = np.random.default_rng(3).normal(size=(3, 128))
        t = np.arange(3.0)
        a = Trajectory(vals, t, cfg)
        b = Trajectory(vals * 1.5, t, cfg)
        assert relative_l2(b, a) == pytest.approx(0.5)

    def test_zero_reference_is_undefined(self):
        with pytest.raises(UndefinedMetricError):
            relative_l2(np.ones(4), np.zeros(4))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            relative_l2(np.ones(4), np.ones(5))


class TestErrorReport:
    def test_summary_statistics(self):
        vals = [0.1, 0.3, 0.2]
        rep = ErrorReport.from_values(vals)
        assert rep.count == 3
        assert rep.mean == pytest.approx(0.2)
        assert rep.std == pytest.approx(np.std(vals, ddof=1))
        assert rep.values.min() <= rep.mean <= rep.values.max()

    def test_single_value_has_no_spread(self):
        rep = ErrorReport.from_values([0.5])
        assert rep.count == 1 and np.isnan(rep.std)

    def test_rejects_bad_values(self):
        with pytest.raises(InvalidArgumentError):
            ErrorReport.from_values([0.1, -0.2])
        with pytest.raises(InvalidArgumentError):
            ErrorReport.from_values([])


class TestHighFreqFraction:
    def test_low_mode_is_all_low(self):
        x = np.arange(64) / 64
        field = np.outer(np.sin(2 * np.pi * x), np.ones(64))
        assert high_freq_energy_fraction(field, k_cut=8) == pytest.approx(0.0, abs=1e-20)

    def test_high_mode_is_all_high(self):
        x = np.arange(64) / 64
        field = np.outer(np.sin(2 * np.pi * 12 * x), np.cos(2 * np.pi * 12 * x))
        assert high_freq_energy_fraction(field, k_cut=8) == pytest.approx(1.0)

    def test_constant_field_pinned_to_zero(self):
        assert high_freq_energy_fraction(np.full((16, 16), 3.7), k_cut=2) == 0.0

    def test_white_noise_matches_mode_counting(self):
        # iid noise spreads energy evenly, so the expected fraction is the
        # share of non-mean lattice modes with radius above k_cut
        nx = ny = 64
        mx = np.fft.fftfreq(nx, d=1.0 / nx)
        radius = np.hypot(mx[:, None], mx[None, :])
        eligible = np.ones((nx, ny), dtype=bool)
        eligible[0, 0] = False
        expected = radius[eligible] > 8.0
        expected_frac = expected.sum() / eligible.sum()

        rng = np.random.default_rng(123)
        draws = np.array(
            [
                high_freq_energy_fraction(rng.standard_normal((nx, ny)), 8.0)
                for _ in range(200)
            ]
        )
        stderr = draws.std(ddof=1) / np.sqrt(len(draws))
        assert abs(draws.mean() - expected_frac) < 3 * stderr

    def test_fraction_scale_invariant(self):
        rng = np.random.default_rng(5)
        f = rng.standard_normal((32, 32))
        assert high_freq_energy_fraction(3.0 * f, 4) == pytest.approx(
            high_freq_energy_fraction(f, 4), rel=1e-12
        )

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            high_freq_energy_fraction(np.ones(8), 2)
        with pytest.raises(InvalidArgumentError):
            high_freq_energy_fraction(np.ones((8, 8)), -1)


class TestTiming:
    def test_report_shape(self):
        rep = time_callable(lambda: None, n_repeats=5, warmup=2, label="noop")
        assert rep.seconds.shape == (5,)
        assert rep.n_warmup == 2
        assert rep.mean >= 0 and rep.median >= 0
        assert np.isfinite(rep.std)

    def test_single_repeat_has_no_spread(self):
        rep = time_callable(lambda: None, n_repeats=1, warmup=0)
        assert np.isnan(rep.std)

    def test_warmup_runs_excluded_but_executed(self):
        calls = []
        rep = time_callable(lambda: calls.append(1), n_repeats=3, warmup=2)
        assert len(calls) == 5
        assert rep.seconds.shape == (3,)

    def test_solver_timing_smoke(self):
        rep = time_solver("ginzburg-landau", degree=32, n_repeats=2, warmup=1)
        assert rep.label == "ginzburg-landau"
        assert np.all(rep.seconds > 0)

    def test_method_validation(self):
        with pytest.raises(InvalidArgumentError):
            time_solver("kdv", method="renormalized", n_repeats=1)
        with pytest.raises(InvalidArgumentError):
            time_solver("phi42", method="implicit", n_repeats=1)
