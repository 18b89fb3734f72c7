"""Noise sampling: distributional identities, nesting, reproducibility."""

from __future__ import annotations

import numpy as np
import pytest

from spdegen import (
    BasisSpec,
    CYLINDRICAL,
    InvalidArgumentError,
    ResourceLimitError,
    SpectrumSpec,
    brownian_mode_increments,
    eigenvalues,
    eval_basis,
    increments_to_white_noise,
    sample_path,
)
from spdegen.noise import increment_covariance


SINE32 = BasisSpec("sine1d", 32, (1.0,))


def var_stderr(sample_var: float, n: int) -> float:
    # standard error of a Gaussian sample variance
    return sample_var * np.sqrt(2.0 / (n - 1))


class TestVarianceIdentities:
    def test_sine1d_cylindrical_variance_at_half(self):
        # At x = 1/2 each odd mode contributes 2 sin^2(j pi / 2) = 2 and each
        # even mode 0, so with J = 32 the one-step variance is 32 * dt.
        dt = 1e-3
        analytic = increment_covariance(SINE32, CYLINDRICAL, 128, 64, 64) * dt
        assert analytic == pytest.approx(32.0 * dt, rel=1e-12)

        path = sample_path(SINE32, CYLINDRICAL, 128, 4000, dt, seed=7)
        est = path.increments[:, 64].var()
        assert abs(est - analytic) < 3 * var_stderr(est, 4000)

    def test_cexp2d_variance_uniform_in_space(self):
        # |phi|^2 = 1/(Lx Ly) for every mode, so the variance is flat.
        basis = BasisSpec("cexp2d", 8, (1.0, 1.0))
        spec = SpectrumSpec("gaussdecay2d", alpha=0.005)
        dt = 1e-2
        lam_total = eigenvalues(spec, basis).sum()
        path = sample_path(basis, spec, (16, 16), 6000, dt, seed=3)
        for point in [(0, 0), (3, 11), (8, 8)]:
            est = path.increments[:, point[0], point[1]].var()
            assert abs(est - lam_total * dt) < 3 * var_stderr(est, 6000)

    def test_trajectory_sum_scales_variance(self):
        basis = BasisSpec("cexp2d", 4, (1.0, 1.0))
        spec = SpectrumSpec("gaussdecay2d")
        dt = 1e-2
        single = increment_covariance(basis, spec, (8, 8), 0, 0)
        summed = increment_covariance(basis, spec, (8, 8), 0, 0, n_trajectories=10)
        assert summed == pytest.approx(10 * single, rel=1e-12)

        path = sample_path(basis, spec, (8, 8), 5000, dt, seed=11, n_trajectories=10)
        est = path.increments[:, 0, 0].var()
        assert abs(est - summed * dt) < 3 * var_stderr(est, 5000)


class TestCovarianceAndWhiteness:
    def test_covariance_matches_mode_sum(self):
        spec = SpectrumSpec("polydecay1d", r=2.0, eps=0.001)
        basis = BasisSpec("sine1d", 16, (1.0,))
        dt = 5e-3
        n = 20000
        path = sample_path(basis, spec, 64, n, dt, seed=19)
        for a, b in [(16, 48), (8, 8), (5, 59)]:
            analytic = increment_covariance(basis, spec, 64, a, b) * dt
            xa = path.increments[:, a]
            xb = path.increments[:, b]
            est = np.mean(xa * xb)
            stderr = np.sqrt((xa.var() * xb.var() + analytic**2) / n)
            assert abs(est - analytic) < 3 * stderr

    def test_increments_uncorrelated_across_steps(self):
        n = 10000
        path = sample_path(SINE32, CYLINDRICAL, 128, n, 1e-3, seed=23)
        x = path.increments[:, 40]
        rho = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(rho) < 4.0 / np.sqrt(n)

    def test_white_noise_rescaling(self):
        path = sample_path(SINE32, CYLINDRICAL, 64, 5, 2e-3, seed=1)
        xi = increments_to_white_noise(path)
        np.testing.assert_array_equal(xi, path.increments / path.dt)


class TestEigenvalues:
    def test_polydecay_pairing(self):
        # floor(j/2) + 1 for j = 1..6 is 1, 2, 2, 3, 3, 4 by hand.
        spec = SpectrumSpec("polydecay1d", r=2.0, eps=0.001)
        lam = eigenvalues(spec, BasisSpec("sine1d", 6, (1.0,)))
        expected = [float(b) ** (-5.001) for b in (1, 2, 2, 3, 3, 4)]
        np.testing.assert_allclose(lam, expected, rtol=1e-14)
        assert np.all(np.diff(lam) <= 0)

    def test_gaussdecay_values(self):
        spec = SpectrumSpec("gaussdecay2d", alpha=0.005)
        basis = BasisSpec("cexp2d", 4, (1.0, 1.0))
        lam = eigenvalues(spec, basis)
        jj, kk = __import__("spdegen").mode_indices(basis)
        np.testing.assert_allclose(lam, np.exp(-0.005 * (jj**2 + kk**2)), rtol=1e-14)
        assert lam[0] == 1.0  # the (0, 0) mode

    def test_incompatible_combination_rejected(self):
        with pytest.raises(InvalidArgumentError):
            eigenvalues(SpectrumSpec("polydecay1d"), BasisSpec("sine2d", 4, (1.0, 1.0)))
        with pytest.raises(InvalidArgumentError):
            eigenvalues(
                SpectrumSpec("gaussdecay2d"), BasisSpec("sine1d", 4, (1.0,))
            )


class TestFieldConstruction:
    def test_sine2d_matches_dense_reconstruction(self):
        basis = BasisSpec("sine2d", 6, (1.0, 1.0))
        dt = 1e-2
        path = sample_path(basis, CYLINDRICAL, (8, 8), 7, dt, seed=5)
        d_beta = brownian_mode_increments(basis, 7, dt, seed=5)
        phi = eval_basis(basis, (8, 8))
        dense = (d_beta @ phi).reshape(7, 8, 8)
        np.testing.assert_allclose(path.increments, dense, atol=1e-12)

    def test_cexp2d_matches_dense_reconstruction(self):
        basis = BasisSpec("cexp2d", 6, (1.0, 1.0))
        spec = SpectrumSpec("gaussdecay2d", alpha=0.01)
        dt = 1e-2
        path = sample_path(basis, spec, (8, 8), 5, dt, seed=5)
        d_beta = brownian_mode_increments(basis, 5, dt, seed=5)
        lam = eigenvalues(spec, basis)
        phi = eval_basis(basis, (8, 8))
        dense = np.sqrt(2.0) * np.real((d_beta * np.sqrt(lam)) @ phi)
        np.testing.assert_allclose(path.increments, dense.reshape(5, 8, 8), atol=1e-12)

    def test_cexp2d_aliasing_folds_onto_grid(self):
        # degree above the grid size folds modes onto the lattice rather
        # than dropping them; the variance identity still holds pointwise
        basis = BasisSpec("cexp2d", 16, (1.0, 1.0))
        spec = SpectrumSpec("gaussdecay2d", alpha=0.005)
        path = sample_path(basis, spec, (8, 8), 4000, 1e-2, seed=2)
        lam_total = eigenvalues(spec, basis).sum()
        est = path.increments[:, 2, 5].var()
        assert abs(est - lam_total * 1e-2) < 3 * var_stderr(est, 4000)

    def test_field_is_real_and_finite(self):
        basis = BasisSpec("cexp2d", 8, (1.0, 1.0))
        path = sample_path(basis, SpectrumSpec("gaussdecay2d"), (16, 16), 3, 1e-2, seed=4)
        assert path.increments.dtype == np.float64
        assert np.all(np.isfinite(path.increments))


class TestNestingAndReproducibility:
    def test_mode_increments_nest_across_degree(self):
        for kind, lo, hi in [("sine1d", 8, 32), ("sine2d", 2, 8), ("cexp2d", 4, 12)]:
            lengths = (1.0,) if kind == "sine1d" else (1.0, 1.0)
            small = brownian_mode_increments(BasisSpec(kind, lo, lengths), 9, 1e-2, seed=77)
            big = brownian_mode_increments(BasisSpec(kind, hi, lengths), 9, 1e-2, seed=77)
            np.testing.assert_array_equal(small, big[:, : small.shape[1]])

    def test_same_seed_bit_identical(self):
        a = sample_path(SINE32, CYLINDRICAL, 128, 12, 1e-3, seed=99)
        b = sample_path(SINE32, CYLINDRICAL, 128, 12, 1e-3, seed=99)
        np.testing.assert_array_equal(a.increments, b.increments)

    def test_different_seeds_differ(self):
        a = sample_path(SINE32, CYLINDRICAL, 128, 12, 1e-3, seed=99)
        b = sample_path(SINE32, CYLINDRICAL, 128, 12, 1e-3, seed=100)
        assert not np.array_equal(a.increments, b.increments)


class TestValidation:
    def test_bad_arguments(self):
        with pytest.raises(InvalidArgumentError):
            BasisSpec("sine1d", 0, (1.0,))
        with pytest.raises(InvalidArgumentError):
            BasisSpec("cexp2d", 5, (1.0, 1.0))
        with pytest.raises(InvalidArgumentError):
            BasisSpec("sine2d", 4, (1.0,))
        with pytest.raises(InvalidArgumentError):
            sample_path(SINE32, CYLINDRICAL, 128, 0, 1e-3, seed=1)
        with pytest.raises(InvalidArgumentError):
            sample_path(SINE32, CYLINDRICAL, 128, 5, -1e-3, seed=1)
        with pytest.raises(InvalidArgumentError):
            sample_path(SINE32, CYLINDRICAL, (128, 4), 5, 1e-3, seed=1)
        with pytest.raises(InvalidArgumentError):
            sample_path(SINE32, CYLINDRICAL, 128, 5, 1e-3, seed=-1)

    def test_degree_cap(self):
        with pytest.raises(ResourceLimitError):
            BasisSpec("sine1d", 5000, (1.0,))

    def test_dense_eval_cap(self):
        basis = BasisSpec("cexp2d", 256, (1.0, 1.0))
        with pytest.raises(ResourceLimitError):
            eval_basis(basis, (4096, 4096))
