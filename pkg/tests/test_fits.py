import math

import numpy as np
import pytest

from humancorpus.quality.fits import (
    FitError, aggd_fit, ggd_fit, shape_ratio, solve_shape,
)

from .oracles import aggd_samples, ggd_samples


class TestShapeRatio:
    def test_known_values(self):
        # Gaussian: (E|x|)^2 / E[x^2] = 2/pi; Laplacian: 1/2
        assert shape_ratio(2.0) == pytest.approx(2.0 / math.pi, rel=1e-12)
        assert shape_ratio(1.0) == pytest.approx(0.5, rel=1e-12)

    def test_monotone_increasing(self):
        grid = np.linspace(0.1, 10.0, 300)
        values = [shape_ratio(a) for a in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_solver_inverts(self):
        for alpha in (0.3, 0.7, 1.0, 2.0, 5.0, 8.0):
            assert solve_shape(shape_ratio(alpha)) == pytest.approx(
                alpha, abs=2e-6)

    def test_solver_clamps_to_bracket(self):
        assert solve_shape(1e-9) == 0.1
        assert solve_shape(0.999999) == 10.0


class TestGgdFit:
    def test_gaussian_samples_recover_shape_two(self):
        rng = np.random.default_rng(101)
        fit = ggd_fit(rng.standard_normal(10**6))
        assert 1.9 <= fit.alpha <= 2.1
        assert fit.sigma2 == pytest.approx(1.0, rel=0.02)

    def test_laplacian_samples_recover_shape_one(self):
        rng = np.random.default_rng(102)
        fit = ggd_fit(rng.laplace(0.0, 1.0 / math.sqrt(2.0), 10**6))
        assert 0.93 <= fit.alpha <= 1.07
        assert fit.sigma2 == pytest.approx(1.0, rel=0.02)

    def test_parameter_recovery_within_ten_percent(self):
        rng = np.random.default_rng(103)
        for alpha, sigma2 in ((1.0, 1.0), (2.0, 1.0), (0.5, 4.0)):
            fit = ggd_fit(ggd_samples(rng, alpha, sigma2, 10**6))
            assert abs(fit.alpha - alpha) / alpha < 0.10
            assert abs(fit.sigma2 - sigma2) / sigma2 < 0.10

    def test_all_zero_rejected(self):
        with pytest.raises(FitError, match="degenerate"):
            ggd_fit(np.zeros(1000))

    def test_too_few_samples_rejected(self):
        with pytest.raises(FitError, match="100"):
            ggd_fit(np.ones(50))

    def test_nonfinite_rejected(self):
        x = np.ones(200)
        x[3] = np.nan
        with pytest.raises(FitError):
            ggd_fit(x)


class TestAggdFit:
    def test_paired_symmetric_set(self):
        base = np.linspace(0.5, 3.0, 200)
        x = np.concatenate([base, -base])
        fit = aggd_fit(x)
        assert abs(fit.eta) < 1e-6
        assert fit.sigma_l2 == pytest.approx(fit.sigma_r2, abs=1e-9)

    def test_parameter_recovery_within_ten_percent(self):
        rng = np.random.default_rng(104)
        x = aggd_samples(rng, 2.0, 1.0, 2.0, 10**6)
        fit = aggd_fit(x)
        assert abs(fit.alpha - 2.0) / 2.0 < 0.10
        assert abs(math.sqrt(fit.sigma_l2) - 1.0) < 0.10
        assert abs(math.sqrt(fit.sigma_r2) - 2.0) / 2.0 < 0.10
        # implied mean for alpha=2, sigma_l=1, sigma_r=2
        expected_eta = (2.0 - 1.0) * math.sqrt(2.0 / math.pi)
        assert fit.eta == pytest.approx(expected_eta, rel=0.05)

    def test_single_signed_rejected(self):
        with pytest.raises(FitError, match="both signs"):
            aggd_fit(np.linspace(0.1, 5.0, 500))

    def test_asymmetry_direction(self):
        rng = np.random.default_rng(105)
        right_heavy = aggd_fit(aggd_samples(rng, 2.0, 0.5, 2.0, 10**5))
        left_heavy = aggd_fit(aggd_samples(rng, 2.0, 2.0, 0.5, 10**5))
        assert right_heavy.eta > 0 > left_heavy.eta
        assert right_heavy.sigma_r2 > right_heavy.sigma_l2
        assert left_heavy.sigma_l2 > left_heavy.sigma_r2


def test_estimator_monotone_in_moment_ratio():
    ratios = np.linspace(shape_ratio(0.1) + 1e-6, shape_ratio(10.0) - 1e-6, 50)
    alphas = [solve_shape(r) for r in ratios]
    assert all(b >= a for a, b in zip(alphas, alphas[1:]))
