"""Tests for mean-square growth fits, convolution bounds, and Mellin checks."""

import math
from fractions import Fraction

import numpy as np
import pytest

from convolab.analysis import (
    GrowthFit,
    beta_from_mu,
    bound_ratio_series,
    fit_theta_D,
    mean_square,
    mellin,
    mellin_identity_check,
    perron_exponent,
    smooth_short_interval,
    theorem3_c,
)
from convolab.arith import divisor_error_series, sieve_divisor
from convolab.errors import DomainError, FitError, RangeError
from convolab.numerics import integrate


@pytest.fixture(scope="module")
def div_series():
    return divisor_error_series(sieve_divisor(10_000))


class TestMeanSquare:
    def test_constant(self):
        assert mean_square(lambda x: 1.0, 37.0) == pytest.approx(36.0, rel=1e-12)

    def test_identity_function(self):
        X = 10.0
        assert mean_square(lambda x: x, X) == pytest.approx((X**3 - 1) / 3, rel=1e-12)

    def test_lower_endpoint(self):
        assert mean_square(lambda x: x, 1.0) == 0.0
        with pytest.raises(DomainError):
            mean_square(lambda x: x, 0.5)

    def test_exact_path_against_unit_aligned_quadrature(self, div_series):
        """Dual-path oracle: the Abel-summation evaluation must match
        quadrature with panels aligned to the unit intervals (so the
        integrand is smooth inside every panel)."""
        X = 1e4
        total = 0.0
        n = 1
        while n < X:
            v, _ = integrate(lambda x: div_series.evaluator(x) ** 2, float(n), min(n + 1.0, X))
            total += v
            n += 1
        exact = mean_square(div_series, X)
        assert exact == pytest.approx(total, rel=1e-6)

    def test_exact_path_partial_interval(self, div_series):
        # blind adaptive quadrature; limited by jump-panel error surrogates
        exact = mean_square(div_series, 50.7)
        quad = mean_square(div_series.evaluator, 50.7)
        assert exact == pytest.approx(quad, rel=1e-5)

    def test_exact_path_monotone(self, div_series):
        vals = [mean_square(div_series, x) for x in (10.0, 100.0, 1000.0, 9999.5)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_range_guard(self, div_series):
        with pytest.raises(RangeError):
            mean_square(div_series, 10_001.0)


class TestGrowthFit:
    def test_pure_square_is_exact(self):
        xs = np.geomspace(1e2, 1e8, 24)
        fit = fit_theta_D([(x, x**2) for x in xs])
        assert abs(fit.theta - 0.5) < 1e-10
        assert abs(fit.D) < 1e-10
        assert fit.slope_stderr < 1e-10

    def test_log_cubed_fixture(self):
        xs = np.geomspace(1e2, 1e8, 32)
        fit = fit_theta_D([(x, x * math.log(x) ** 3) for x in xs])
        assert abs(fit.theta) < 0.05
        assert fit.D == pytest.approx(3.0, abs=0.5)

    def test_four_thirds_exponent(self):
        xs = np.geomspace(1e3, 1e7, 20)
        fit = fit_theta_D([(x, x ** (4.0 / 3.0)) for x in xs])
        assert fit.theta == pytest.approx(1.0 / 6.0, abs=0.01)

    def test_too_few_samples(self):
        with pytest.raises(FitError):
            fit_theta_D([(10.0 * 2**k, 100.0 * 4**k) for k in range(10)])

    def test_narrow_window(self):
        pts = [(100.0 + k, (100.0 + k) ** 2) for k in range(20)]
        with pytest.raises(FitError):
            fit_theta_D(pts)

    def test_rank_deficient_window(self):
        with pytest.raises(FitError):
            fit_theta_D([(1e2, 1.0)] * 8 + [(1e4, 100.0)] * 8)

    def test_nonpositive_values(self):
        xs = np.geomspace(1e2, 1e5, 16)
        pts = [(x, x) for x in xs]
        pts[3] = (pts[3][0], 0.0)
        with pytest.raises(FitError):
            fit_theta_D(pts)

    def test_growthfit_invariants(self):
        with pytest.raises(FitError):
            GrowthFit(theta=0.1, D=0.0, slope_stderr=0.0, window=(100.0, 1e4), n_samples=15)
        with pytest.raises(FitError):
            GrowthFit(theta=0.1, D=0.0, slope_stderr=0.0, window=(2.0, 1e4), n_samples=16)


class TestTheoremBound:
    @pytest.mark.parametrize(
        "theta,D,want",
        [(1.0 / 6.0, 89.0, 90.0), (0.0, 1.0, 3.0), (0.25, 10.5, 11.5)],
    )
    def test_log_power_map(self, theta, D, want):
        assert theorem3_c(theta, D) == pytest.approx(want, abs=1e-12)

    def test_zero_threshold(self):
        assert theorem3_c(5e-4, 0.0) == 2.0
        assert theorem3_c(2e-3, 0.0) == 1.0

    def test_negative_theta(self):
        with pytest.raises(DomainError):
            theorem3_c(-0.1, 0.0)

    def test_log_fixture_ratio_decreasing(self):
        # true mean square of log is X (log X)^2 (1 + o(1)): theta=0, D=2
        fit = GrowthFit(theta=0.0, D=2.0, slope_stderr=0.0, window=(1e2, 1e6), n_samples=16)
        xs = [1e2, 1e3, 1e4, 1e5]
        ratios = bound_ratio_series(math.log, 1.0, fit, xs)
        vals = [r for _, r in ratios]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        # closed form: ratio = (log x)^3/6 / (log x)^4 = 1/(6 log x)
        for x, r in ratios:
            assert r == pytest.approx(1.0 / (6.0 * math.log(x)), rel=1e-8)
        assert max(vals) <= vals[0] * 10.0

    def test_power_fixture_ratio_bounded(self):
        fit = GrowthFit(
            theta=1.0 / 6.0, D=-1.0, slope_stderr=0.0, window=(1e2, 1e6), n_samples=16
        )
        # c = D + 1 = 0, so the ratio is x^{1/6} log x / x^{1/6} = log x;
        # normalize against that growth by hand to assert boundedness
        ratios = bound_ratio_series(lambda y: y ** (1.0 / 6.0), 1.0, fit, [1e2, 1e4, 1e6])
        for x, r in ratios:
            assert r == pytest.approx(math.log(x), rel=1e-8)

    def test_requires_increasing_grid(self):
        fit = GrowthFit(theta=0.0, D=2.0, slope_stderr=0.0, window=(1e2, 1e6), n_samples=16)
        with pytest.raises(DomainError):
            bound_ratio_series(math.log, 1.0, fit, [10.0, 10.0, 20.0])


class TestMellin:
    def test_inverse_square(self):
        m = mellin(lambda x: x**-2.0, 2.0, 1e3)
        assert m.value == pytest.approx(1.0 / 3.0, rel=1e-8)
        assert m.tail_est >= 0.0

    def test_inverse_cube(self):
        m = mellin(lambda x: x**-3.0, 2.0, 1e3)
        assert m.value == pytest.approx(1.0 / 4.0, rel=1e-8)

    def test_log(self):
        m = mellin(math.log, 3.0, 1e5)
        assert m.value == pytest.approx(1.0 / 4.0, rel=1e-8)
        # the power envelope must cover the true truncation error
        assert abs(m.value - 0.25) <= m.tail_est + 1e-10

    def test_complex_abscissa(self):
        s = 2.0 + 3.0j
        m = mellin(lambda x: x**-2.0, s, 1e3)
        assert abs(m.value - 1.0 / (s + 1.0)) < 1e-8

    def test_margin_enforced(self):
        with pytest.raises(DomainError):
            mellin(math.log, 1.2, 1e3)  # abscissa 1 with hint 0, margin 0.25
        mellin(math.log, 1.26, 1e3)

    def test_alpha_hint_shifts_abscissa(self):
        with pytest.raises(DomainError):
            mellin(lambda x: x, 2.2, 1e3, alpha_hint=1.0)

    def test_identity_distinct_powers(self):
        lhs, rhs, defect = mellin_identity_check(lambda x: x**-2.0, lambda x: x**-3.0, 2.0)
        assert lhs == pytest.approx(1.0 / 12.0, rel=1e-7)
        assert rhs == pytest.approx(1.0 / 12.0, rel=1e-7)
        assert defect < 1e-6

    def test_identity_equal_powers(self):
        lhs, rhs, defect = mellin_identity_check(lambda x: x**-2.0, lambda x: x**-2.0, 2.0)
        assert lhs == pytest.approx(1.0 / 9.0, rel=1e-7)
        assert defect < 1e-6

    def test_identity_log(self):
        lhs, rhs, defect = mellin_identity_check(math.log, math.log, 4.0)
        assert rhs == pytest.approx((1.0 / 9.0) ** 2, rel=1e-7)
        assert defect < 1e-6


class TestExponentCalculators:
    def test_perron_paper_points(self):
        assert perron_exponent(Fraction(3, 2)) == Fraction(3, 5)
        assert perron_exponent(Fraction(5, 4)) == Fraction(5, 9)
        assert perron_exponent(1) == Fraction(1, 2)

    def test_perron_domain(self):
        with pytest.raises(DomainError):
            perron_exponent(0.99)

    def test_perron_monotone(self):
        grid = np.linspace(1.0, 4.0, 31)
        vals = [perron_exponent(t) for t in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_beta_known_points(self):
        # the fraction is the authoritative value; quoted decimals in the
        # literature sometimes transpose digits (0.4570709 vs the true
        # 0.4570791...)
        assert beta_from_mu(Fraction(32, 205)) == Fraction(410, 897)
        assert float(beta_from_mu(Fraction(32, 205))) == pytest.approx(410.0 / 897.0, rel=1e-15)
        assert beta_from_mu(0) == Fraction(2, 5)
        assert beta_from_mu(Fraction(1, 4)) == Fraction(1, 2)

    def test_beta_domain(self):
        with pytest.raises(DomainError):
            beta_from_mu(-0.01)
        with pytest.raises(DomainError):
            beta_from_mu(0.51)

    def test_beta_monotone(self):
        grid = np.linspace(0.0, 0.5, 26)
        vals = [beta_from_mu(m) for m in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestSmoothing:
    def test_constant_doubles(self):
        # literal normalization: width-2H window divided by H
        assert smooth_short_interval(lambda x: 5.0, 100.0, 10.0) == pytest.approx(10.0, rel=1e-10)

    def test_exact_matches_quadrature(self, div_series):
        X, H = 50.0, 2.0
        exact = smooth_short_interval(div_series, X, H)
        v, _ = integrate(div_series.evaluator, X - H, X + H)
        assert exact == pytest.approx(v / H, abs=1e-9)

    def test_divisor_consistency(self, div_series):
        """|window average - u(X)| = O(H) with a modest constant; the
        window average itself settles near twice the mean value 1/4."""
        X = 5000.0
        u_at = div_series.evaluator(X)
        for H in (100.0, 500.0, 2000.0):
            s = smooth_short_interval(div_series, X, H)
            fitted_c = abs(s / 2.0 - u_at) / H
            assert fitted_c <= 10.0
        assert smooth_short_interval(div_series, X, 2400.0) == pytest.approx(0.5, abs=0.2)

    def test_squared_window_bound(self, div_series):
        X, H = 5000.0, 100.0
        u2 = div_series.evaluator(X) ** 2
        window = (mean_square(div_series, X + H) - mean_square(div_series, X - H)) / H
        assert u2 <= window + 10.0 * H**2

    def test_window_limits(self, div_series):
        smooth_short_interval(div_series, 4000.0, 2000.0)
        with pytest.raises(RangeError):
            smooth_short_interval(div_series, 4000.0, 2000.5)
        with pytest.raises(RangeError):
            smooth_short_interval(div_series, 4000.0, 0.5)
        with pytest.raises(RangeError):
            smooth_short_interval(div_series, 9990.0, 100.0)
