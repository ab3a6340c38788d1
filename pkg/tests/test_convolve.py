"""Unit tests for the convolution functional, closed forms, and iterates.

The iterate constants below were confirmed by an independent nested-
quadrature oracle before being frozen:

    C^(2)[y^rho](x) = x^rho (log x)^3 / 6
    C^(3)[y^rho](x) = x^rho (log x)^7 / 5040

(the second equals the alpha-doubling chain 1 -> 3 -> 7 with constant
Gamma(4)^2/Gamma(8) applied to the previous level's 1/36).
"""

import math

import pytest

from convolab.convolve import (
    ConvolveRequest,
    RegularVariationSpec,
    closed_log_power,
    convolve,
    iterate_convolve,
    rv_convolve,
    self_convolve,
)
from convolab.errors import DomainError
from convolab.numerics import QuadratureSpec


class TestClosedLogPower:
    def test_alpha_zero_is_log(self):
        for x in (2.0, 10.0, 1e5):
            assert closed_log_power(0.0, x) == pytest.approx(math.log(x), rel=1e-14)

    def test_alpha_one_at_e(self):
        assert closed_log_power(1.0, math.e) == pytest.approx(1.0 / 6.0, rel=1e-13)

    def test_alpha_half_constant(self):
        # Gamma(3/2)^2 / Gamma(3) = pi/8
        x = 37.0
        assert closed_log_power(0.5, x) == pytest.approx(
            math.pi / 8.0 * math.log(x) ** 2, rel=1e-13
        )

    def test_domain(self):
        with pytest.raises(DomainError):
            closed_log_power(-1.0, 10.0)
        with pytest.raises(DomainError):
            closed_log_power(1.0, 1.0)


class TestSelfConvolve:
    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    @pytest.mark.parametrize("x", [10.0, 1e3])
    def test_log_power_closed_form(self, alpha, x):
        f = (lambda y: 1.0) if alpha == 0.0 else (lambda y: math.log(y) ** alpha)
        got = self_convolve(f, 1.0, x)
        assert got.value == pytest.approx(closed_log_power(alpha, x), rel=1e-10)

    @pytest.mark.parametrize("rho", [0.0, 0.3, 0.5, 1.0, 1.7])
    def test_power_law(self, rho):
        """Property: C_1[y^rho](x) = x^rho log x to 1e-10 relative."""
        x = 500.0
        got = self_convolve(lambda y: y**rho, 1.0, x)
        assert got.value == pytest.approx(x**rho * math.log(x), rel=1e-10)

    def test_constant_with_offset_lower_limit(self):
        x, a = 1e4, 3.0
        got = self_convolve(lambda y: 1.0, a, x)
        assert got.value == pytest.approx(math.log(x) - 2.0 * math.log(a), rel=1e-12)

    def test_empty_range_flag(self):
        res = self_convolve(lambda y: 1.0, 2.0, 3.9)
        assert res.empty_range and res.value == 0.0
        res = self_convolve(lambda y: 1.0, 2.0, 4.1)
        assert not res.empty_range

    def test_split_equals_direct(self):
        f = lambda y: math.log(y)
        x = 1e3
        split = self_convolve(f, 1.0, x)
        direct = convolve(ConvolveRequest(f=f, g=f, a=1.0, x=x))
        assert abs(split.value - direct.value) <= split.err_est + direct.err_est + 1e-12

    def test_invalid_lower_limit(self):
        with pytest.raises(DomainError):
            self_convolve(lambda y: 1.0, 0.5, 10.0)


class TestConvolvePairs:
    @pytest.mark.parametrize(
        "alpha,beta",
        [(0.0, 1.0), (0.3, 0.9), (1.0, 2.0), (-0.5, 0.5), (0.2, 1.4)],
    )
    def test_distinct_power_identity(self, alpha, beta):
        """Property: (y^a (*) y^b)_1(x) = (x^a - x^b)/(a - b) to 1e-10."""
        x = 300.0
        req = ConvolveRequest(f=lambda y: y**alpha, g=lambda y: y**beta, a=1.0, x=x)
        want = (x**alpha - x**beta) / (alpha - beta)
        assert convolve(req).value == pytest.approx(want, rel=1e-10)

    def test_commutativity(self):
        """Property: convolve(f, g) = convolve(g, f) within combined err."""
        pairs = [
            (lambda y: math.log(y), lambda y: y**0.3),
            (lambda y: 1.0 / y, lambda y: math.sqrt(y)),
        ]
        for f, g in pairs:
            for x in (10.0, 1e3, 1e5):
                fg = convolve(ConvolveRequest(f=f, g=g, a=1.0, x=x))
                gf = convolve(ConvolveRequest(f=g, g=f, a=1.0, x=x))
                assert abs(fg.value - gf.value) <= fg.err_est + gf.err_est + 1e-11

    def test_bilinearity(self):
        f1 = lambda y: math.log(y)
        f2 = lambda y: y**0.4
        g = lambda y: 1.0 / y
        x = 2e3
        lhs = convolve(ConvolveRequest(f=lambda y: f1(y) + f2(y), g=g, a=1.0, x=x))
        r1 = convolve(ConvolveRequest(f=f1, g=g, a=1.0, x=x))
        r2 = convolve(ConvolveRequest(f=f2, g=g, a=1.0, x=x))
        assert lhs.value == pytest.approx(r1.value + r2.value, abs=3e-9)

    def test_request_validation(self):
        with pytest.raises(DomainError):
            ConvolveRequest(f=lambda y: 1.0, g=lambda y: 1.0, a=0.9, x=10.0)
        with pytest.raises(DomainError):
            ConvolveRequest(f=lambda y: 1.0, g=lambda y: 1.0, a=1.0, x=0.0)


class TestIterates:
    def test_k1_is_self_convolve(self):
        f = lambda y: math.log(y)
        a, x = 1.0, 777.0
        assert iterate_convolve(f, 1, a, x).value == self_convolve(f, a, x).value

    @pytest.mark.parametrize("x", [50.0, 1e3])
    def test_k2_power_law(self, x):
        rho = 0.7
        got = iterate_convolve(lambda y: y**rho, 2, 1.0, x)
        want = x**rho * math.log(x) ** 3 / 6.0
        assert got.value == pytest.approx(want, rel=1e-6)
        assert got.err_est >= abs(got.value - want)

    def test_k2_log(self):
        x = 1e3
        got = iterate_convolve(lambda y: math.log(y), 2, 1.0, x)
        assert got.value == pytest.approx(math.log(x) ** 7 / 5040.0, rel=1e-6)

    def test_k3_power_law(self):
        # frozen constant 1/5040; verified by the nested-quadrature oracle
        rho, x = 0.7, 200.0
        got = iterate_convolve(lambda y: y**rho, 3, 1.0, x, points_per_decade=32)
        want = x**rho * math.log(x) ** 7 / 5040.0
        assert got.value == pytest.approx(want, rel=1e-4)

    def test_bad_k(self):
        with pytest.raises(DomainError):
            iterate_convolve(lambda y: 1.0, 0, 1.0, 10.0)

    def test_empty_range(self):
        res = iterate_convolve(lambda y: 1.0, 2, 4.0, 10.0)
        assert res.empty_range and res.value == 0.0


class TestRegularVariation:
    def test_constant_slowly_varying(self):
        h = RegularVariationSpec(index=0.0, slowly_varying=lambda y: 1.0, x0=1.0)
        a, x = math.e, 1e4
        value, sv = rv_convolve(h, a, x)
        assert sv == pytest.approx(math.log(x) - 2.0, rel=1e-12)
        assert value == sv  # index 0

    def test_factorization_identity(self):
        h = RegularVariationSpec(index=2.0, slowly_varying=lambda y: math.log(y), x0=2.0)
        a, x = 2.0, 1e3
        value, sv = rv_convolve(h, a, x)
        assert value == pytest.approx(x**2 * sv, rel=1e-15)
        assert sv == pytest.approx(self_convolve(math.log, a, x).value, rel=1e-15)

    def test_slow_variation_ratio_decay(self):
        """Property: |C_a[L](2x)/C_a[L](x) - 1| shrinks as x grows."""
        h = RegularVariationSpec(index=0.0, slowly_varying=lambda y: math.log(y), x0=math.e)
        a = math.e
        spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)
        devs = []
        for x in (1e3, 1e4, 1e5, 1e6):
            _, sv1 = rv_convolve(h, a, x, spec)
            _, sv2 = rv_convolve(h, a, 2.0 * x, spec)
            devs.append(abs(sv2 / sv1 - 1.0))
        assert all(d1 > d2 for d1, d2 in zip(devs, devs[1:]))

    def test_below_threshold_warns(self):
        h = RegularVariationSpec(index=0.0, slowly_varying=lambda y: 1.0, x0=10.0)
        with pytest.warns(UserWarning, match="below the validity threshold"):
            rv_convolve(h, 2.0, 1e3)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            RegularVariationSpec(index=0.0, slowly_varying=lambda y: -1.0, x0=1.0)
        with pytest.raises(DomainError):
            RegularVariationSpec(index=0.0, slowly_varying=lambda y: 1.0, x0=0.5)
