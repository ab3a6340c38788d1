"""Acceptance checks behind ``convolab verify``.

Each check measures one verifiable claim (a closed form, an exact sequence
identity, a growth law, a qualitative property) and returns a
:class:`ReportRow` whose status follows the declared tolerance policy:

* hard checks report pass/fail against a frozen tolerance;
* soft checks (asymptotic claims probed at desk scale) always report
  ``soft-pass`` and carry the honest observed value for inspection.

The rows are written to CSV by the CLI; nothing here mutates state, so a
fixed configuration reproduces a byte-identical report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import reference
from .analysis import (
    GrowthFit,
    beta_from_mu,
    bound_ratio_series,
    fit_theta_D,
    mean_square,
    mellin_identity_check,
    perron_exponent,
    theorem3_c,
)
from .arith import (
    RankinContext,
    SequenceCache,
    abelian_error_series,
    error_rs,
    rs_explicit_formula,
    rs_fit_C,
)
from .convolve import closed_log_power, self_convolve
from .errors import DomainError
from .zetaline import MomentTable

__all__ = [
    "ReportRow",
    "IDENTITY_CHECKS",
    "GROWTH_CHECKS",
    "run_identity_checks",
    "run_growth_checks",
]

STATUSES = ("pass", "soft-pass", "fail")

IDENTITY_CHECKS = (
    "closed-form",
    "power-law",
    "mellin-identity",
    "sequence-exact",
    "slow-variation",
    "bound-ratio",
    "exponent-map",
)
GROWTH_CHECKS = (
    "moment-growth",
    "abelian-growth",
    "explicit-formula",
    "moment-sign",
)


@dataclass(frozen=True)
class ReportRow:
    """One acceptance measurement: id, claim, observed vs expected, status."""

    check_id: str
    anchor: str
    observed: float
    expected: str
    status: str

    def __post_init__(self):
        if self.status not in STATUSES:
            raise DomainError(f"status must be one of {STATUSES}, got {self.status}")


def _hard(cond: bool) -> str:
    return "pass" if cond else "fail"


def check_closed_form() -> ReportRow:
    """Self-convolution of log powers against the gamma-quotient closed form."""
    worst = 0.0
    for alpha in (0.0, 0.5, 1.0, 2.0):
        f = (lambda y: 1.0) if alpha == 0.0 else (lambda y, a=alpha: math.log(y) ** a)
        for x in (10.0, 1e3, 1e6):
            got = self_convolve(f, 1.0, x).value
            want = closed_log_power(alpha, x)
            worst = max(worst, abs(got - want) / abs(want))
    return ReportRow(
        check_id="closed-form",
        anchor="log-power self-convolution equals its gamma-quotient closed form",
        observed=worst,
        expected="<=1e-8",
        status=_hard(worst <= 1e-8),
    )


def check_power_laws() -> ReportRow:
    """Pair and self convolutions of pure powers against exact antiderivatives."""
    from .convolve import ConvolveRequest, convolve

    worst = 0.0
    x = 500.0
    for alpha, beta in ((0.0, 1.0), (0.3, 0.9), (1.0, 2.0), (-0.5, 0.5), (0.2, 1.4)):
        req = ConvolveRequest(
            f=lambda y, a=alpha: y**a, g=lambda y, b=beta: y**b, a=1.0, x=x
        )
        want = (x**alpha - x**beta) / (alpha - beta)
        worst = max(worst, abs(convolve(req).value - want) / abs(want))
    for rho in (0.0, 0.3, 0.5, 1.0, 1.7):
        got = self_convolve(lambda y, r=rho: y**r, 1.0, x).value
        want = x**rho * math.log(x)
        worst = max(worst, abs(got - want) / abs(want))
    return ReportRow(
        check_id="power-law",
        anchor="power-law convolutions match their exact antiderivative values",
        observed=worst,
        expected="<=1e-10",
        status=_hard(worst <= 1e-10),
    )


def check_mellin() -> ReportRow:
    """Transform multiplicativity m[f (*) g] = m[f] m[g] on closed-form pairs."""
    fixtures = (
        (lambda x: x**-2.0, lambda x: x**-3.0, 2.0),
        (lambda x: x**-2.0, lambda x: x**-2.0, 2.0),
        (math.log, math.log, 4.0),
    )
    worst = max(mellin_identity_check(f, g, s)[2] for f, g, s in fixtures)
    return ReportRow(
        check_id="mellin-identity",
        anchor="transform of a convolution factorizes into the product of transforms",
        observed=worst,
        expected="<=1e-6",
        status=_hard(worst <= 1e-6),
    )


def _coprime(m: int, n: int) -> bool:
    return math.gcd(m, n) == 1


def check_sequences(caches: dict[str, SequenceCache], n_check: int = 10_000) -> ReportRow:
    """Sieved sequences against brute-force definitions; exact equality."""
    bad = 0
    div, div3, ab, tau, rk = (
        caches["divisor"],
        caches["divisor3"],
        caches["abelian"],
        caches["tau"],
        caches["rankin"],
    )
    ref_tau = reference.tau_eta_crt(n_check)
    for n in range(1, n_check + 1):
        if int(div.value(n)) != reference.divisor_count(n):
            bad += 1
        if int(div3.value(n)) != reference.divisor3_count(n):
            bad += 1
        if int(ab.value(n)) != reference.abelian_count(n):
            bad += 1
        if int(tau.value(n)) != ref_tau[n]:
            bad += 1
        if rk.value(n) != reference.rankin_coeff(n, ref_tau):
            bad += 1
    # multiplicativity on coprime splittings
    for m in range(2, 101):
        for n in range(2, n_check // m + 1):
            if not _coprime(m, n):
                continue
            if int(div.value(m * n)) != int(div.value(m)) * int(div.value(n)):
                bad += 1
            if int(ab.value(m * n)) != int(ab.value(m)) * int(ab.value(n)):
                bad += 1
            if int(tau.value(m * n)) != int(tau.value(m)) * int(tau.value(n)):
                bad += 1
    # Hecke recursion at prime powers
    for p in (2, 3, 5, 7, 11, 13, 17, 19):
        k = 1
        while p ** (k + 1) <= n_check:
            lhs = int(tau.value(p ** (k + 1)))
            rhs = int(tau.value(p)) * int(tau.value(p**k)) - p**11 * int(
                tau.value(p ** (k - 1))
            )
            if lhs != rhs:
                bad += 1
            k += 1
    return ReportRow(
        check_id="sequence-exact",
        anchor="sieves match brute-force definitions; multiplicativity and Hecke recursion exact",
        observed=float(bad),
        expected="0",
        status=_hard(bad == 0),
    )


def _log_conv_exact(x: float) -> float:
    # C_e[log](x) in closed form: with X = log x,
    # int_1^{X-1} v (X - v) dv = X(X-1)^2/2 - (X-1)^3/3 - X/2 + 1/3
    X = math.log(x)
    return X * (X - 1.0) ** 2 / 2.0 - (X - 1.0) ** 3 / 3.0 - X / 2.0 + 1.0 / 3.0


def check_slow_variation() -> ReportRow:
    """The log self-convolution varies slowly: doubling-ratio deviations shrink."""
    a = math.e
    for x in (1e3, 1e6):
        got = self_convolve(math.log, a, x).value
        if abs(got - _log_conv_exact(x)) > 1e-9 * abs(got):
            return ReportRow(
                check_id="slow-variation",
                anchor="closed-form cross-check of the log self-convolution",
                observed=abs(got - _log_conv_exact(x)) / abs(got),
                expected="<=1e-9",
                status="fail",
            )
    devs = [
        abs(_log_conv_exact(2.0 * x) / _log_conv_exact(x) - 1.0)
        for x in (10.0**k for k in range(3, 10))
    ]
    steps = [b - a_ for a_, b in zip(devs, devs[1:])]
    return ReportRow(
        check_id="slow-variation",
        anchor="doubling-ratio deviation of the log self-convolution strictly decreases",
        observed=max(steps),
        expected="<0",
        status=_hard(max(steps) < 0.0),
    )


def check_bound_ratio() -> ReportRow:
    """Growth-law envelope: diagnostic ratios bounded, log-power bookkeeping exact."""
    book = (
        (1.0 / 6.0, 89.0, 90.0),
        (0.0, 1.0, 3.0),
        (0.25, 10.5, 11.5),
    )
    if any(theorem3_c(t, d) != want for t, d, want in book):
        return ReportRow(
            check_id="bound-ratio",
            anchor="log-power bookkeeping of the convolution bound",
            observed=float("nan"),
            expected="exact",
            status="fail",
        )
    fit = GrowthFit(theta=0.0, D=2.0, slope_stderr=0.0, window=(1e2, 1e8), n_samples=16)
    xs = list(np.geomspace(1e2, 1e8, 13))
    ratios = [r for _, r in bound_ratio_series(math.log, 1.0, fit, xs)]
    observed = max(ratios) / ratios[0]
    return ReportRow(
        check_id="bound-ratio",
        anchor="bound-ratio series on the log fixture stays within 10x its first value",
        observed=observed,
        expected="<=10",
        status=_hard(observed <= 10.0),
    )


def check_exponent_calculus() -> ReportRow:
    """The two exponent maps reproduce the known rational values exactly."""
    bad = 0
    bad += perron_exponent(Fraction(3, 2)) != Fraction(3, 5)
    bad += perron_exponent(Fraction(5, 4)) != Fraction(5, 9)
    bad += perron_exponent(1) != Fraction(1, 2)
    bad += beta_from_mu(Fraction(32, 205)) != Fraction(410, 897)
    bad += beta_from_mu(0) != Fraction(2, 5)
    return ReportRow(
        check_id="exponent-map",
        anchor="exponent calculators hit 3/5, 5/9, 1/2, 410/897, 2/5 exactly",
        observed=float(bad),
        expected="0",
        status=_hard(bad == 0),
    )


def _e2cum_at(table: MomentTable, T: float) -> float:
    idx = int(round(T / table.step))
    return float(table.e2_cumulative[idx])


def check_moment_growth(table: MomentTable) -> ReportRow:
    """Log-log slope of the cumulative squared moment error on [200, 4000].

    The asymptotic law is T^{3/2}; at this scale the secondary T log^4 T
    term is of comparable size, so the measured slope sits above the band
    (see the ledger in the repository notes for the full analysis).
    """
    ts = np.geomspace(200.0, 4000.0, 25)
    ts = np.round(ts / table.step) * table.step
    vals = np.array([_e2cum_at(table, t) for t in ts])
    slope, intercept = np.polyfit(np.log(ts), np.log(vals), 1)
    scale = np.sum(vals * ts**1.5) / np.sum(ts**3.0)
    ok = 1.4 <= slope <= 1.6 and scale > 0.0
    return ReportRow(
        check_id="moment-growth",
        anchor="cumulative squared moment error grows like T^(3/2) with positive constant",
        observed=float(slope),
        expected="1.4..1.6",
        status=_hard(ok),
    )


def check_abelian_growth(cache: SequenceCache) -> ReportRow:
    """Fitted mean-square slope of the group-count error term (soft tier)."""
    series = abelian_error_series(cache)
    xs = np.geomspace(1e5, 1e7, 17)
    fit = fit_theta_D([(x, mean_square(series, x)) for x in xs])
    slope = 1.0 + 2.0 * fit.theta
    return ReportRow(
        check_id="abelian-growth",
        anchor="group-count error mean square grows with exponent near 4/3",
        observed=float(slope),
        expected="1.0833..1.5833",
        status="soft-pass",
    )


def check_explicit_formula(ctx: RankinContext) -> ReportRow:
    """Correlation of the truncated oscillatory expansion with the true error.

    The truncation remainder is not negligible at desk scale, so this is a
    trend diagnostic: the observed correlation is reported honestly and the
    row never fails the build.
    """
    xs = np.geomspace(1e3, 1e4, 64)
    truth = np.array([error_rs(x, ctx) for x in xs])
    model = np.array([rs_explicit_formula(x, 1000, ctx) for x in xs])
    corr = float(np.corrcoef(truth, model)[0, 1])
    return ReportRow(
        check_id="explicit-formula",
        anchor="truncated oscillatory expansion correlates with the coefficient-sum error",
        observed=corr,
        expected=">0.5",
        status="soft-pass",
    )


def check_e_qualitative(table: MomentTable) -> ReportRow:
    """Sign changes and o(T) envelope decay of the moment error term."""
    bad = 0
    lo = int(round(10.0 / table.step))
    hi = int(round(500.0 / table.step))
    window = table.E[lo : hi + 1]
    if not (np.any(window > 0.0) and np.any(window < 0.0)):
        bad += 1
    envs = []
    for T in (500.0, 1000.0, 2000.0, 4000.0):
        i0 = int(round(0.9 * T / table.step))
        i1 = int(round(1.1 * T / table.step))
        i1 = min(i1, len(table.edges) - 1)
        seg = np.abs(table.E[i0 : i1 + 1]) / table.edges[i0 : i1 + 1]
        envs.append(float(np.max(seg)))
    if not all(a > b for a, b in zip(envs, envs[1:])):
        bad += 1
    return ReportRow(
        check_id="moment-sign",
        anchor="moment error changes sign and its envelope decays relative to T",
        observed=float(bad),
        expected="0",
        status=_hard(bad == 0),
    )


def run_identity_checks(caches: dict[str, SequenceCache]) -> list[ReportRow]:
    """The exact/closed-form tier, in report order."""
    return [
        check_closed_form(),
        check_power_laws(),
        check_mellin(),
        check_sequences(caches),
        check_slow_variation(),
        check_bound_ratio(),
        check_exponent_calculus(),
    ]


def run_growth_checks(
    table: MomentTable, abelian_cache: SequenceCache, ctx: RankinContext
) -> list[ReportRow]:
    """The growth-law tier (slower; needs the moment table and big sieves)."""
    return [
        check_moment_growth(table),
        check_abelian_growth(abelian_cache),
        check_explicit_formula(ctx),
        check_e_qualitative(table),
    ]
