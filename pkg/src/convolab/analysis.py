"""Mean-square growth laws, convolution bounds, and Mellin-side checks.

The machinery here ties the arithmetic error terms to the convolution
functional:

* ``mean_square`` computes M(X) = int_1^X f(x)^2 dx.  For the cached
  step-minus-smooth error terms the integral is evaluated exactly by Abel
  summation over unit intervals (the step part is constant on [n, n+1), the
  smooth part has a closed-form antiderivative), so there is no quadrature
  noise at all on the primary fixtures.
* ``fit_theta_D`` recovers the growth law M(X) ~ X^(1+2*theta) (log X)^D by
  ordinary least squares in the joint model
  log M = b0 + b1 log X + b2 log log X, theta = (b1 - 1)/2, D = b2.
  Fitting the slope alone and then the residual biases theta upward by
  roughly 3/(2 log X) on fixtures like X (log X)^3, so the joint fit is used.
* ``theorem3_c`` maps a growth law (theta, D) to the log-power c such that
  the self-convolution of f is O(x^theta (log x)^c): c = D + 1 for
  theta > 0 and c = D + 2 in the boundary case theta = 0 (an extra log
  from the unit-power resonance).
* ``mellin`` is the modified transform m[f](s) = int_1^inf f(x) x^(-s) dx,
  truncated at X_max with an explicit power-envelope tail estimate, and
  ``mellin_identity_check`` verifies the factorization
  m[f (*) g](s) = m[f](s) * m[g](s) on closed-form inputs.
* ``perron_exponent`` and ``beta_from_mu`` are the exact exponent
  calculators theta -> theta/(theta+1) and mu -> 2/(5 - 4 mu).
* ``smooth_short_interval`` is the window average
  H^(-1) int_{X-H}^{X+H} u(x) dx, exact for cached step error terms.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import ErrorTermSeries
from .convolve import ConvolveRequest, convolve, self_convolve
from .errors import DomainError, FitError, RangeError
from .numerics import DEFAULT_QUAD, QuadratureSpec, integrate

__all__ = [
    "GrowthFit",
    "MellinSample",
    "mean_square",
    "fit_theta_D",
    "theorem3_c",
    "bound_ratio_series",
    "mellin",
    "mellin_identity_check",
    "perron_exponent",
    "beta_from_mu",
    "smooth_short_interval",
]

THETA_ZERO_THRESHOLD = 1e-3

MIN_FIT_SAMPLES = 16
MIN_FIT_DECADES = 2.0
MIN_FIT_X = 10.0

# margin by which Re s must clear the convergence abscissa 1 + alpha_hint
MELLIN_MARGIN = 0.25
# slack exponent in the tail envelope |f(x)| <= K x^(alpha_hint + 0.1)
MELLIN_TAIL_SLACK = 0.1


@dataclass(frozen=True)
class GrowthFit:
    """Fitted growth law M(X) ~ X^(1+2*theta) (log X)^D over a window."""

    theta: float
    D: float
    slope_stderr: float
    window: tuple[float, float]
    n_samples: int

    def __post_init__(self):
        if self.n_samples < MIN_FIT_SAMPLES:
            raise FitError(f"need >= {MIN_FIT_SAMPLES} samples, got {self.n_samples}")
        if self.window[0] < MIN_FIT_X:
            raise FitError(f"fit window must start at X >= {MIN_FIT_X}")


@dataclass(frozen=True)
class MellinSample:
    """One truncated transform value with its tail bound."""

    s: complex
    value: complex
    X_max: float
    tail_est: float

    def __post_init__(self):
        if self.tail_est < 0:
            raise DomainError("tail_est must be >= 0")


def _square_prefix(series: ErrorTermSeries) -> np.ndarray:
    """Exact int_1^k u(x)^2 dx at integer k = 1..N, memoized on the series.

    On [n, n+1) the error term is S(n) - M(x) with S constant, so each unit
    interval contributes S_n^2 - 2 S_n (Mi(n+1) - Mi(n)) + M2i(n+1) - M2i(n)
    where Mi, M2i are the antiderivatives of M and M^2.
    """
    if series._sq_prefix is None:
        n_max = series.cache.length
        steps = series.step_values()[1:n_max]  # S_n for n = 1..N-1
        grid = np.arange(1, n_max + 1, dtype=np.float64)
        mi = series.main.antiderivative(grid)
        m2i = series.main.square_antiderivative(grid)
        pieces = steps * steps - 2.0 * steps * np.diff(mi) + np.diff(m2i)
        out = np.empty(n_max, dtype=np.float64)
        out[0] = 0.0
        np.cumsum(pieces, out=out[1:])
        series._sq_prefix = out
    return series._sq_prefix


def mean_square(f, X: float, spec: QuadratureSpec | None = None) -> float:
    """int_1^X f(x)^2 dx; exact for cached step error terms, else adaptive."""
    if X < 1.0:
        raise DomainError(f"mean square window needs X >= 1, got {X}")
    if X == 1.0:
        return 0.0
    if isinstance(f, ErrorTermSeries) and f.cache is not None and f.main is not None:
        if X > f.x_max:
            raise RangeError(f"{f.label}: X={X} beyond cached range {f.x_max}")
        prefix = _square_prefix(f)
        k = int(X)
        total = float(prefix[k - 1])
        frac = X - k
        if frac > 0.0:
            s_k = float(f.step_values()[k])
            mi = f.main.antiderivative(np.array([k, X], dtype=np.float64))
            m2i = f.main.square_antiderivative(np.array([k, X], dtype=np.float64))
            total += s_k * s_k * frac - 2.0 * s_k * (mi[1] - mi[0]) + (m2i[1] - m2i[0])
        return total
    fn = f.evaluator if isinstance(f, ErrorTermSeries) else f
    value, _ = integrate(lambda x: fn(x) ** 2, 1.0, X, spec)
    return value


def fit_theta_D(M) -> GrowthFit:
    """Least-squares (theta, D) from (X, mean-square) samples.

    Joint OLS in log M = b0 + b1 log X + b2 log log X; the reported stderr
    is that of the b1 coefficient.
    """
    pts = [(float(x), float(v)) for x, v in M]
    if len(pts) < MIN_FIT_SAMPLES:
        raise FitError(f"need >= {MIN_FIT_SAMPLES} samples, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(xs < MIN_FIT_X):
        raise FitError(f"fit window must lie in X >= {MIN_FIT_X}")
    if np.any(vs <= 0.0):
        raise FitError("mean-square samples must be positive")
    lo, hi = float(xs.min()), float(xs.max())
    if math.log10(hi / lo) < MIN_FIT_DECADES:
        raise FitError(
            f"samples span {math.log10(hi / lo):.2f} decades, need >= {MIN_FIT_DECADES}"
        )
    lx = np.log(xs)
    design = np.column_stack([np.ones_like(lx), lx, np.log(lx)])
    # scale columns to unit norm so the condition test reflects the window,
    # not the raw magnitudes
    norms = np.linalg.norm(design, axis=0)
    cond = np.linalg.cond(design / norms)
    if not np.isfinite(cond) or cond > 1e8:
        raise FitError(f"ill-conditioned fit window (cond {cond:.2e})")
    target = np.log(vs)
    beta, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ beta
    dof = max(len(pts) - 3, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return GrowthFit(
        theta=(float(beta[1]) - 1.0) / 2.0,
        D=float(beta[2]),
        slope_stderr=math.sqrt(max(cov[1, 1], 0.0)),
        window=(lo, hi),
        n_samples=len(pts),
    )


def theorem3_c(theta: float, D: float) -> float:
    """Log power c with C_a[f](x) = O(x^theta (log x)^c) given the growth law.

    c = D + 1 for theta > 0; the boundary theta = 0 picks up one more log
    (c = D + 2).  Fitted thetas below the zero threshold are treated as 0.
    """
    if theta < 0.0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    if theta < THETA_ZERO_THRESHOLD:
        return D + 2.0
    return D + 1.0


def bound_ratio_series(f, a: float, fit: GrowthFit, xs) -> list[tuple[float, float]]:
    """Diagnostic ratios C_a[f](x) / (x^theta (log x)^c) on an increasing grid.

    Boundedness of the ratio series is the numerical shadow of the
    convolution bound; on closed-form fixtures it is decreasing.
    """
    pts = [float(x) for x in xs]
    if any(b <= a_ for a_, b in zip(pts, pts[1:])):
        raise DomainError("xs must be strictly increasing")
    if pts and pts[0] <= 1.0:
        raise DomainError("ratios need x > 1")
    fn = f.evaluator if isinstance(f, ErrorTermSeries) else f
    c = theorem3_c(fit.theta, fit.D)
    out = []
    for x in pts:
        value = self_convolve(fn, a, x).value
        out.append((x, value / (x**fit.theta * math.log(x) ** c)))
    return out


def _resolve_integrand(f, alpha_hint):
    if isinstance(f, ErrorTermSeries):
        return f.evaluator, f.alpha_hint, f.x_max
    return f, (0.0 if alpha_hint is None else float(alpha_hint)), math.inf


def mellin(
    f,
    s: complex,
    X_max: float,
    spec: QuadratureSpec | None = None,
    alpha_hint: float | None = None,
) -> MellinSample:
    """Truncated transform int_1^X_max f(x) x^(-s) dx with a tail estimate.

    Re s must clear the convergence abscissa 1 + alpha_hint by the fixed
    margin.  The tail is bounded by the envelope |f(x)| <= K x^(hint+0.1)
    with K fitted on the last decade of the truncation window.
    """
    s = complex(s)
    fn, hint, n_max = _resolve_integrand(f, alpha_hint)
    if X_max <= 1.0:
        raise DomainError(f"X_max must exceed 1, got {X_max}")
    if X_max > n_max:
        raise RangeError(f"X_max={X_max} beyond cached range {n_max}")
    if s.real < 1.0 + hint + MELLIN_MARGIN:
        raise DomainError(
            f"Re s = {s.real} is inside the margin of the abscissa {1.0 + hint}"
        )
    # substitute x = e^u: int_0^{log X_max} f(e^u) e^{(1-s)u} du
    u_hi = math.log(X_max)
    sigma = s.real - 1.0
    omega = s.imag
    cap = None if omega == 0.0 else (spec or DEFAULT_QUAD).osc_step * 2.0 * math.pi / abs(omega)
    re_val, re_err = integrate(
        lambda u: fn(math.exp(u)) * math.exp(-sigma * u) * math.cos(omega * u),
        0.0,
        u_hi,
        spec,
        max_panel_width=cap,
    )
    if omega == 0.0:
        value: complex = re_val
    else:
        im_val, _ = integrate(
            lambda u: -fn(math.exp(u)) * math.exp(-sigma * u) * math.sin(omega * u),
            0.0,
            u_hi,
            spec,
            max_panel_width=cap,
        )
        value = complex(re_val, im_val)
    ahat = hint + MELLIN_TAIL_SLACK
    probes = np.geomspace(X_max / 10.0, X_max, 17)
    envelope = max(abs(fn(float(x))) / float(x) ** ahat for x in probes)
    tail = envelope * X_max ** (ahat + 1.0 - s.real) / (s.real - 1.0 - ahat)
    return MellinSample(s=s, value=value, X_max=float(X_max), tail_est=tail)


def mellin_identity_check(
    f,
    g,
    s: complex,
    a: float = 1.0,
    spec: QuadratureSpec | None = None,
    X_max: float = 1e4,
) -> tuple[complex, complex, float]:
    """Compare m[f (*) g](s) with m[f](s) m[g](s); return (lhs, rhs, defect).

    The convolution transform factorizes exactly when both transforms
    converge with margin; the defect reported is |lhs - rhs|.
    """
    left = mellin(f, s, X_max, spec)

    def conv(x: float) -> float:
        if spec is None:
            return convolve(ConvolveRequest(f=f, g=g, a=a, x=x)).value
        return convolve(ConvolveRequest(f=f, g=g, a=a, x=x, spec=spec)).value

    lhs = mellin(conv, left.s, X_max, spec).value
    rhs = left.value * mellin(g, left.s, X_max, spec).value
    return lhs, rhs, abs(lhs - rhs)


def _exact_ratio(num, den, x) -> float | Fraction:
    if isinstance(x, numbers.Rational):
        return Fraction(num) / Fraction(den)
    return float(num) / float(den)


def perron_exponent(theta):
    """Map a Dirichlet-coefficient growth exponent theta >= 1 to theta/(theta+1).

    Exact (Fraction) for rational input; the truncation-balance argument
    behind the map needs theta >= 1.
    """
    if theta < 1:
        raise DomainError(f"exponent map needs theta >= 1, got {theta}")
    return _exact_ratio(theta, theta + 1, theta)


def beta_from_mu(mu):
    """Map a critical-line growth exponent mu in [0, 1/2] to 2/(5 - 4 mu)."""
    if mu < 0 or mu > Fraction(1, 2):
        raise DomainError(f"mu must lie in [0, 1/2], got {mu}")
    return _exact_ratio(2, 5 - 4 * mu, mu)


def smooth_short_interval(u, X: float, H: float) -> float:
    """Window average H^(-1) int_{X-H}^{X+H} u(x) dx.

    Note the literal normalization: the window has width 2H, so a constant
    u = c averages to 2c.  Exact for cached step error terms.
    """
    if H < 1.0 or H > X / 2.0:
        raise RangeError(f"need 1 <= H <= X/2, got H={H}, X={X}")
    lo, hi = X - H, X + H
    if isinstance(u, ErrorTermSeries) and u.cache is not None and u.main is not None:
        if hi > u.x_max or lo < 1.0:
            raise RangeError(f"{u.label}: window [{lo}, {hi}] beyond cached range")
        steps = u.step_values()

        def step_integral(t: float) -> float:
            # int_1^t S(floor(x)) dx
            k = int(t)
            return float(np.sum(steps[1:k])) + steps[k] * (t - k)

        step_part = step_integral(hi) - step_integral(lo)
        ends = np.array([lo, hi], dtype=np.float64)
        mi = u.main.antiderivative(ends)
        return (step_part - (mi[1] - mi[0])) / H
    fn = u.evaluator if isinstance(u, ErrorTermSeries) else u
    value, _ = integrate(fn, lo, hi)
    return value / H
