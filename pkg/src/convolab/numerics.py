"""Adaptive quadrature and the small set of special functions used everywhere.

Quadrature
----------
The engine is globally adaptive bisection on Gauss-Kronrod 7/15 panels.  Each
panel stores the 15-point Kronrod value K and the embedded 7-point Gauss value
G; |K - G| serves as the panel error surrogate.  The panel with the largest
surrogate is split until the summed surrogate meets

    max(abs_tol, rel_tol * |value|)

or the panel budget runs out.  Bookkeeping is deterministic: heap ties break
on the left endpoint and the final value is accumulated over panels sorted by
position, so results do not depend on evaluation scheduling.

Oscillatory integrands (anything built from zeta on the critical line) get an
initial panel width capped at ``osc_step`` so that no oscillation is stepped
over before refinement starts; the default 0.25 sits well below the mean gap
of critical-line zeros at desk-scale heights.

Zeta on the real axis
---------------------
``zeta_real`` uses Euler-Maclaurin with six Bernoulli corrections:

    zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
              + sum_{k=1..6} B_{2k}/(2k)! * (s)_{2k-1} * N^(1-s-2k)

with N = max(30, ceil(2|s|)) and (s)_m the rising factorial.  This keeps the
relative error below 1e-12 for real s in (0, 50], verified against an
independent alternating-series evaluation in the test suite.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "Constants",
    "CONSTANTS",
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "gamma_fn",
    "zeta_real",
    "integrate",
]


@dataclass(frozen=True)
class Constants:
    """Frozen numerical constants shared by the whole package."""

    euler_gamma: float = 0.5772156649015328606065
    two_pi: float = 6.283185307179586476925287
    mu_half_huxley: Fraction = Fraction(32, 205)


CONSTANTS = Constants()


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and panel limits governing all integrations.

    Attributes
    ----------
    abs_tol, rel_tol:
        Absolute / relative targets for the summed error surrogate.
    max_panels:
        Hard cap on the number of panels; exceeding it raises
        :class:`~convolab.errors.ConvergenceError`.
    min_step:
        Panels narrower than this are never split further.
    osc_step:
        Initial panel width cap applied to oscillatory integrands.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_panels: int = 4096
    min_step: float = 1e-12
    osc_step: float = 0.25

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_panels < 1:
            raise DomainError("max_panels must be at least 1")
        if not (self.min_step > 0 and self.osc_step > 0):
            raise DomainError("step limits must be positive")


DEFAULT_QUAD = QuadratureSpec()


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments.

    Relative error is below 1e-13 on (0, 50].  Non-positive and non-finite
    arguments raise :class:`~convolab.errors.DomainError`; so do arguments
    large enough to overflow binary64.
    """
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma_fn requires finite x > 0, got {x!r}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise DomainError(f"gamma_fn({x}) overflows binary64") from exc


# Bernoulli numbers B_2, B_4, ..., B_12 and (2k)! for the EM corrections.
_B2K = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
)
_EM_COEF = tuple(float(b) / math.factorial(2 * k) for k, b in enumerate(_B2K, start=1))


def zeta_real(s: float) -> float:
    """Riemann zeta on the positive real axis, s > 0, s != 1.

    Euler-Maclaurin with N = max(30, ceil(2|s|)) explicit terms and six
    Bernoulli corrections; relative error < 1e-12 for s <= 50.
    """
    if not math.isfinite(s) or s <= 0.0:
        raise DomainError(f"zeta_real requires finite s > 0, got {s!r}")
    if s == 1.0:
        raise PoleError("zeta has a pole at s = 1")
    n_terms = max(30, math.ceil(2 * abs(s)))
    n = np.arange(1, n_terms, dtype=np.float64)
    acc = float(np.sum(n ** -s))
    acc += n_terms ** (1.0 - s) / (s - 1.0)
    acc += 0.5 * n_terms ** -s
    poch = s
    for k, coef in enumerate(_EM_COEF, start=1):
        acc += coef * poch * n_terms ** (-s - 2 * k + 1)
        poch *= (s + 2 * k - 1) * (s + 2 * k)
    return acc


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 panel rule.
#
# Abscissae/weights frozen at 33 digits (QUADPACK values); the test suite
# re-verifies polynomial exactness to degree 22.
# ---------------------------------------------------------------------------

_GK_X = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ]
)
_GK_W = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_G_W = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

# 15 nodes in ascending order; Gauss nodes occupy the odd positions.
NODES15 = np.concatenate([-_GK_X[:-1], _GK_X[::-1]])
WEIGHTS15 = np.concatenate([_GK_W[:-1], _GK_W[::-1]])
_W7 = np.zeros(15)
_W7[1:14:2] = np.concatenate([_G_W[:-1], _G_W[::-1]])


def _panel(f, a: float, b: float) -> tuple[float, float]:
    """K15 value and |K15 - G7| error surrogate on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.array([f(mid + half * x) for x in NODES15], dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"integrand returned a non-finite value on [{a}, {b}]")
    k15 = half * float(vals @ WEIGHTS15)
    g7 = half * float(vals @ _W7)
    return k15, abs(k15 - g7)


def integrate(
    f,
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
    *,
    max_panel_width: float | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over [lo, hi] adaptively; return (value, err_est).

    ``max_panel_width`` caps the width of the initial panels; pass
    ``spec.osc_step`` for oscillatory integrands.  Raises
    :class:`~convolab.errors.ConvergenceError` (carrying the best estimate)
    when the panel budget is exhausted or all remaining panels are already at
    ``min_step``.
    """
    if spec is None:
        spec = DEFAULT_QUAD
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("integration endpoints must be finite")
    if lo > hi:
        raise DomainError(f"integrate requires lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0, 0.0

    seeds = [lo, hi]
    if max_panel_width is not None and max_panel_width > 0:
        n0 = max(1, math.ceil((hi - lo) / max_panel_width))
        seeds = [lo + (hi - lo) * i / n0 for i in range(n0 + 1)]

    # heap entries: (-err, a, b, value); ties resolved by position.
    heap: list[tuple[float, float, float, float]] = []
    total = err = 0.0
    for a, b in zip(seeds, seeds[1:]):
        v, e = _panel(f, a, b)
        total += v
        err += e
        heapq.heappush(heap, (-e, a, b, v))

    n_panels = len(heap)
    while err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if n_panels >= spec.max_panels:
            value, err = _assemble(heap)
            raise ConvergenceError(
                f"panel budget {spec.max_panels} exhausted "
                f"(err_est={err:.3e}, value={value:.6e})",
                value=value,
                err_est=err,
            )
        neg_e, a, b, v = heapq.heappop(heap)
        if (b - a) <= 2 * spec.min_step:
            value, err = _assemble(heap, extra=(neg_e, a, b, v))
            raise ConvergenceError(
                f"panel at [{a}, {b}] reached min_step without converging",
                value=value,
                err_est=err,
            )
        mid = 0.5 * (a + b)
        v1, e1 = _panel(f, a, mid)
        v2, e2 = _panel(f, mid, b)
        total += v1 + v2 - v
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        n_panels += 1

    return _assemble(heap)


def _assemble(heap, extra=None) -> tuple[float, float]:
    """Sum panels in left-to-right order for a scheduling-free result."""
    panels = list(heap)
    if extra is not None:
        panels.append(extra)
    panels.sort(key=lambda p: p[1])
    value = math.fsum(p[3] for p in panels)
    err = math.fsum(-p[0] for p in panels)
    return value, err
