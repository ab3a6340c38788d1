"""Exact arithmetic sequences and the error terms built on top of them.

Five sequences are supported, all computed exactly:

    divisor   d(n)   = #{(a,b) : ab = n}
    divisor3  d3(n)  = #{(a,b,c) : abc = n}
    abelian   a(n)   = number of abelian groups of order n
                       (multiplicative, a(p^e) = p(e) partitions)
    tau       tau(n) = coefficients of q * prod_{m>=1} (1 - q^m)^24
    rankin    c(n)   = n^-11 * sum_{m^2 | n} m^22 * tau(n/m^2)^2
                       (exact rationals with denominator dividing n^11)

The divisor sieves are straight array sieves.  The abelian sieve multiplies
by the partition count p(e) exactly on the set {n : v_p(n) = e} for every
prime power p^e <= N with e >= 2 (e = 1 contributes a factor 1).  The tau
series is the 24th power of Euler's pentagonal series, raised by repeated
squaring of truncated polynomials; each truncated product is done exactly
with one big-integer multiply per sign block (Kronecker substitution), which
keeps the default cap of 2e5 coefficients under a few seconds.

Around the sequences sit the summatory function (exact), the smooth main
terms as sums of c * x^alpha * log(x)^m, and the corresponding error terms:
step-minus-smooth evaluators that later modules integrate exactly.

On-disk format (one file per cache, plus a ``.sha256`` sidecar):

    8-byte magic "CONVOLAB" | u32 version | u8 kind tag | u64 count |
    count values, each a u32 byte length + little-endian signed payload;
    the rankin kind stores numerator/denominator interleaved (2 ints/value).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable

import gmpy2
import numpy as np

from .errors import (
    CacheFormatError,
    CapError,
    DependencyError,
    DomainError,
    FitError,
    RangeError,
)
from .numerics import CONSTANTS, zeta_real

__all__ = [
    "SequenceCache",
    "MainTermSpec",
    "ErrorTermSeries",
    "RankinContext",
    "sieve_divisor",
    "sieve_divisor3",
    "sieve_abelian",
    "tau_series",
    "rankin_coeffs",
    "summatory",
    "abelian_main_coeffs",
    "divisor_main",
    "abelian_main",
    "error_divisor",
    "error_abelian",
    "rs_fit_C",
    "error_rs",
    "rs_explicit_formula",
    "divisor_error_series",
    "abelian_error_series",
    "rs_error_series",
    "save_cache",
    "load_cache",
    "cache_path",
    "TAU_DEFAULT_CAP",
    "SIEVE_CAP",
]

MAGIC = b"CONVOLAB"
FORMAT_VERSION = 1
KIND_TAGS = {"divisor": 1, "divisor3": 2, "abelian": 3, "tau": 4, "rankin": 5}
TAG_KINDS = {v: k for k, v in KIND_TAGS.items()}

TAU_DEFAULT_CAP = 200_000
SIEVE_CAP = 500_000_000  # int64 array of this length is ~4 GB; refuse beyond

KAPPA = 12  # weight of the underlying cusp form; fixed for this package


# ---------------------------------------------------------------------------
# Sequence container
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class SequenceCache:
    """An exact integer/rational sequence indexed 1..N (index 0 is padding).

    ``values`` is an int64 numpy array for the bounded kinds
    (divisor/divisor3/abelian), a list of Python ints for tau, and a list of
    :class:`fractions.Fraction` for rankin.
    """

    kind: str
    values: np.ndarray | list
    format_version: int = FORMAT_VERSION
    _floats: np.ndarray | None = field(default=None, init=False, repr=False)
    _prefix: np.ndarray | None = field(default=None, init=False, repr=False)
    _prefix_exact: list | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KIND_TAGS:
            raise DomainError(f"unknown sequence kind {self.kind!r}")
        if len(self.values) < 2:
            raise DomainError("a sequence cache must hold at least n = 1")
        if self.values[1] != 1:
            raise CacheFormatError(f"{self.kind}: values[1] must be 1")
        if self.kind in ("divisor", "divisor3", "abelian"):
            if int(np.min(self.values[1:])) < 1:
                raise CacheFormatError(f"{self.kind}: values must be >= 1")
        elif self.kind == "rankin":
            if any(v < 0 for v in self.values[1:]):
                raise CacheFormatError("rankin: values must be >= 0")

    @property
    def length(self) -> int:
        return len(self.values) - 1

    def value(self, n: int):
        """Exact value at index n, 1 <= n <= length."""
        if not 1 <= n <= self.length:
            raise RangeError(f"index {n} outside cached range 1..{self.length}")
        v = self.values[n]
        return int(v) if isinstance(v, (int, np.integer)) else v

    def floats(self) -> np.ndarray:
        """Values as float64, index-aligned (entry 0 is 0)."""
        if self._floats is None:
            if isinstance(self.values, np.ndarray):
                out = self.values.astype(np.float64)
                out[0] = 0.0
            else:
                out = np.array([0.0] + [float(v) for v in self.values[1:]])
            self._floats = out
        return self._floats

    def prefix_floats(self) -> np.ndarray:
        """Cumulative sums as float64: entry m is sum_{n<=m} values[n]."""
        if self._prefix is None:
            self._prefix = np.cumsum(self.floats())
        return self._prefix


def _check_sieve_budget(n: int) -> None:
    if n < 1:
        raise DomainError(f"sequence length must be >= 1, got {n}")
    if n > SIEVE_CAP:
        raise CapError(f"N = {n} exceeds the sieve memory cap {SIEVE_CAP}")


def sieve_divisor(n_max: int) -> SequenceCache:
    """d(n) for 1 <= n <= N by the array sieve (add 1 on every multiple)."""
    _check_sieve_budget(n_max)
    d = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, n_max + 1):
        d[i::i] += 1
    return SequenceCache("divisor", d)


def sieve_divisor3(n_max: int) -> SequenceCache:
    """d3(n) = sum_{m | n} d(n/m), sieved from the divisor array."""
    _check_sieve_budget(n_max)
    d = sieve_divisor(n_max).values
    d3 = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, n_max + 1):
        d3[i::i] += d[1 : n_max // i + 1]
    return SequenceCache("divisor3", d3)


@lru_cache(maxsize=1)
def _partition_table(m_max: int = 64) -> tuple[int, ...]:
    """p(0..m_max) by Euler's pentagonal recurrence."""
    p = [1] + [0] * m_max
    for n in range(1, m_max + 1):
        k, sign, acc = 1, 1, 0
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            acc += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                acc += sign * p[n - g2]
            k += 1
            sign = -sign
        p[n] = acc
    return tuple(p)


def sieve_abelian(n_max: int) -> SequenceCache:
    """a(n) for n <= N: multiplicative, a(p^e) = partition count p(e).

    Only exponents e >= 2 contribute (p(1) = 1), so it suffices to visit
    prime powers p^e <= N with p <= sqrt(N) and multiply by p(e) on the set
    {n : v_p(n) = e}.
    """
    _check_sieve_budget(n_max)
    part = _partition_table()
    vals = np.ones(n_max + 1, dtype=np.int64)
    vals[0] = 0  # index 0 is padding in every cache
    root = math.isqrt(n_max)
    is_prime = np.ones(root + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(root) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    for p in np.nonzero(is_prime)[0]:
        p = int(p)
        pe, e = p * p, 2
        while pe <= n_max:
            pe_next = pe * p
            multiples = np.arange(pe, n_max + 1, pe, dtype=np.int64)
            if pe_next <= n_max:
                multiples = multiples[multiples % pe_next != 0]
            vals[multiples] *= part[e]
            pe, e = pe_next, e + 1
    return SequenceCache("abelian", vals)


# ---------------------------------------------------------------------------
# tau via the 24th power of the pentagonal series
# ---------------------------------------------------------------------------


def _poly_mul_trunc(a: list[int], b: list[int], n_keep: int) -> list[int]:
    """Exact truncated product of integer polynomials by Kronecker packing.

    Coefficients are split by sign, packed into fixed-width byte blocks, and
    multiplied as single big integers; the block width is sized so that no
    convolution coefficient can overflow into its neighbour.
    """
    la, lb = len(a), len(b)
    max_a = max(map(abs, a))
    max_b = max(map(abs, b))
    conv_bound = max_a * max_b * min(la, lb)
    width = (conv_bound.bit_length() + 2 + 7) // 8

    def pack(coeffs: list[int], sign: int) -> gmpy2.mpz:
        buf = bytearray(width * len(coeffs))
        for i, c in enumerate(coeffs):
            if sign * c > 0:
                buf[i * width : (i + 1) * width] = (sign * c).to_bytes(width, "little")
        return gmpy2.mpz(int.from_bytes(buf, "little"))

    ap, an = pack(a, 1), pack(a, -1)
    if a is b:
        bp, bn = ap, an
        pos = ap * bp + an * bn
        neg = ap * bn
        neg += neg
    else:
        bp, bn = pack(b, 1), pack(b, -1)
        pos = ap * bp + an * bn
        neg = ap * bn + an * bp

    def unpack(z: gmpy2.mpz) -> list[int]:
        raw = int(z).to_bytes(width * (la + lb), "little")
        return [
            int.from_bytes(raw[i * width : (i + 1) * width], "little")
            for i in range(n_keep)
        ]

    return [p - q for p, q in zip(unpack(pos), unpack(neg))]


def _pentagonal_series(n_keep: int) -> list[int]:
    """Coefficients of prod (1 - q^m) = sum (-1)^k q^(k(3k +- 1)/2)."""
    e = [0] * n_keep
    e[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= n_keep and g2 >= n_keep:
            break
        sign = -1 if k % 2 else 1
        if g1 < n_keep:
            e[g1] = sign
        if g2 < n_keep:
            e[g2] = sign
        k += 1
    return e


def tau_series(n_max: int, cap: int | None = TAU_DEFAULT_CAP) -> SequenceCache:
    """tau(n) for n <= N from the eta-product, exactly.

    The pentagonal series E is raised to the 24th power as
    E^24 = ((E^2)^2)^2)^2 * (E^2)^2)^2 -- five truncated multiplies total.
    Pass ``cap=None`` (CLI: ``--force``) to exceed the default cap of 2e5.
    """
    if n_max < 1:
        raise DomainError(f"sequence length must be >= 1, got {n_max}")
    if cap is not None and n_max > cap:
        raise CapError(
            f"tau_series N = {n_max} exceeds the cap {cap}; "
            "pass cap=None (CLI --force) to override"
        )
    e1 = _pentagonal_series(n_max)
    e2 = _poly_mul_trunc(e1, e1, n_max)
    e4 = _poly_mul_trunc(e2, e2, n_max)
    e8 = _poly_mul_trunc(e4, e4, n_max)
    e16 = _poly_mul_trunc(e8, e8, n_max)
    e24 = _poly_mul_trunc(e16, e8, n_max)
    # tau(n) is the coefficient of q^(n-1) in E^24 (the leading q shifts by 1)
    return SequenceCache("tau", [0] + e24[:n_max])


def rankin_coeffs(n_max: int, tau_cache: SequenceCache | None = None) -> SequenceCache:
    """c(n) = n^-11 sum_{m^2 | n} m^22 tau(n/m^2)^2 as exact Fractions."""
    if tau_cache is None:
        raise DependencyError("rankin_coeffs needs a tau cache; build one with tau_series")
    if tau_cache.kind != "tau":
        raise DependencyError(f"expected a tau cache, got kind {tau_cache.kind!r}")
    if tau_cache.length < n_max:
        raise DependencyError(
            f"tau cache covers n <= {tau_cache.length}, need n <= {n_max}"
        )
    tau = tau_cache.values
    num = [0] * (n_max + 1)
    for n in range(1, n_max + 1):
        num[n] = tau[n] * tau[n]
    m = 2
    while m * m <= n_max:
        m2 = m * m
        m22 = m**22
        for n in range(m2, n_max + 1, m2):
            num[n] += m22 * tau[n // m2] ** 2
        m += 1
    vals: list = [Fraction(0)]
    for n in range(1, n_max + 1):
        vals.append(Fraction(num[n], n**11))
    return SequenceCache("rankin", vals)


# ---------------------------------------------------------------------------
# Summatory function
# ---------------------------------------------------------------------------


def summatory(cache: SequenceCache, x: float):
    """Exact partial sum over n <= x; integer kinds give int, rankin Fraction."""
    if x < 1:
        raise RangeError(f"summatory needs x >= 1, got {x}")
    if x > cache.length:
        raise RangeError(f"x = {x} beyond cached range 1..{cache.length}")
    m = int(math.floor(x))
    if cache.kind == "rankin":
        # mpq keeps the running denominators reduced; a naive Fraction loop
        # carries huge intermediate gcds.
        acc = gmpy2.mpq(0)
        for v in cache.values[1 : m + 1]:
            acc += gmpy2.mpq(v.numerator, v.denominator)
        return Fraction(int(acc.numerator), int(acc.denominator))
    if isinstance(cache.values, np.ndarray):
        return int(np.sum(cache.values[1 : m + 1]))
    return sum(cache.values[1 : m + 1])


# ---------------------------------------------------------------------------
# Main terms: sums of  c * x^alpha * log(x)^m
# ---------------------------------------------------------------------------


def _int_power_log(a: float, m: int, x):
    """integral_1^x t^a log(t)^m dt for a != -1 (closed form by recurrence)."""
    x = np.asarray(x, dtype=np.float64)
    lx = np.log(x)
    p = x ** (a + 1.0)
    # I_0 = (x^(a+1) - 1)/(a+1);  I_m = x^(a+1) lx^m/(a+1) - m/(a+1) I_{m-1}
    acc = (p - 1.0) / (a + 1.0)
    for j in range(1, m + 1):
        acc = (p * lx**j) / (a + 1.0) - j / (a + 1.0) * acc
    return acc


@dataclass(frozen=True)
class MainTermSpec:
    """A smooth main term sum_i c_i x^(alpha_i) log(x)^(m_i).

    Terms are kept sorted by (exponent desc, log power desc); exponents must
    be strictly decreasing across groups and the leading coefficient must be
    positive.
    """

    terms: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        if not self.terms:
            raise DomainError("MainTermSpec needs at least one term")
        ordered = tuple(sorted(self.terms, key=lambda t: (-t[1], -t[2])))
        object.__setattr__(self, "terms", ordered)
        seen = set()
        for _, a, m in ordered:
            if m < 0:
                raise DomainError("log powers must be >= 0")
            if (a, m) in seen:
                raise DomainError(f"duplicate (exponent, log power) term ({a}, {m})")
            seen.add((a, m))
        if ordered[0][0] <= 0:
            raise DomainError("leading main-term coefficient must be positive")

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        lx = np.log(x)
        acc = np.zeros_like(x)
        for c, a, m in self.terms:
            acc = acc + c * x**a * lx**m
        return acc if acc.shape else float(acc)

    def antiderivative(self, x):
        """F with F' = value and F(1) = 0."""
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros_like(x)
        for c, a, m in self.terms:
            acc = acc + c * _int_power_log(a, m, x)
        return acc if acc.shape else float(acc)

    def square_antiderivative(self, x):
        """G with G' = value^2 and G(1) = 0 (pairwise expansion)."""
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros_like(x)
        n = len(self.terms)
        for i in range(n):
            ci, ai, mi = self.terms[i]
            for j in range(i, n):
                cj, aj, mj = self.terms[j]
                c = ci * cj * (1.0 if i == j else 2.0)
                acc = acc + c * _int_power_log(ai + aj, mi + mj, x)
        return acc if acc.shape else float(acc)


@lru_cache(maxsize=1)
def abelian_main_coeffs() -> tuple[float, ...]:
    """The six products prod_{k >= 1, k != j} zeta(k/j), j = 1..6.

    Each product is truncated once its tail is provably below 1e-12: for
    k/j >= 2 we have log zeta(s) <= 3 * 2^-s, so the tail past k is dominated
    by the geometric sum 3 * 2^(-(k+1)/j) / (1 - 2^(-1/j)).
    """
    out = []
    for j in range(1, 7):
        log_mag, sign = 0.0, 1.0
        k = 1
        while True:
            if k != j:
                z = zeta_real(k / j)
                if z < 0:
                    sign = -sign
                log_mag += math.log(abs(z))
            if k / j >= 2.0:
                tail = 3.0 * 2.0 ** (-(k + 1) / j) / (1.0 - 2.0 ** (-1.0 / j))
                if tail < 1e-12:
                    break
            k += 1
        out.append(sign * math.exp(log_mag))
    return tuple(out)


_DIVISOR_CONST = 2.0 * CONSTANTS.euler_gamma - 1.0


def divisor_main() -> MainTermSpec:
    """x log x + (2 gamma - 1) x, the smooth count of divisor pairs."""
    return MainTermSpec(((1.0, 1.0, 1), (_DIVISOR_CONST, 1.0, 0)))


def abelian_main() -> MainTermSpec:
    """sum_{j=1..6} A_j x^(1/j) with the zeta-product coefficients."""
    coeffs = abelian_main_coeffs()
    return MainTermSpec(tuple((coeffs[j - 1], 1.0 / j, 0) for j in range(1, 7)))


# ---------------------------------------------------------------------------
# Error terms (step sum minus smooth main term)
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ErrorTermSeries:
    """An evaluator x -> u(x) on [1, N] plus growth metadata.

    ``cache`` and ``main`` are populated for the step-minus-smooth error
    terms so downstream consumers can take the exact integration path; for a
    generic evaluator they stay None and quadrature is used instead.
    """

    evaluator: Callable[[float], float]
    alpha_hint: float
    label: str
    cache: SequenceCache | None = None
    main: MainTermSpec | None = None
    scale: float = 1.0
    _sq_prefix: np.ndarray | None = field(default=None, init=False, repr=False)
    _step_prefix: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.alpha_hint < 0:
            raise DomainError("alpha_hint must be >= 0")

    @property
    def x_max(self) -> float:
        return float(self.cache.length) if self.cache is not None else math.inf

    def step_values(self) -> np.ndarray:
        """Partial sums S(n) of the cached sequence, scaled, as float64."""
        if self.cache is None:
            raise DependencyError(f"{self.label}: no cache attached")
        if self._step_prefix is None:
            self._step_prefix = self.cache.prefix_floats() * self.scale
        return self._step_prefix


def _range_check(x: float, n_max: int, what: str) -> int:
    if x < 1:
        raise RangeError(f"{what} needs x >= 1, got {x}")
    if x > n_max:
        raise RangeError(f"{what}: x = {x} beyond cached range 1..{n_max}")
    return int(math.floor(x))


def error_divisor(x: float, cache: SequenceCache) -> float:
    """Step count of divisors minus x(log x + 2 gamma - 1)."""
    if cache.kind != "divisor":
        raise DependencyError(f"expected a divisor cache, got {cache.kind!r}")
    m = _range_check(x, cache.length, "error_divisor")
    s = float(cache.prefix_floats()[m])
    return s - x * (math.log(x) + _DIVISOR_CONST)


def error_abelian(
    x: float, cache: SequenceCache, coeffs: tuple[float, ...] | None = None
) -> float:
    """Abelian-group count minus its six-term smooth main term."""
    if cache.kind != "abelian":
        raise DependencyError(f"expected an abelian cache, got {cache.kind!r}")
    m = _range_check(x, cache.length, "error_abelian")
    if coeffs is None:
        coeffs = abelian_main_coeffs()
    s = float(cache.prefix_floats()[m])
    main = sum(coeffs[j - 1] * x ** (1.0 / j) for j in range(1, 7))
    return s - main


# ---------------------------------------------------------------------------
# Rankin-Selberg: fitted mean value, error term, truncated oscillatory sum
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class RankinContext:
    """Fitted linear mean value of the rankin partial sums.

    ``cache`` is the coefficient cache the fit was made on; it rides along so
    the error term and the truncated oscillatory formula can be evaluated
    from the context alone.
    """

    kappa: int
    C_hat: float
    fit_window: tuple[float, float]
    cache: SequenceCache

    def __post_init__(self):
        if self.kappa != KAPPA:
            raise DomainError(f"only weight {KAPPA} is supported")
        if not self.C_hat > 0:
            raise FitError(f"fitted mean-value constant must be positive, got {self.C_hat}")


def rs_fit_C(
    cache: SequenceCache, window: tuple[float, float], n_samples: int = 24
) -> RankinContext:
    """Fit S(x) ~ C x through the origin on a geometric integer sample.

    The sample points are the distinct integers round(geomspace(X_lo, X_hi));
    fewer than 16 of them is a fit error.
    """
    if cache.kind != "rankin":
        raise DependencyError(f"expected a rankin cache, got {cache.kind!r}")
    x_lo, x_hi = float(window[0]), float(window[1])
    if x_lo < 1e3:
        raise DomainError(f"fit window must start at X_lo >= 1e3, got {x_lo}")
    if x_hi > cache.length:
        raise RangeError(f"fit window end {x_hi} beyond cache length {cache.length}")
    xs = np.unique(np.geomspace(x_lo, x_hi, n_samples).astype(np.int64))
    if len(xs) < 16:
        raise FitError(f"window {window} yields only {len(xs)} sample points (< 16)")
    s = cache.prefix_floats()[xs]
    xf = xs.astype(np.float64)
    c_hat = float(np.sum(s * xf) / np.sum(xf * xf))
    return RankinContext(kappa=KAPPA, C_hat=c_hat, fit_window=(x_lo, x_hi), cache=cache)


def error_rs(x: float, ctx: RankinContext) -> float:
    """Partial sum of c(n) minus the fitted C x."""
    m = _range_check(x, ctx.cache.length, "error_rs")
    return float(ctx.cache.prefix_floats()[m]) - ctx.C_hat * x


def rs_explicit_formula(x: float, K: int, ctx: RankinContext) -> float:
    """Truncated oscillatory sum approximating the rankin error term:

        x^(3/8) / (2 pi) * sum_{k <= K} c_k k^(-5/8) sin(8 pi (k x)^(1/4) + 3 pi/4)

    The truncation remainder is *not* added; callers compare against
    :func:`error_rs` (see the acceptance suite, which treats the comparison
    as a soft diagnostic).
    """
    if K < 1 or K > x:
        raise DomainError(f"need 1 <= K <= x, got K={K}, x={x}")
    if K > ctx.cache.length:
        raise RangeError(f"K = {K} beyond cache length {ctx.cache.length}")
    k = np.arange(1, K + 1, dtype=np.float64)
    ck = ctx.cache.floats()[1 : K + 1]
    phase = 8.0 * math.pi * (k * x) ** 0.25 + 0.75 * math.pi
    return float(
        x**0.375 / CONSTANTS.two_pi * np.sum(ck * k**-0.625 * np.sin(phase))
    )


# ---------------------------------------------------------------------------
# Error-term series factories (the objects analysis.mean_square prefers)
# ---------------------------------------------------------------------------


def divisor_error_series(cache: SequenceCache) -> ErrorTermSeries:
    if cache.kind != "divisor":
        raise DependencyError(f"expected a divisor cache, got {cache.kind!r}")
    return ErrorTermSeries(
        evaluator=lambda x: error_divisor(x, cache),
        alpha_hint=1.0 / 3.0,
        label="divisor",
        cache=cache,
        main=divisor_main(),
    )


def abelian_error_series(cache: SequenceCache) -> ErrorTermSeries:
    if cache.kind != "abelian":
        raise DependencyError(f"expected an abelian cache, got {cache.kind!r}")
    return ErrorTermSeries(
        evaluator=lambda x: error_abelian(x, cache),
        alpha_hint=0.5,
        label="abelian",
        cache=cache,
        main=abelian_main(),
    )


def rs_error_series(ctx: RankinContext) -> ErrorTermSeries:
    return ErrorTermSeries(
        evaluator=lambda x: error_rs(x, ctx),
        alpha_hint=3.0 / 5.0,
        label="rankin",
        cache=ctx.cache,
        main=MainTermSpec(((ctx.C_hat, 1.0, 0),)),
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def cache_path(cache_dir: Path | str, kind: str, n_max: int) -> Path:
    return Path(cache_dir) / f"{kind}_{n_max}.bin"


def _encode_int(v: int) -> bytes:
    length = (abs(v).bit_length() + 8) // 8  # one spare bit for the sign
    return struct.pack("<I", length) + v.to_bytes(length, "little", signed=True)


def save_cache(cache: SequenceCache, path: Path | str) -> Path:
    """Write the binary cache plus a hex-digest ``.sha256`` sidecar."""
    path = Path(path)
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    parts.append(struct.pack("<B", KIND_TAGS[cache.kind]))
    parts.append(struct.pack("<Q", cache.length))
    if cache.kind == "rankin":
        for v in cache.values[1:]:
            parts.append(_encode_int(v.numerator))
            parts.append(_encode_int(v.denominator))
    else:
        for v in cache.values[1:]:
            parts.append(_encode_int(int(v)))
    blob = b"".join(parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    digest = hashlib.sha256(blob).hexdigest()
    path.with_suffix(path.suffix + ".sha256").write_text(digest + "\n")
    return path


def checksum_ok(path: Path | str) -> bool:
    """True when the ``.sha256`` sidecar matches the file contents."""
    path = Path(path)
    sidecar = path.with_suffix(path.suffix + ".sha256")
    if not sidecar.exists():
        return False
    recorded = sidecar.read_text().strip()
    return hashlib.sha256(path.read_bytes()).hexdigest() == recorded


class _Reader:
    def __init__(self, blob: bytes, path: Path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise CacheFormatError(f"{self.path}: truncated cache file")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def read_int(self) -> int:
        (length,) = struct.unpack("<I", self.take(4))
        return int.from_bytes(self.take(length), "little", signed=True)


def load_cache(path: Path | str, verify_checksum: bool = True) -> SequenceCache:
    """Read a cache written by :func:`save_cache`.

    Checksum verification compares against the sidecar; a missing or
    mismatching sidecar raises :class:`~convolab.errors.CacheFormatError`.
    """
    path = Path(path)
    if not path.exists():
        raise CacheFormatError(f"{path}: no such cache file")
    if verify_checksum and not checksum_ok(path):
        raise CacheFormatError(f"{path}: checksum mismatch (file tampered or sidecar missing)")
    r = _Reader(path.read_bytes(), path)
    if r.take(8) != MAGIC:
        raise CacheFormatError(f"{path}: bad magic")
    (version,) = struct.unpack("<I", r.take(4))
    if version != FORMAT_VERSION:
        raise CacheFormatError(f"{path}: unsupported format version {version}")
    (tag,) = struct.unpack("<B", r.take(1))
    kind = TAG_KINDS.get(tag)
    if kind is None:
        raise CacheFormatError(f"{path}: unknown kind tag {tag}")
    (count,) = struct.unpack("<Q", r.take(8))
    if kind == "rankin":
        vals: list = [Fraction(0)]
        for _ in range(count):
            num = r.read_int()
            den = r.read_int()
            if den <= 0:
                raise CacheFormatError(f"{path}: nonpositive denominator")
            vals.append(Fraction(num, den))
        return SequenceCache(kind, vals, format_version=version)
    ints = [r.read_int() for _ in range(count)]
    if kind == "tau":
        return SequenceCache(kind, [0] + ints, format_version=version)
    arr = np.array([0] + ints, dtype=np.int64)
    return SequenceCache(kind, arr, format_version=version)
