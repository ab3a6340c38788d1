"""Deliberately naive reference implementations used as oracles.

Nothing in this module shares an algorithm with the sieves in
:mod:`convolab.arith`: divisor counts come from trial division, abelian
counts from direct partition enumeration, tau from expanding the eta-product
factor by factor (binomial theorem on each (1 - q^m)^24), and the rankin
coefficients from the literal divisor-sum definition on top of the tau
oracle.  They are slow on purpose; the point is independence, not speed.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt

import numpy as np

__all__ = [
    "divisor_count",
    "divisor3_count",
    "abelian_count",
    "tau_eta_direct",
    "tau_eta_crt",
    "rankin_coeff",
    "is_squarefree",
]


def divisor_count(n: int) -> int:
    """d(n) by trial division up to sqrt(n)."""
    count = 0
    r = isqrt(n)
    for k in range(1, r + 1):
        if n % k == 0:
            count += 2
    if r * r == n:
        count -= 1
    return count


def divisor3_count(n: int) -> int:
    """d3(n) = number of ordered triples with abc = n, via trial division."""
    total = 0
    for k in range(1, n + 1):
        if n % k == 0:
            total += divisor_count(n // k)
    return total


@lru_cache(maxsize=None)
def _partitions_enumerated(remaining: int, largest: int) -> int:
    """Partition count by direct enumeration of decreasing parts."""
    if remaining == 0:
        return 1
    return sum(
        _partitions_enumerated(remaining - part, part)
        for part in range(min(remaining, largest), 0, -1)
    )


def abelian_count(n: int) -> int:
    """a(n) = prod over prime powers p^e || n of the partition count of e."""
    out = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out *= _partitions_enumerated(e, e)
        p += 1
    return out  # a leftover prime factor contributes p(1) = 1


def tau_eta_direct(n_max: int) -> list[int]:
    """tau(1..N) by expanding q * prod_m (1 - q^m)^24 one factor at a time.

    Each factor is applied through the binomial theorem,
    (1 - q^m)^24 = sum_j C(24, j) (-q^m)^j, as 25 shifted scaled adds over
    exact Python integers.  Fine up to a few hundred terms.
    """
    coeffs = [0] * n_max
    coeffs[0] = 1
    binom = [comb(24, j) * (-1) ** j for j in range(25)]
    for m in range(1, n_max):
        new = coeffs[:]
        for j in range(1, 25):
            shift = j * m
            if shift >= n_max:
                break
            bj = binom[j]
            for i in range(shift, n_max):
                new[i] += bj * coeffs[i - shift]
        coeffs = new
    return [0] + coeffs  # tau(n) = coefficient of q^(n-1); 1-indexed with pad


_CRT_PRIMES = (2147483647, 2147483629, 2147483587)


def tau_eta_crt(n_max: int) -> list[int]:
    """tau(1..N) by the same factor-by-factor expansion, modulo three 31-bit
    primes, recombined by the Chinese remainder theorem with a balanced lift.

    Exact for N <= 1e5: |tau(n)| <= d(n) n^(11/2) stays far below half the
    modulus product (~9.9e27).
    """
    binom = [comb(24, j) * (-1) ** j for j in range(25)]
    residues = []
    for p in _CRT_PRIMES:
        c = np.zeros(n_max, dtype=np.int64)
        c[0] = 1
        for m in range(1, n_max):
            new = c.copy()
            for j in range(1, 25):
                shift = j * m
                if shift >= n_max:
                    break
                new[shift:] += binom[j] * c[: n_max - shift]
            c = new % p
        residues.append(c)
    modulus = 1
    for p in _CRT_PRIMES:
        modulus *= p
    lift = [modulus // p * pow(modulus // p, -1, p) for p in _CRT_PRIMES]
    out = [0] * (n_max + 1)
    for i in range(n_max):
        v = sum(int(r[i]) * k for r, k in zip(residues, lift)) % modulus
        if v > modulus // 2:
            v -= modulus
        out[i + 1] = v
    return out


def rankin_coeff(n: int, tau_vals: list[int]) -> Fraction:
    """c(n) from the literal definition, as an exact Fraction."""
    acc = 0
    m = 1
    while m * m <= n:
        if n % (m * m) == 0:
            acc += m**22 * tau_vals[n // (m * m)] ** 2
        m += 1
    return Fraction(acc, n**11)


def is_squarefree(n: int) -> bool:
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True
