"""Session-scoped inputs shared by the acceptance gate and slower suites."""

import pytest

from convolab.arith import (
    rankin_coeffs,
    rs_fit_C,
    sieve_abelian,
    sieve_divisor,
    sieve_divisor3,
    tau_series,
)
from convolab.zetaline import get_moment_table

ACCEPT_N = 10_000


@pytest.fixture(scope="session")
def small_caches():
    tau = tau_series(ACCEPT_N)
    return {
        "divisor": sieve_divisor(ACCEPT_N),
        "divisor3": sieve_divisor3(ACCEPT_N),
        "abelian": sieve_abelian(ACCEPT_N),
        "tau": tau,
        "rankin": rankin_coeffs(ACCEPT_N, tau),
    }


@pytest.fixture(scope="session")
def moment_table():
    # ~1 minute: |zeta(1/2+it)|^2 panel-integrated out to T = 4000
    return get_moment_table(4000.0)


@pytest.fixture(scope="session")
def abelian_big():
    return sieve_abelian(10_000_000)


@pytest.fixture(scope="session")
def rankin_ctx(small_caches):
    return rs_fit_C(small_caches["rankin"], (1e3, float(ACCEPT_N)))
