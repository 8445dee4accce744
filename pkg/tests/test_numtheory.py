import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from emcurve.numtheory import (
    Factorization,
    FactorizationTimeout,
    factorize,
    is_prime,
    is_squarefree,
    legendre,
    sqrt_mod,
    sqrt_mod_prime_power,
    valuation,
)

ODD_PRIMES = [3, 5, 7, 11, 13, 37, 101, 1151, 1439, 42689]


@pytest.mark.parametrize("n,expected", [
    (461, True),           # factor of 462^4 - 1
    (1, False),
    (45557487359, True),   # 462^4 - 1 - 4*462^2
    (0, False),
    (2, True),
    (45558341135, False),
])
def test_is_prime_examples(n, expected):
    assert is_prime(n) is expected


def test_is_prime_matches_sieve_to_1e6():
    limit = 10**6
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i:: i] = bytearray(len(sieve[i * i:: i]))
    mismatches = [n for n in range(limit + 1) if bool(sieve[n]) != is_prime(n)]
    assert mismatches == []


@pytest.mark.parametrize("n,factors", [
    (1295, ((5, 1), (7, 1), (37, 1))),
    (1, ()),
    (20735, ((5, 1), (11, 1), (13, 1), (29, 1))),
    (2**10, ((2, 10),)),
    (3111695, ((5, 1), (41, 1), (43, 1), (353, 1))),
])
def test_factorize_examples(n, factors):
    assert factorize(n).factors == factors


def test_factorize_large_semiprime():
    n = 1000003 * 1000033
    f = factorize(n)
    assert f.factors == ((1000003, 1), (1000033, 1))


def test_factorize_timeout_carries_partial():
    n = 10000019 * 10000079
    with pytest.raises(FactorizationTimeout) as exc:
        factorize(4 * n, rho_budget=1)
    assert exc.value.cofactor == n
    assert (2, 2) in exc.value.partial


@given(st.integers(min_value=2, max_value=200000))
@settings(max_examples=120, deadline=None)
def test_factorize_recomposes(n):
    f = factorize(n)
    assert f.recompose() == n
    assert all(is_prime(p) for p in f.primes())
    assert list(f.primes()) == sorted(set(f.primes()))


@pytest.mark.parametrize("n,expected", [(37, True), (4, False), (213445, True)])
def test_is_squarefree_examples(n, expected):
    assert is_squarefree(n) is expected


@pytest.mark.parametrize("a,p,expected", [
    (-1, 37, 1),
    (0, 7, 0),
    (2, 1151, 1),   # 1151 = 7 mod 8
    (3, 7, -1),
])
def test_legendre_examples(a, p, expected):
    assert legendre(a, p) == expected


@pytest.mark.parametrize("p", [4, 9, 15, 2])
def test_legendre_rejects_bad_modulus(p):
    with pytest.raises(ValueError):
        legendre(3, p)


@given(st.integers(), st.integers(), st.sampled_from(ODD_PRIMES))
@settings(max_examples=200, deadline=None)
def test_legendre_multiplicative(a, b, p):
    assert legendre(a * b, p) == legendre(a, p) * legendre(b, p)


def test_sqrt_mod_examples():
    assert sqrt_mod(4, 7) in (2, 5)
    assert sqrt_mod(2, 7) in (3, 4)
    assert sqrt_mod(3, 7) is None
    assert sqrt_mod(0, 13) == 0


@given(st.integers(min_value=1, max_value=10**6), st.sampled_from(ODD_PRIMES))
@settings(max_examples=200, deadline=None)
def test_sqrt_mod_squares_back(a, p):
    r = sqrt_mod(a, p)
    if legendre(a, p) == -1:
        assert r is None
    else:
        assert r is not None and r * r % p == a % p


@pytest.mark.parametrize("a,p,k", [(2, 7, 6), (5, 11, 4), (17, 2, 9), (41, 2, 12)])
def test_sqrt_mod_prime_power(a, p, k):
    r = sqrt_mod_prime_power(a, p, k)
    assert r is not None and (r * r - a) % p**k == 0


@pytest.mark.parametrize("x,p,v", [
    (Fraction(1, 9), 3, -2),
    (576, 2, 6),
    (Fraction(1759969, 576), 2, -6),
])
def test_valuation_examples(x, p, v):
    assert valuation(x, p) == v


def test_valuation_of_zero_rejected():
    with pytest.raises(ValueError):
        valuation(0, 5)


@given(
    st.fractions(min_value=Fraction(-99), max_value=Fraction(99)).filter(lambda x: x != 0),
    st.fractions(min_value=Fraction(-99), max_value=Fraction(99)).filter(lambda x: x != 0),
    st.sampled_from([2, 3, 5, 7]),
)
@settings(max_examples=200, deadline=None)
def test_valuation_additive(x, y, p):
    assert valuation(x * y, p) == valuation(x, p) + valuation(y, p)


def test_factorization_invariants():
    f = factorize(45558341135)
    assert f.primes() == (5, 461, 463, 42689)
    assert f.is_squarefree()
    assert f.recompose() == f.value
