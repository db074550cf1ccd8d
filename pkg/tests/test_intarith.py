import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmsunit.intarith import (Factorization, IntPolynomial, factor,
                              format_factorization, is_probable_prime,
                              pollard_rho, primes_up_to, resultant,
                              splits_completely, valuation)
from oracles import resultant_oracle, root_count_mod


def test_factor_examples():
    f = factor(-32768)
    assert f.sign == -1 and f.factors == {2: 15} and f.complete
    f = factor(1)
    assert f.sign == 1 and f.factors == {} and f.complete
    with pytest.raises(ValueError):
        factor(0)


def test_factor_flags_hard_cofactor():
    # product of two Mersenne primes, far beyond a zero rho budget
    n = (2**127 - 1) * (2**89 - 1)
    f = factor(n, trial_limit=10_000, rho_budget=0)
    assert f.reconstruct() == n
    assert not f.complete
    assert f.cofactor == n


@given(st.integers(min_value=-(2**512), max_value=2**512).filter(lambda n: n != 0))
@settings(max_examples=200, deadline=None)
def test_factor_reconstruct_roundtrip(n):
    f = factor(n, trial_limit=10_000, rho_budget=2_000)
    assert f.reconstruct() == n
    for p in f.factors:
        assert is_probable_prime(p)


def test_factor_reconstruct_bulk_random():
    rng = random.Random(20260810)
    for _ in range(2_000):
        n = rng.getrandbits(rng.randrange(2, 160)) + 1
        f = factor(n, trial_limit=10_000, rho_budget=2_000)
        assert f.reconstruct() == n


def test_valuation_examples():
    assert valuation(32768, 2) == 15
    assert valuation(45, 2) == 0
    assert valuation(-45, 3) == 2
    with pytest.raises(ValueError):
        valuation(0, 5)


@given(st.integers(1, 10**12), st.integers(1, 10**12), st.sampled_from([2, 3, 5, 7, 11]))
@settings(max_examples=300, deadline=None)
def test_valuation_additive(n, m, p):
    assert valuation(n, p) + valuation(m, p) == valuation(n * m, p)


def test_pollard_rho_deterministic():
    n = 10403 * 10301
    assert pollard_rho(n, seed=None) == pollard_rho(n, seed=None)
    d = pollard_rho(n)
    assert d is not None and n % d == 0 and 1 < d < n


def test_format_factorization():
    assert format_factorization(factor(-32768)) == "-2^15"
    assert format_factorization(factor(6272)) == "2^7*7^2"
    assert format_factorization(factor(-5103)) == "-3^6*7"
    assert format_factorization(factor(1)) == "1"
    inc = Factorization(1, {2: 3}, 91)
    assert format_factorization(inc) == "2^3*C91"


def test_polynomial_basics():
    P = IntPolynomial
    f = P([32768, 1])
    assert str(f) == "x + 32768"
    assert f.degree == 1 and f.is_monic
    assert f(-32768) == 0
    g = P([12771880859375, -5151296875, 3491750, 1])
    assert str(g) == "x^3 + 3491750*x^2 - 5151296875*x + 12771880859375"
    assert P([0]).degree == -1
    assert P([3, 0, 2]).derivative() == P([0, 4])
    assert str(P([-1728, 1])) == "x - 1728"


def test_resultant_examples():
    P = IntPolynomial
    assert resultant(P([0, 1]), P([-1728, 1])) == -1728
    assert resultant(P([32768, 1]), P([0, 1])) == -32768
    assert resultant(P([-1728, 1]), P([0, 1])) == 1728


poly3 = st.lists(st.integers(-50, 50), min_size=2, max_size=5).filter(
    lambda cs: cs[-1] != 0
)


@given(poly3, poly3)
@settings(max_examples=200, deadline=None)
def test_resultant_antisymmetry(fc, gc):
    P = IntPolynomial
    f, g = P(fc), P(gc)
    assert resultant(f, g) == (-1) ** (f.degree * g.degree) * resultant(g, f)


@given(poly3, poly3, poly3)
@settings(max_examples=100, deadline=None)
def test_resultant_multiplicative(fc, gc, hc):
    P = IntPolynomial
    f, g, h = P(fc), P(gc), P(hc)
    gh = [0] * (len(g.coeffs) + len(h.coeffs) - 1)
    for i, a in enumerate(g.coeffs):
        for j, b in enumerate(h.coeffs):
            gh[i + j] += a * b
    assert resultant(f, P(gh)) == resultant(f, g) * resultant(f, h)


def test_resultant_numeric_oracle():
    rng = random.Random(7)
    P = IntPolynomial
    for _ in range(40):
        fc = [rng.randrange(-30, 31) for _ in range(4)]
        fc[-1] = rng.choice([1, 2, 3])
        gc = [rng.randrange(-30, 31) for _ in range(4)]
        gc[-1] = rng.choice([1, 2, 3])
        exact = resultant(P(fc), P(gc))
        approx = resultant_oracle(fc, gc)
        assert abs(approx.imag) < 1e-6 * max(1, abs(exact))
        assert abs(approx.real - exact) < 1e-6 * max(1, abs(exact))


def test_splits_completely_examples():
    P = IntPolynomial
    assert splits_completely(P([3375, 1]), 13)
    assert not splits_completely(P([1, 1, 1]), 5)
    # x^2 - 1 splits mod 5; x^2 + 1 does mod 5 but not mod 7
    assert splits_completely(P([-1, 0, 1]), 5)
    assert splits_completely(P([1, 0, 1]), 5)
    assert not splits_completely(P([1, 0, 1]), 7)
    # squarefreeness: (x-1)^2 has the right root count but is not split
    assert not splits_completely(P([1, -2, 1]), 7)


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=5))
@settings(max_examples=300, deadline=None)
def test_splits_completely_brute_force(cs):
    P = IntPolynomial
    cs = cs + [1]  # monic
    f = P(cs)
    for ell in (3, 5, 7, 11, 13, 199):
        got = splits_completely(f, ell)
        distinct_roots = root_count_mod(f.coeffs, ell)
        # split completely iff as many distinct roots as the degree
        assert got == (distinct_roots == f.degree)


def test_primes_up_to():
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_up_to(1) == []
