from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kisin_descent.errors import DivisionByZero, PrecisionExhausted
from kisin_descent.scalar import (INF, PadicScalar, format_scalar, is_prime, parse_scalar,
                                  scalar_add, scalar_inv, scalar_mul, vp_int)

primes = st.sampled_from([2, 3, 5, 7])


def S(p, x, prec=INF):
    return PadicScalar.make(p, x, prec)


def test_mul_p_by_p():
    x = scalar_mul(S(3, 3, 10), S(3, 3, 10))
    assert (x.valuation, x.unit) == (2, 1)


def test_add_one_and_p():
    x = scalar_add(S(3, 1), S(3, 3))
    assert (x.valuation, x.unit) == (0, 4)


def test_inverse_of_one_plus_p_mod_81():
    x = scalar_inv(S(3, 4, 4))
    assert x.valuation == 0 and x.unit == 61 and x.abs_prec == 4


def test_inverse_of_zero_raises():
    with pytest.raises(DivisionByZero):
        scalar_inv(PadicScalar.zero(3, 5))


def test_exact_unit_inverse_needs_precision():
    with pytest.raises(PrecisionExhausted):
        scalar_inv(S(3, 2))
    assert scalar_inv(S(3, -9)) == PadicScalar(3, -2, -1, INF)


def test_precision_rules():
    x = PadicScalar(3, 1, 2, 5)
    y = PadicScalar(3, 2, 1, 7)
    assert (x + y).abs_prec == 5
    assert (x * y).abs_prec == min(5 + 2, 7 + 1)
    inv = x.inverse()
    assert inv.valuation == -1 and inv.abs_prec == 5 - 2


def test_certified_zero_keeps_precision():
    z = S(5, 25, 2)
    assert z.is_zero and z.abs_prec == 2
    assert format_scalar(z) == "O(5^2)"


def test_helpers():
    assert vp_int(54, 3) == 3
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    with pytest.raises(ValueError):
        vp_int(0, 3)


def test_residue():
    assert S(3, 7, 4).residue() == 1
    assert S(3, 9, 4).residue() == 0
    with pytest.raises(PrecisionExhausted):
        S(3, Fraction(1, 3), 4).residue()


@given(primes, st.integers(1, 10**9), st.integers(1, 12))
def test_roundtrip_mod_prec(p, n, prec):
    x = S(p, n, prec)
    assert (int(x.to_fraction()) - n) % p**prec == 0


@given(primes, st.integers(-10**6, 10**6).filter(bool), st.integers(-10**6, 10**6).filter(bool))
def test_valuation_laws(p, a, b):
    x, y = S(p, a, 30), S(p, b, 30)
    assert (x * y).valuation == x.valuation + y.valuation
    s = x + y
    if not s.is_zero:
        assert s.valuation >= min(x.valuation, y.valuation)
        if x.valuation != y.valuation:
            assert s.valuation == min(x.valuation, y.valuation)


@given(primes, st.integers(-10**6, 10**6).filter(bool), st.integers(5, 20))
def test_double_inverse(p, a, prec):
    x = S(p, a, prec)
    if x.is_zero or x.abs_prec - x.valuation < 2:
        return
    back = x.inverse().inverse()
    assert (back - x).is_zero


@given(primes, st.integers(-10**8, 10**8), st.integers(1, 15))
def test_text_roundtrip(p, n, prec):
    for x in (S(p, n, prec), S(p, n)):
        assert parse_scalar(format_scalar(x), p) == x
