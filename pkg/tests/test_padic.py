from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from agt import padic as pa
from agt.errors import DivisionByZero, NotPrime, PrecisionExhausted, PrimeMismatch

PRIMES = [2, 3, 5, 7, 11, 101]
nonzero = st.builds(Fraction, st.integers(-10**6, 10**6).filter(bool), st.integers(1, 10**6))
primes = st.sampled_from(PRIMES)


def v_p(n, p):
    """Valuation by repeated division (oracle)."""
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def agrees(x: pa.PadicNumber, q: Fraction) -> bool:
    """x is known mod p^k and q lies in that residue class."""
    r, k = x.to_rational_residue()
    d = r - Fraction(q)
    return d == 0 or v_p(d.numerator, x.p) - v_p(d.denominator, x.p) >= k


def test_from_rational_examples():
    x = pa.from_rational(Fraction(9, 4), 3)
    assert x.valuation == 2 and x.abs() == Fraction(1, 9)
    for p in (2, 3, 7):
        assert pa.from_rational(p, p).abs() == Fraction(1, p)
    y = pa.from_rational(Fraction(-1, 2), 3, 6)
    assert y.digits() == [1] * 6
    # multiplying back by 1 - 3 recovers -1/2 * -2 = 1
    z = pa.mul(y, pa.from_rational(-2, 3, 6))
    assert pa.equal_mod(z, pa.from_rational(1, 3, 6))


def test_not_prime_and_mismatch():
    with pytest.raises(NotPrime):
        pa.from_rational(1, 4)
    with pytest.raises(PrimeMismatch):
        pa.add(pa.from_rational(1, 3), pa.from_rational(1, 5))


@settings(max_examples=300)
@given(nonzero, primes, st.integers(1, 30))
def test_roundtrip_residue(q, p, N):
    x = pa.from_rational(q, p, N)
    assert x.valuation == v_p(q.numerator, p) - v_p(q.denominator, p)
    assert all(0 <= d < p for d in x.digits()) and x.digits()[0] != 0
    # unit * den - num is divisible by p^N once p-parts are removed
    num, den = q.numerator, q.denominator
    num //= p ** v_p(num, p)
    den //= p ** v_p(den, p)
    assert (x.unit * den - num) % p**N == 0
    assert agrees(x, q)


@settings(max_examples=300)
@given(nonzero, nonzero, primes)
def test_field_operations_mod_precision(a, b, p):
    x, y = pa.from_rational(a, p, 15), pa.from_rational(b, p, 15)
    s = pa.add(x, y)
    if a + b != 0:
        assert agrees(s, a + b)
    assert agrees(pa.mul(x, y), a * b)
    assert agrees(pa.sub(x, y), a - b)
    assert agrees(pa.inv(x), 1 / a)
    assert agrees(pa.neg(x), -a)


@given(nonzero, primes)
def test_x_minus_x_is_zero(a, p):
    x = pa.from_rational(a, p, 10)
    z = pa.add(x, pa.neg(x))
    assert z.is_zero and not z.exact_zero
    assert z.absprec == x.absprec
    with pytest.raises(PrecisionExhausted):
        pa.inv(z)


def test_exact_zero():
    z = pa.exact_zero(5)
    with pytest.raises(DivisionByZero):
        pa.inv(z)
    x = pa.from_rational(3, 5, 8)
    assert pa.equal_mod(pa.add(x, z), x)
    assert pa.mul(x, z).is_zero


def test_small_products():
    for p in (2, 3, 5):
        assert pa.equal_mod(pa.mul(pa.from_rational(2, p), pa.from_rational(3, p)), pa.from_rational(6, p))
        lhs = pa.inv(pa.from_rational(1 - p, p))
        assert pa.equal_mod(lhs, pa.from_rational(Fraction(-1, p - 1), p))


def test_cancellation_shrinks_precision():
    x = pa.from_rational(1 + 3**5, 3, 10)
    y = pa.from_rational(1, 3, 10)
    d = pa.sub(x, y)
    assert d.valuation == 5 and d.absprec == 10 and d.prec == 5


@settings(max_examples=500)
@given(nonzero, nonzero, primes)
def test_ultrametric_and_multiplicative(a, b, p):
    assume(a + b != 0)
    A, B, S = pa.padic_abs(a, p), pa.padic_abs(b, p), pa.padic_abs(a + b, p)
    assert S <= max(A, B)
    if A != B:
        assert S == max(A, B)
    assert pa.padic_abs(a * b, p) == A * B


@settings(max_examples=300)
@given(nonzero)
def test_product_formula(q):
    rep = pa.product_formula_check(q)
    assert rep.product == 1
    assert rep.archimedean == abs(q)


def test_product_formula_examples():
    assert pa.product_formula_check(6).local == {2: Fraction(1, 2), 3: Fraction(1, 3)}
    assert pa.product_formula_check(1).product == 1
    rep = pa.product_formula_check(Fraction(-20, 9))
    assert rep.local == {2: Fraction(1, 4), 3: Fraction(9), 5: Fraction(1, 5)}
    with pytest.raises(ValueError):
        pa.product_formula_check(0)


def test_string_lsf_digits():
    x = pa.from_rational(Fraction(1, 3) + 10, 5, 6)
    assert str(x).startswith("2*5^0")
    assert x.to_dict()["digits"] == x.digits()
