"""Truncated p-adic numbers with explicit precision tracking.

A nonzero value is ``p^v * u`` with ``u`` a unit known modulo ``p^N``; ``N`` is
the relative precision, so the value is known modulo ``p^(v+N)``.  Zero comes
in two kinds: exact zero, and ``O(p^k)`` (a number known only to be divisible
by ``p^k``), which is what cancellation produces.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy

from .errors import DivisionByZero, NotPrime, PrecisionExhausted, PrimeMismatch

DEFAULT_PREC = 20


@lru_cache(maxsize=256)
def _check_prime(p: int) -> int:
    if not (isinstance(p, int) and p >= 2 and sympy.isprime(p)):
        raise NotPrime(f"{p} is not prime")
    return p


def valuation(n: int, p: int) -> int:
    """v_p of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def rational_valuation(q, p: int) -> int:
    q = Fraction(q)
    return valuation(q.numerator, p) - valuation(q.denominator, p)


@dataclass(frozen=True)
class PadicNumber:
    p: int
    valuation: int  # for O(p^k) zeros this is k
    unit: int  # 0 <= unit < p^prec, coprime to p unless zero
    prec: int  # relative precision N (0 for zeros)
    exact_zero: bool = False

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def absprec(self) -> float | int:
        """Absolute precision: known modulo p^absprec (inf for exact zero)."""
        if self.exact_zero:
            return float("inf")
        return self.valuation + self.prec

    def digits(self) -> list[int]:
        """Base-p digits of the unit part, least significant first."""
        out, u = [], self.unit
        for _ in range(self.prec):
            out.append(u % self.p)
            u //= self.p
        return out

    def abs(self) -> Fraction:
        """|x|_p = p^-v as an exact rational (0 for zeros)."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation)

    def to_rational_residue(self) -> tuple[Fraction, int]:
        """(representative r, k) with the value known to equal r mod p^k."""
        if self.exact_zero:
            return Fraction(0), 0
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation, self.valuation + self.prec

    def __str__(self):
        if self.exact_zero:
            return "0"
        if self.is_zero:
            return f"O({self.p}^{self.valuation})"
        terms = [f"{d}*{self.p}^{self.valuation + i}" for i, d in enumerate(self.digits()) if d]
        return " + ".join(terms) + f" + O({self.p}^{self.valuation + self.prec})"

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "valuation": self.valuation if not self.exact_zero else None,
            "digits": self.digits(),
            "precision": self.prec,
            "absolute_precision": None if self.exact_zero else self.valuation + self.prec,
            "zero": self.is_zero,
            "exact_zero": self.exact_zero,
            "abs": str(self.abs()),
            "text": str(self),
        }

    # arithmetic sugar
    def __add__(self, o):
        return add(self, _coerce(o, self))

    __radd__ = __add__

    def __neg__(self):
        return neg(self)

    def __sub__(self, o):
        return add(self, neg(_coerce(o, self)))

    def __rsub__(self, o):
        return add(_coerce(o, self), neg(self))

    def __mul__(self, o):
        return mul(self, _coerce(o, self))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return mul(self, inv(_coerce(o, self)))

    def __rtruediv__(self, o):
        return mul(_coerce(o, self), inv(self))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else inv(self)
        out = from_rational(1, self.p, self.prec or DEFAULT_PREC)
        for _ in range(abs(k)):
            out = mul(out, base)
        return out


def _coerce(o, like: PadicNumber) -> PadicNumber:
    if isinstance(o, PadicNumber):
        return o
    return from_rational(o, like.p, max(like.prec, 1))


def exact_zero(p: int) -> PadicNumber:
    return PadicNumber(_check_prime(p), 0, 0, 0, True)


def inexact_zero(p: int, k: int) -> PadicNumber:
    return PadicNumber(p, k, 0, 0, False)


def from_rational(q, p: int, N: int = DEFAULT_PREC) -> PadicNumber:
    """p-adic expansion of a rational to relative precision N."""
    _check_prime(p)
    if N < 1:
        raise ValueError("precision N >= 1")
    q = Fraction(q)
    if q == 0:
        return exact_zero(p)
    vn, vd = valuation(q.numerator, p), valuation(q.denominator, p)
    num = q.numerator // p**vn
    den = q.denominator // p**vd
    mod = p**N
    unit = num * pow(den, -1, mod) % mod
    return PadicNumber(p, vn - vd, unit, N)


def _same_prime(x: PadicNumber, y: PadicNumber):
    if x.p != y.p:
        raise PrimeMismatch(f"primes differ: {x.p} vs {y.p}")


def _normalize(p: int, v: int, value: int, absprec: int) -> PadicNumber:
    """Build p^v*value known modulo p^absprec (absprec > v)."""
    if value % p ** (absprec - v) == 0:
        return inexact_zero(p, absprec)
    while value % p == 0:
        value //= p
        v += 1
    N = absprec - v
    return PadicNumber(p, v, value % p**N, N)


def add(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    """Sum; the absolute precision is the smaller of the two.  Cancellation
    of leading digits shrinks the relative precision."""
    _same_prime(x, y)
    if x.exact_zero:
        return y
    if y.exact_zero:
        return x
    p = x.p
    absprec = min(x.absprec, y.absprec)
    v = min(x.valuation, y.valuation)
    if x.is_zero and y.is_zero:
        return inexact_zero(p, absprec)
    value = x.unit * p ** (x.valuation - v) + y.unit * p ** (y.valuation - v)
    return _normalize(p, v, value, absprec)


def neg(x: PadicNumber) -> PadicNumber:
    if x.is_zero:
        return x
    return PadicNumber(x.p, x.valuation, (-x.unit) % x.p**x.prec, x.prec)


def sub(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    return add(x, neg(y))


def mul(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    """Product; valuations add and the relative precision is the minimum."""
    _same_prime(x, y)
    p = x.p
    if x.exact_zero or y.exact_zero:
        return exact_zero(p)
    if x.is_zero or y.is_zero:
        # O(p^k) * (p^w u) = O(p^(k+w)); O(p^k)*O(p^l) = O(p^(k+l))
        return inexact_zero(p, x.valuation + y.valuation)
    N = min(x.prec, y.prec)
    return PadicNumber(p, x.valuation + y.valuation, x.unit * y.unit % p**N, N)


def inv(x: PadicNumber) -> PadicNumber:
    """Inverse: negated valuation, unit inverted modulo p^N."""
    if x.exact_zero:
        raise DivisionByZero("inverse of exact zero")
    if x.is_zero:
        raise PrecisionExhausted(f"inverse of {x}: no significant digits left")
    mod = x.p**x.prec
    return PadicNumber(x.p, -x.valuation, pow(x.unit, -1, mod), x.prec)


def equal_mod(x: PadicNumber, y: PadicNumber) -> bool:
    """Agreement to the common absolute precision."""
    d = sub(x, y)
    return d.is_zero


def padic_abs(q, p: int) -> Fraction:
    q = Fraction(q)
    if q == 0:
        return Fraction(0)
    return Fraction(p) ** (-rational_valuation(q, _check_prime(p)))


@dataclass
class ProductFormulaReport:
    q: Fraction
    archimedean: Fraction
    local: dict[int, Fraction]
    product: Fraction

    @property
    def passed(self) -> bool:
        return self.product == 1

    def to_dict(self) -> dict:
        return {
            "q": str(self.q),
            "archimedean": str(self.archimedean),
            "local": {str(p): str(v) for p, v in self.local.items()},
            "product": str(self.product),
            "passed": self.passed,
        }


def product_formula_check(q) -> ProductFormulaReport:
    """|q|_inf * prod_p |q|_p over the primes dividing numerator or denominator."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("q must be nonzero")
    primes = sorted(set(sympy.factorint(q.numerator)) | set(sympy.factorint(q.denominator)))
    primes = [p for p in primes if p > 1]
    local = {p: padic_abs(q, p) for p in primes}
    prod = abs(q)
    for v in local.values():
        prod *= v
    return ProductFormulaReport(q, abs(q), local, prod)
