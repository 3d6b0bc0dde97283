"""Mean ergodic theorem for circle rotations, computed exactly on
trigonometric polynomials.

For T x = x + alpha (mod 1) the Koopman operator multiplies the k-th Fourier
coefficient by e(k alpha), e(t) = exp(2 pi i t), and the ergodic average
g_n = (1/n) sum_{j=1}^n f o T^j multiplies it by

    D_n(theta) = (1/n) sum_{j=1}^n e(j theta)
               = e((n+1) theta / 2) sin(pi n theta) / (n sin(pi theta)),

with D_n(theta) = 1 for integer theta.  Since D_{2n} = D_n (1 + e(n theta)) / 2,
|D_n| never increases along n = 2^j.

Irrational rotation numbers are stood in for by exact rationals p/q with
large q (continued-fraction convergents).  k p/q is an integer only when q
divides k, so no frequency of a small polynomial resonates; the closed forms
are exact for the stand-in and move by O(n k / q) against the irrational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

MAX_DEN = 10**15


def _frac(x) -> Fraction:
    """Exact rational value of x (floats are converted exactly)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    return Fraction(float(x))


def _mod(x: Fraction, m: int) -> Fraction:
    return x - m * math.floor(x / m)


def _sinpi(y: Fraction) -> float:
    """sin(pi y) with the argument reduced exactly first."""
    y = _mod(y, 2)
    sign = 1.0
    if y >= 1:
        y -= 1
        sign = -1.0
    y = min(y, 1 - y)
    return sign * math.sin(math.pi * float(y))


def _cospi(y: Fraction) -> float:
    return _sinpi(y + Fraction(1, 2))


def dirichlet(theta, n: int) -> complex:
    """D_n(theta) = (1/n) sum_{j=1}^n exp(2 pi i j theta), in closed form."""
    if n < 1:
        raise ValueError("n >= 1")
    t = _frac(theta)
    if t.denominator == 1:
        return 1.0 + 0j
    s = _sinpi(t)
    mag = _sinpi(n * t) / (n * s)
    ph = (n + 1) * t  # e((n+1) t / 2) = cos(pi ph) + i sin(pi ph)
    return complex(_cospi(ph) * mag, _sinpi(ph) * mag)


def dirichlet_direct(theta, n: int) -> complex:
    """Direct summation, used as a cross-check."""
    t = float(_frac(theta) % 1)
    j = np.arange(1, n + 1)
    return complex(np.exp(2j * np.pi * j * t).mean())


class TrigPoly:
    """Finite Fourier series sum_k c_k e(k x)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        c = {}
        for k, v in dict(coeffs or {}).items():
            if int(k) != k:
                raise ValueError(f"frequency {k!r} is not an integer")
            v = complex(v)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError("coefficients must be finite")
            if v != 0:
                c[int(k)] = c.get(int(k), 0) + v
        self.coeffs = {k: v for k, v in sorted(c.items()) if v != 0}

    @classmethod
    def parse(cls, text: str) -> "TrigPoly":
        """'1:1,3:0.5' or '-2:1+2j'; repeated frequencies add up."""
        c: dict[int, complex] = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            k, _, v = part.partition(":")
            if not _:
                raise ValueError(f"expected freq:coeff, got {part!r}")
            c[int(k)] = c.get(int(k), 0) + complex(v.replace(" ", ""))
        return cls(c)

    @classmethod
    def exponential(cls, k: int = 1, c: complex = 1) -> "TrigPoly":
        return cls({k: c})

    @property
    def mean(self) -> complex:
        return self.coeffs.get(0, 0j)

    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for k, v in self.coeffs.items():
            out += v * np.exp(2j * np.pi * k * x)
        return out

    def __sub__(self, o: "TrigPoly") -> "TrigPoly":
        c = dict(self.coeffs)
        for k, v in o.coeffs.items():
            c[k] = c.get(k, 0) - v
        return TrigPoly(c)

    def __eq__(self, o) -> bool:
        return isinstance(o, TrigPoly) and self.coeffs == o.coeffs

    def __repr__(self) -> str:
        return f"TrigPoly({self.coeffs!r})"

    def to_dict(self) -> dict:
        return {str(k): [v.real, v.imag] for k, v in self.coeffs.items()}


@dataclass(frozen=True)
class RotationSystem:
    alpha: Fraction
    irrational: bool = False  # True when alpha stands in for an irrational
    label: str = ""

    def resonant(self, k: int) -> bool:
        return (k * self.alpha).denominator == 1


def parse_alpha(text, max_den: int = MAX_DEN) -> RotationSystem:
    """'sqrt2', 'sqrtN', 'golden', a fraction '1/3' or a decimal.

    Square roots are computed to 40 digits with integer arithmetic and then
    replaced by the best rational with denominator <= max_den, which is a
    continued-fraction convergent."""
    if isinstance(text, RotationSystem):
        return text
    if not isinstance(text, str):
        return RotationSystem(_frac(text))
    s = text.strip().lower()
    scale = 10**40
    if s in ("golden", "phi"):
        root = math.isqrt(5 * scale * scale)
        a = Fraction(scale + root, 2 * scale).limit_denominator(max_den)
        return RotationSystem(a, True, "golden")
    if s.startswith("sqrt"):
        N = int(s[4:])
        if N < 0:
            raise ValueError("sqrt of a negative number")
        if math.isqrt(N) ** 2 == N:
            return RotationSystem(Fraction(math.isqrt(N)), False, s)
        a = Fraction(math.isqrt(N * scale * scale), scale).limit_denominator(max_den)
        return RotationSystem(a, True, s)
    return RotationSystem(Fraction(s), False, s)


def _alpha(alpha) -> Fraction:
    return parse_alpha(alpha).alpha if isinstance(alpha, (str, RotationSystem)) else _frac(alpha)


def koopman(f: TrigPoly, alpha, power: int = 1) -> TrigPoly:
    """U f = f o T^power; c_k -> c_k e(k alpha power)."""
    a = _alpha(alpha) * power
    return TrigPoly({k: v * complex(_cospi(2 * k * a), _sinpi(2 * k * a)) for k, v in f.coeffs.items()})


def ergodic_average(f: TrigPoly, alpha, n: int) -> TrigPoly:
    """(1/n) sum_{j=1}^n f o T^j; the k = 0 coefficient is kept exactly."""
    a = _alpha(alpha)
    out = {}
    for k, v in f.coeffs.items():
        out[k] = v if k == 0 else v * dirichlet(k * a, n)
    return TrigPoly(out)


def l2_distance_to_mean(f: TrigPoly, alpha, n: int) -> float:
    """||g_n - c_0||_2 = sqrt(sum_{k != 0} |c_k|^2 |D_n(k alpha)|^2)."""
    a = _alpha(alpha)
    return math.sqrt(sum(abs(v) ** 2 * abs(dirichlet(k * a, n)) ** 2
                         for k, v in f.coeffs.items() if k != 0))


def envelope(f: TrigPoly, alpha, n: int) -> float:
    """(1/n) sqrt(sum_{k != 0} |c_k|^2 / sin^2(pi k alpha)), the bound coming
    from |D_n(theta)| <= 1/(n |sin(pi theta)|).  Infinite if some k alpha is an
    integer."""
    a = _alpha(alpha)
    tot = 0.0
    for k, v in f.coeffs.items():
        if k == 0:
            continue
        s = _sinpi(k * a)
        if s == 0:
            return math.inf
        tot += abs(v) ** 2 / s**2
    return math.sqrt(tot) / n


@dataclass
class ConvergenceRow:
    n: int
    distance: float
    envelope: float
    closed_form_1: float | None  # |sin(pi n alpha)| / (n |sin(pi alpha)|)

    def to_dict(self) -> dict:
        return {"n": self.n, "distance": self.distance, "envelope": self.envelope,
                "closed_form_1": self.closed_form_1}


def convergence_table(f: TrigPoly, alpha, ns) -> list[ConvergenceRow]:
    a = _alpha(alpha)
    rows = []
    for n in ns:
        cf = abs(dirichlet(a, n)) if a.denominator != 1 else 1.0
        rows.append(ConvergenceRow(int(n), l2_distance_to_mean(f, a, n), envelope(f, a, n), cf))
    return rows
