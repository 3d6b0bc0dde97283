"""Cayley-graph balls, growth, boundaries and Folner diagnostics.

Groups are given by a :class:`GroupOracle`: exact multiply/invert plus an
injective ``key``.  Generating sets are symmetric and contain the identity, so
``ball(n)`` is the set of products of ``n`` generators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from . import words
from .errors import MemoryBudgetExceeded
from .graph import FiniteGraph, cheeger_bruteforce  # noqa: F401  (re-exported)

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class GroupOracle:
    name: str
    identity: Any
    multiply: Callable[[Any, Any], Any]
    invert: Callable[[Any], Any]
    key: Callable[[Any], Hashable] = lambda x: x
    default_gens: tuple = ()

    def symmetrize(self, gens: Iterable) -> list:
        """Close ``gens`` under inversion and add the identity (deduplicated)."""
        out, seen = [], set()
        for g in [self.identity, *gens]:
            for x in (g, self.invert(g)):
                k = self.key(x)
                if k not in seen:
                    seen.add(k)
                    out.append(x)
        return out


# -- oracles --------------------------------------------------------------

def _mat_mul_mod(n):
    def mul(x, y):
        (a, b), (c, d) = x
        (e, f), (g, h) = y
        return (
            ((a * e + b * g) % n, (a * f + b * h) % n),
            ((c * e + d * g) % n, (c * f + d * h) % n),
        )

    return mul


def _mat_mul(x, y):
    (a, b), (c, d) = x
    (e, f), (g, h) = y
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _sl2_inv(m, n=None):
    (a, b), (c, d) = m
    r = ((d, -b), (-c, a))
    if n is not None:
        r = tuple(tuple(x % n for x in row) for row in r)
    return r


_E = (((1, 1), (0, 1)), ((1, 0), (1, 1)))


def z_oracle() -> GroupOracle:
    return GroupOracle("z", 0, lambda x, y: x + y, lambda x: -x, default_gens=(1,))


def z2_oracle() -> GroupOracle:
    return GroupOracle(
        "z2",
        (0, 0),
        lambda x, y: (x[0] + y[0], x[1] + y[1]),
        lambda x: (-x[0], -x[1]),
        default_gens=((1, 0), (0, 1)),
    )


def trivial_oracle() -> GroupOracle:
    return GroupOracle("trivial", 0, lambda x, y: 0, lambda x: 0, default_gens=(0,))


def free2_oracle() -> GroupOracle:
    return GroupOracle(
        "free2",
        words.IDENTITY,
        words.multiply,
        words.invert,
        default_gens=(words.generator(0), words.generator(1)),
    )


def sl2z_oracle() -> GroupOracle:
    return GroupOracle("sl2z", ((1, 0), (0, 1)), _mat_mul, _sl2_inv, default_gens=_E)


def sl2z_mod_oracle(n: int) -> GroupOracle:
    if n < 2:
        raise ValueError("modulus must be >= 2")
    return GroupOracle(
        f"sl2z-mod:{n}",
        ((1, 0), (0, 1)),
        _mat_mul_mod(n),
        lambda m: _sl2_inv(m, n),
        default_gens=tuple(tuple(tuple(x % n for x in r) for r in e) for e in _E),
    )


def make_oracle(spec: str) -> GroupOracle:
    """``z``, ``z2``, ``free2``, ``sl2z``, ``sl2z-mod:N`` or ``trivial``."""
    if spec.startswith("sl2z-mod:"):
        return sl2z_mod_oracle(int(spec.split(":", 1)[1]))
    table = {
        "z": z_oracle,
        "z2": z2_oracle,
        "free2": free2_oracle,
        "sl2z": sl2z_oracle,
        "trivial": trivial_oracle,
    }
    if spec not in table:
        raise ValueError(f"unknown group {spec!r}; choose from {sorted(table)} or sl2z-mod:N")
    return table[spec]()


def key_bytes(x) -> bytes:
    """Canonical byte encoding.  Matrices are row-major with explicit
    denominators, words are run-length letters."""
    if isinstance(x, words.Word):
        return b"W" + b";".join(f"{g},{e}".encode() for g, e in x.runs())
    if isinstance(x, tuple) and x and isinstance(x[0], tuple):
        parts = [f"{Fraction(v).numerator}/{Fraction(v).denominator}" for row in x for v in row]
        return b"M" + ",".join(parts).encode()
    if isinstance(x, tuple):
        return b"T" + ",".join(str(v) for v in x).encode()
    return b"I" + str(x).encode()


# -- balls ----------------------------------------------------------------

@dataclass
class BallData:
    spheres: list[list]  # spheres[r] = elements at word length exactly r
    counts: list[int]  # counts[r] = |S^r|
    oracle_name: str = ""

    @property
    def radius(self) -> int:
        return len(self.counts) - 1

    def elements(self, r: int | None = None) -> list:
        r = self.radius if r is None else r
        return [x for s in self.spheres[: r + 1] for x in s]

    @property
    def levels(self):
        return [(r, self.elements(r)) for r in range(self.radius + 1)]


def ball(oracle: GroupOracle, S: Sequence | None, n: int, budget: int = DEFAULT_BUDGET) -> BallData:
    """Breadth-first computation of S^0 ⊆ S^1 ⊆ ... ⊆ S^n."""
    if n < 0:
        raise ValueError("n >= 0")
    S = oracle.symmetrize(oracle.default_gens if S is None else S)
    key, mul = oracle.key, oracle.multiply
    seen = {key(oracle.identity)}
    spheres = [[oracle.identity]]
    counts = [1]
    for _ in range(n):
        new = []
        for x in spheres[-1]:
            for s in S:
                y = mul(x, s)
                k = key(y)
                if k not in seen:
                    seen.add(k)
                    new.append(y)
        if len(seen) > budget:
            raise MemoryBudgetExceeded(
                f"ball of radius {len(spheres)} has {len(seen)} elements > budget {budget}"
            )
        spheres.append(new)
        counts.append(len(seen))
    return BallData(spheres, counts, oracle.name)


@dataclass
class GrowthEstimate:
    rates: list[float]  # rates[i] = counts[n]^(1/n), n = i + 1
    running_inf: list[float]
    ratios: list[float]  # counts[n] / counts[n-1]
    poly_exponent: float  # log-log slope over the second half
    poly_fit: list[float] | None = None
    submultiplicative: bool = True
    note: str = "growth type is a fit diagnostic on finite data, not a theorem"

    @property
    def estimate(self) -> float:
        return self.running_inf[-1]

    def to_dict(self) -> dict:
        return {
            "rates": self.rates,
            "running_inf": self.running_inf,
            "ratios": self.ratios,
            "estimate": self.estimate,
            "poly_exponent": self.poly_exponent,
            "poly_fit": self.poly_fit,
            "submultiplicative": self.submultiplicative,
            "note": self.note,
        }


def growth_rate_estimate(counts) -> GrowthEstimate:
    """``a_n = |S^n|^(1/n)`` and its running infimum."""
    if isinstance(counts, BallData):
        counts = counts.counts
    counts = list(counts)
    if len(counts) < 3:
        raise ValueError("need counts up to radius >= 2")
    rates = [counts[n] ** (1.0 / n) for n in range(1, len(counts))]
    running = list(np.minimum.accumulate(rates))
    ratios = [counts[n] / counts[n - 1] for n in range(1, len(counts))]
    N = len(counts) - 1
    ns = np.arange(max(1, N // 2), N + 1)
    slope = float(np.polyfit(np.log(ns), np.log([counts[k] for k in ns]), 1)[0])
    fit = None
    if N >= 3:
        fit = [float(c) for c in np.polyfit(np.arange(N + 1), counts, 2)]
    sub = all(
        counts[a + b] <= counts[a] * counts[b]
        for a in range(N + 1)
        for b in range(N + 1 - a)
    )
    return GrowthEstimate(rates, [float(r) for r in running], ratios, slope, fit, sub)


# -- boundaries and Folner sets -------------------------------------------

def _keyed(oracle: GroupOracle, A: Iterable) -> dict:
    return {oracle.key(a): a for a in A}


def boundary(oracle: GroupOracle, A: Iterable, S: Sequence | None = None) -> list:
    """The exact set ``A·S minus A``."""
    S = oracle.symmetrize(oracle.default_gens if S is None else S)
    inside = _keyed(oracle, A)
    out = {}
    for a in inside.values():
        for s in S:
            y = oracle.multiply(a, s)
            k = oracle.key(y)
            if k not in inside:
                out.setdefault(k, y)
    return list(out.values())


def cheeger_quotient(oracle: GroupOracle, A: Iterable, S: Sequence | None = None) -> Fraction:
    A = list(A)
    if not A:
        raise ValueError("A must be nonempty")
    return Fraction(len(boundary(oracle, A, S)), len(_keyed(oracle, A)))


def folner_check(oracle: GroupOracle, F: Iterable, S: Sequence, eps) -> tuple[bool, Fraction]:
    """(max_s |Fs △ F| / |F| < eps, that maximum).  ``S`` is used as given."""
    inside = _keyed(oracle, F)
    if not inside:
        raise ValueError("F must be nonempty")
    worst = Fraction(0)
    for s in S:
        moved = {oracle.key(oracle.multiply(x, s)) for x in inside.values()}
        sym = len(moved - inside.keys()) + len(inside.keys() - moved)
        worst = max(worst, Fraction(sym, len(inside)))
    return worst < Fraction(eps), worst


@dataclass
class FolnerSearchResult:
    found: bool
    radius: int | None
    ratio: Fraction | None
    history: list[tuple[int, Fraction]] = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "radius": self.radius,
            "ratio": None if self.ratio is None else str(self.ratio),
            "history": [[n, str(q)] for n, q in self.history],
            "note": self.note,
        }


def folner_ball_search(oracle: GroupOracle, S: Sequence | None, eps, maxn: int,
                       budget: int = DEFAULT_BUDGET) -> FolnerSearchResult:
    """Smallest radius n <= maxn whose ball is (S, eps)-Folner.  Failing to
    find one says nothing about amenability."""
    S = oracle.symmetrize(oracle.default_gens if S is None else S)
    key, mul = oracle.key, oracle.multiply
    members = {key(oracle.identity): oracle.identity}
    sphere = [oracle.identity]
    hist = []
    for n in range(maxn + 1):
        if n:
            new = []
            for x in sphere:
                for s in S:
                    y = mul(x, s)
                    k = key(y)
                    if k not in members:
                        members[k] = y
                        new.append(y)
            sphere = new
            if len(members) > budget:
                raise MemoryBudgetExceeded(f"ball of radius {n} exceeds budget {budget}")
        # only elements near the sphere can leave the ball under one generator
        worst = Fraction(0)
        for s in S:
            leaving = sum(1 for x in (sphere if n else [oracle.identity])
                          if key(mul(x, s)) not in members)
            # right translation is a bijection, so |Fs \ F| = |F \ Fs|
            worst = max(worst, Fraction(2 * leaving, len(members)))
        hist.append((n, worst))
        if worst < Fraction(eps):
            return FolnerSearchResult(True, n, worst, hist)
    return FolnerSearchResult(
        False, None, None, hist,
        note=f"no ball of radius <= {maxn} is Folner; this is not a proof of non-amenability",
    )


def ball_graph(oracle: GroupOracle, S: Sequence | None, n: int) -> FiniteGraph:
    """Induced Cayley graph on the ball of radius n (edges x -- x·s inside it)."""
    S = oracle.symmetrize(oracle.default_gens if S is None else S)
    B = ball(oracle, S, n)
    elems = B.elements()
    index = {oracle.key(x): i for i, x in enumerate(elems)}
    adj = []
    for x in elems:
        nb = []
        for s in S:
            j = index.get(oracle.key(oracle.multiply(x, s)))
            if j is not None and j != index[oracle.key(x)]:
                nb.append(j)
        adj.append(sorted(set(nb)))
    return FiniteGraph(adj=adj, labels=[str(x) for x in elems], name=f"ball_{n}")


def z_interval(n: int) -> list[int]:
    return list(range(-n, n + 1))
