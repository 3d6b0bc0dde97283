"""Exact ping-pong certificates on the rational projective line.

A point of RP^1 is a slope ``x/y``: a :class:`fractions.Fraction`, or
:data:`INF` for the line ``y = 0``.  Player sets are finite unions of open
arcs.  ``Arc(lo, hi)`` is the set of slopes met when moving from ``lo`` in the
increasing direction (wrapping through ``INF``) until ``hi``; both endpoints
are excluded.  So ``Arc(1, INF)`` is ``{t > 1}`` while ``Arc(1, -1)`` is
``{|t| > 1}`` including ``INF``.

Every check here is exact; there are no tolerances anywhere in this module.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DisjointnessViolation, InclusionFailure, OrderTooSmall
from .words import Word, reduce


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_infinity, ())


def _infinity():
    return INF


INF = _Infinity()
Slope = Union[Fraction, _Infinity]
Matrix = tuple  # ((a, b), (c, d)) with int or Fraction entries


def parse_slope(text) -> Slope:
    if text is INF:
        return INF
    if isinstance(text, str) and text.strip().lower() in ("inf", "∞", "infinity"):
        return INF
    if isinstance(text, float):
        raise TypeError("slopes must be exact; pass a string or Fraction")
    return Fraction(text)


def _num(x):
    if isinstance(x, float):
        raise TypeError("matrix entries must be exact (int, Fraction or string)")
    q = Fraction(x)
    return q.numerator if q.denominator == 1 else q


def as_matrix(m) -> Matrix:
    """Normalize nested sequences into a 2x2 tuple with exact entries."""
    rows = tuple(tuple(_num(x) for x in row) for row in m)
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError("expected a 2x2 matrix")
    return rows


def det(m: Matrix):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat_mul(x: Matrix, y: Matrix) -> Matrix:
    (a, b), (c, d) = x
    (e, f), (g, h) = y
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_inv(m: Matrix) -> Matrix:
    (a, b), (c, d) = m
    D = det(m)
    if D == 0:
        raise ZeroDivisionError("singular matrix")
    if D == 1:
        return ((d, -b), (-c, a))
    return tuple(tuple(_num(Fraction(x) / D) for x in row) for row in ((d, -b), (-c, a)))


IDENTITY2 = ((1, 0), (0, 1))


def as_matz(m) -> Matrix:
    """An element of SL2(Z)."""
    m = as_matrix(m)
    if any(isinstance(x, Fraction) for row in m for x in row):
        raise ValueError("MatZ entries must be integers")
    if det(m) != 1:
        raise ValueError(f"MatZ must have determinant 1, got {det(m)}")
    return m


def affine(scale, shift) -> Matrix:
    """The map ``x -> scale*x + shift`` as a projective matrix."""
    return as_matrix(((scale, shift), (0, 1)))


def act_slope(g: Matrix, t: Slope) -> Slope:
    (a, b), (c, d) = g
    if t is INF:
        num, den = a, c
    else:
        num, den = a * t + b, c * t + d
    if den == 0:
        return INF
    return Fraction(num) / Fraction(den)


# -- cyclic order ---------------------------------------------------------

def _lin(t: Slope):
    return (1, 0) if t is INF else (0, t)


def _rank(t: Slope, start: Slope):
    """Position of ``t != start`` when walking upward from ``start``."""
    if _lin(t) > _lin(start):
        return (0, _lin(t))
    return (1, _lin(t))


@dataclass(frozen=True)
class Arc:
    lo: Slope
    hi: Slope

    @property
    def full(self) -> bool:
        """True for the circle minus one point."""
        return self.lo == self.hi

    @property
    def wraps(self) -> bool:
        return self.full or (self.lo is not INF and self.hi is not INF and self.lo > self.hi)

    def contains(self, t: Slope) -> bool:
        if t == self.lo:
            return False
        if self.full:
            return True
        return t != self.hi and _rank(t, self.lo) < _rank(self.hi, self.lo)

    def interior_point(self) -> Slope:
        lo, hi = self.lo, self.hi
        if self.full:
            return INF if lo is not INF else Fraction(0)
        if lo is INF:
            return hi - 1
        if hi is INF:
            return lo + 1
        if lo < hi:
            return (lo + hi) / 2
        return INF

    def issubset(self, other: "Arc") -> bool:
        if other.full:
            if self.full:
                return self.lo == other.lo
            return not self.contains(other.lo)
        if self.full:
            return False
        c, d = other.lo, other.hi
        a, b = self.lo, self.hi
        if not (a == c or other.contains(a)):
            return False
        if not (b == d or other.contains(b)):
            return False
        pa = (-1,) if a == c else _rank(a, c)
        return pa < _rank(b, c)

    def isdisjoint(self, other: "Arc") -> bool:
        if self.full or other.full:
            return False
        return self.issubset(Arc(other.hi, other.lo))

    def image(self, g: Matrix) -> "Arc":
        """Exact image under a Moebius map; orientation is fixed by pushing an
        interior point through ``g``."""
        ga, gb = act_slope(g, self.lo), act_slope(g, self.hi)
        cand = Arc(ga, gb)
        if cand.contains(act_slope(g, self.interior_point())):
            return cand
        return Arc(gb, ga)

    def split_at(self, t: Slope) -> list["Arc"]:
        if not self.contains(t):
            return [self]
        if self.full:
            return [Arc(t, self.lo), Arc(self.lo, t)] if t != self.lo else [self]
        return [Arc(self.lo, t), Arc(t, self.hi)]

    def __str__(self):
        return f"({self.lo}, {self.hi})"


@dataclass(frozen=True)
class SlopeIntervalSet:
    """A finite union of pairwise disjoint open arcs, kept sorted."""

    arcs: tuple = ()

    def __post_init__(self):
        arcs = tuple(sorted(self.arcs, key=lambda a: _lin(a.lo)))
        for x, y in itertools.combinations(arcs, 2):
            if not x.isdisjoint(y):
                raise ValueError(f"arcs {x} and {y} overlap")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def of(cls, *pairs) -> "SlopeIntervalSet":
        """``SlopeIntervalSet.of(("1", "inf"), ...)`` from endpoint pairs."""
        return cls(tuple(Arc(parse_slope(lo), parse_slope(hi)) for lo, hi in pairs))

    def __iter__(self):
        return iter(self.arcs)

    def __bool__(self):
        return bool(self.arcs)

    def contains(self, t: Slope) -> bool:
        return any(a.contains(t) for a in self.arcs)

    def image(self, g: Matrix) -> "SlopeIntervalSet":
        return SlopeIntervalSet(tuple(a.image(g) for a in self.arcs))

    def union(self, *others: "SlopeIntervalSet") -> "SlopeIntervalSet":
        arcs = list(self.arcs)
        for o in others:
            arcs.extend(o.arcs)
        return SlopeIntervalSet(tuple(arcs))

    def uncovered(self, target: "SlopeIntervalSet") -> Arc | None:
        """First arc of ``self`` not inside a single arc of ``target``.

        An open arc inside a union of disjoint open arcs lies in one of them
        (connectedness), so per-arc containment is exact.
        """
        for a in self.arcs:
            if not any(a.issubset(b) for b in target.arcs):
                return a
        return None

    def issubset(self, target: "SlopeIntervalSet") -> bool:
        return self.uncovered(target) is None

    def isdisjoint(self, other: "SlopeIntervalSet") -> bool:
        return all(a.isdisjoint(b) for a in self.arcs for b in other.arcs)

    def to_json(self) -> list:
        return [[str(a.lo), str(a.hi)] for a in self.arcs]

    def __str__(self):
        return " ∪ ".join(str(a) for a in self.arcs) or "∅"


def image_interval(g, S: SlopeIntervalSet) -> SlopeIntervalSet:
    """Exact image of a slope set under a Moebius map."""
    return S.image(as_matrix(g))


def parse_set(spec) -> SlopeIntervalSet:
    """Parse ``[["1", "inf"], ["-inf", "-1"]]``.  ``-inf`` is accepted as an
    alias for ``inf`` (they are the same projective point)."""
    pairs = []
    for pair in spec:
        lo, hi = pair
        lo = "inf" if str(lo).strip() == "-inf" else lo
        hi = "inf" if str(hi).strip() == "-inf" else hi
        pairs.append((lo, hi))
    return SlopeIntervalSet.of(*pairs)


# -- certificates ---------------------------------------------------------

def _mat_json(m: Matrix) -> list:
    return [[str(x) for x in row] for row in m]


@dataclass
class FreenessCertificate:
    kind: str
    players: dict[str, Matrix]
    sets: dict[str, SlopeIntervalSet]
    checked_inclusions: list[dict] = field(default_factory=list)
    disjoint: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.disjoint and all(c["status"] == "pass" for c in self.checked_inclusions)

    def failures(self) -> list[dict]:
        return [c for c in self.checked_inclusions if c["status"] != "pass"]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "valid": self.valid,
            "disjoint": self.disjoint,
            "players": {k: _mat_json(v) for k, v in self.players.items()},
            "sets": {k: v.to_json() for k, v in self.sets.items()},
            "checked_inclusions": self.checked_inclusions,
            "notes": self.notes,
        }


def _require_disjoint(cert: FreenessCertificate, names: Sequence[str]):
    for x, y in itertools.combinations(names, 2):
        if not cert.sets[x].isdisjoint(cert.sets[y]):
            cert.disjoint = False
            raise DisjointnessViolation(f"sets {x} and {y} intersect", certificate=cert)


def _check(cert: FreenessCertificate, element: str, g: Matrix, source: str, target: str):
    src = cert.sets[source] if source in cert.sets else _union_of(cert, source)
    img = src.image(g)
    bad = img.uncovered(cert.sets[target])
    entry = {
        "element": element,
        "source": source,
        "target": target,
        "image": img.to_json(),
        "status": "pass" if bad is None else "fail",
    }
    if bad is not None:
        entry["witness"] = [str(bad.lo), str(bad.hi)]
    cert.checked_inclusions.append(entry)
    return bad is None


def _union_of(cert, expr: str) -> SlopeIntervalSet:
    return SlopeIntervalSet().union(*(cert.sets[n] for n in expr.split("∪")))


def _finish(cert: FreenessCertificate) -> FreenessCertificate:
    if not cert.valid:
        f = cert.failures()[0]
        raise InclusionFailure(
            f"{f['element']}·{f['source']} ⊄ {f['target']} (witness arc {f.get('witness')})",
            certificate=cert,
            witness=f.get("witness"),
        )
    return cert


def certify_first_form(a, b, Aplus, Aminus, Bplus, Bminus) -> FreenessCertificate:
    """Certify ``<a, b> = F2`` by the four-set ping-pong inclusions.

    Each inclusion is checked set by set, e.g. ``a·B-`` against ``A+``.
    """
    a, b = as_matz(a), as_matz(b)
    cert = FreenessCertificate(
        kind="first-form",
        players={"a": a, "b": b},
        sets={"A+": Aplus, "A-": Aminus, "B+": Bplus, "B-": Bminus},
    )
    _require_disjoint(cert, ["A+", "A-", "B+", "B-"])
    moves = [
        ("a", a, ["A+", "B-", "B+"], "A+"),
        ("a^-1", mat_inv(a), ["A-", "B-", "B+"], "A-"),
        ("b", b, ["B+", "A-", "A+"], "B+"),
        ("b^-1", mat_inv(b), ["B-", "A-", "A+"], "B-"),
    ]
    for name, g, sources, target in moves:
        for s in sources:
            _check(cert, name, g, s, target)
    return _finish(cert)


def _is_pm_identity(m: Matrix) -> bool:
    return m in (((1, 0), (0, 1)), ((-1, 0), (0, -1)))


def _psl_order(g: Matrix, limit: int = 12):
    """Order of ``g`` in PSL2, or None if it exceeds ``limit``."""
    x = g
    for k in range(1, limit + 1):
        if _is_pm_identity(x):
            return k
        x = mat_mul(x, g)
    return None


def _fixed_points(g: Matrix) -> list[Slope]:
    """Rational fixed points of ``t -> (at+b)/(ct+d)`` on RP^1."""
    (a, b), (c, d) = g
    if c == 0:
        pts: list[Slope] = [INF]
        if a != d:
            pts.append(Fraction(b) / Fraction(d - a))
        return pts
    # c t^2 + (d - a) t - b = 0
    A, B, C = Fraction(c), Fraction(d - a), Fraction(-b)
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    rn, rd = math.isqrt(disc.numerator), math.isqrt(disc.denominator)
    if rn * rn != disc.numerator or rd * rd != disc.denominator:
        return []
    root = Fraction(rn, rd)
    return sorted({(-B + root) / (2 * A), (-B - root) / (2 * A)})


def _split_for_cyclic(g: Matrix, source: SlopeIntervalSet, target: SlopeIntervalSet):
    """Find A+, A- inside ``target`` with g(source ∪ A+) ⊆ A+ and
    g^-1(source ∪ A-) ⊆ A-.  Then g^n(source) ⊆ target for every n != 0."""
    pieces = list(target.arcs)
    for t in _fixed_points(g):
        pieces = [q for p in pieces for q in p.split_at(t)]
    if len(pieces) > 8:
        return None
    ginv = mat_inv(g)
    for labels in itertools.product((1, -1, 0), repeat=len(pieces)):
        plus = SlopeIntervalSet(tuple(p for p, l in zip(pieces, labels) if l == 1))
        minus = SlopeIntervalSet(tuple(p for p, l in zip(pieces, labels) if l == -1))
        if not plus or not minus:
            continue
        if source.union(plus).image(g).issubset(plus) and source.union(minus).image(ginv).issubset(minus):
            return plus, minus
    return None


@dataclass(frozen=True)
class CyclicFactor:
    """A cyclic free factor: generator plus its order in PSL2 (None = infinite)."""

    generator: Matrix
    order: int | None = None


def _factor_elements(factors: Iterable[CyclicFactor]):
    finite, infinite = [], []
    for i, f in enumerate(factors):
        g = as_matz(f.generator)
        if f.order is None:
            if _psl_order(g) is not None:
                raise ValueError(f"generator {i} has finite order but was declared infinite")
            infinite.append((f"g{i}", g))
            continue
        if _psl_order(g, f.order) != f.order:
            raise ValueError(f"generator {i} does not have order {f.order} in PSL2(Z)")
        x = g
        for k in range(1, f.order):
            finite.append((f"g{i}^{k}", x))
            x = mat_mul(x, g)
    return finite, infinite


def _distinct_psl(elems) -> int:
    seen = set()
    for _, m in elems:
        neg = tuple(tuple(-x for x in row) for row in m)
        seen.add(min(m, neg))
    return len(seen)


def certify_second_form(gensG, gensH, A: SlopeIntervalSet, B: SlopeIntervalSet) -> FreenessCertificate:
    """Certify ``<G, H> = G * H`` (free product) in PSL2(Z).

    Finite factors list all their nontrivial elements.  An infinite cyclic
    factor ``<g>`` is handled by splitting the target into forward- and
    backward-invariant parts, which proves ``g^n B ⊆ A`` for every ``n != 0``.
    """
    gensG = [f if isinstance(f, CyclicFactor) else CyclicFactor(*f) for f in gensG]
    gensH = [f if isinstance(f, CyclicFactor) else CyclicFactor(*f) for f in gensH]
    finG, infG = _factor_elements(gensG)
    finH, infH = _factor_elements(gensH)
    cert = FreenessCertificate(
        kind="second-form",
        players={**{f"G.{n}": m for n, m in finG + infG}, **{f"H.{n}": m for n, m in finH + infH}},
        sets={"A": A, "B": B},
    )
    if not infG and _distinct_psl(finG) < 2:
        raise OrderTooSmall("|G| >= 3 is required for the second formulation", certificate=cert)
    if not A or not B:
        raise ValueError("A and B must be nonempty")
    _require_disjoint(cert, ["A", "B"])
    for prefix, fin, inf, src, dst in (("G", finG, infG, "B", "A"), ("H", finH, infH, "A", "B")):
        for name, g in fin:
            _check(cert, f"{prefix}.{name}", g, src, dst)
        for name, g in inf:
            split = _split_for_cyclic(g, cert.sets[src], cert.sets[dst])
            label = f"{prefix}.{name}"
            if split is None:
                cert.checked_inclusions.append(
                    {"element": label, "source": src, "target": dst, "status": "fail",
                     "witness": None, "reason": "no invariant split of the target found"}
                )
                continue
            plus, minus = split
            cert.sets[f"{dst}[{label}+]"] = plus
            cert.sets[f"{dst}[{label}-]"] = minus
            _check(cert, label, g, f"{src}∪{dst}[{label}+]", f"{dst}[{label}+]")
            _check(cert, f"{label}^-1", mat_inv(g), f"{src}∪{dst}[{label}-]", f"{dst}[{label}-]")
            cert.notes.append(
                f"{label} infinite cyclic: invariant split {plus} / {minus} gives "
                f"{label}^n {src} ⊆ {dst} for all n != 0"
            )
    return _finish(cert)


def certify_ping(a, b, A: SlopeIntervalSet, B: SlopeIntervalSet) -> FreenessCertificate:
    """Certify that ``a, b`` generate a free semigroup: a(A∪B) ⊆ A, b(A∪B) ⊆ B."""
    a, b = as_matrix(a), as_matrix(b)
    for m in (a, b):
        if det(m) == 0:
            raise ValueError("players must be invertible")
    cert = FreenessCertificate(kind="ping", players={"a": a, "b": b}, sets={"A": A, "B": B})
    _require_disjoint(cert, ["A", "B"])
    for name, g, target in (("a", a, "A"), ("b", b, "B")):
        for s in ("A", "B"):
            _check(cert, name, g, s, target)
    return _finish(cert)


# -- exhaustive oracle ----------------------------------------------------

@dataclass
class NontrivialityResult:
    passed: bool
    maxlen: int
    words_checked: int
    witness: Word | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "maxlen": self.maxlen,
            "words_checked": self.words_checked,
            "witness": None if self.witness is None else str(self.witness),
        }


def _generic_mul(x, y):
    n = len(x)
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


def _generic_inv(m):
    import sympy

    inv = sympy.Matrix(m).inv()
    return tuple(tuple(_num(Fraction(int(x.p), int(x.q))) for x in row) for row in inv.tolist())


def exhaustive_nontriviality(a, b, maxlen: int) -> NontrivialityResult:
    """Evaluate every reduced word of length <= maxlen exactly; pass iff none
    is the identity.  Words are searched by increasing length (iterative
    deepening), so a returned witness is a shortest one, first in letter order
    ``a, a^-1, b, b^-1``."""
    if maxlen > 14:
        raise ValueError("maxlen <= 14")
    a = tuple(tuple(_num(x) for x in row) for row in a)
    b = tuple(tuple(_num(x) for x in row) for row in b)
    d = len(a)
    if d == 2:
        mul, inv = mat_mul, mat_inv
    else:
        mul, inv = _generic_mul, _generic_inv
    ident = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
    gens = [a, inv(a), b, inv(b)]
    letters = [(0, 1), (0, -1), (1, 1), (1, -1)]
    checked = 0
    for length in range(1, maxlen + 1):
        # explicit DFS over words of exactly this length
        # a popped node's ancestors are the nodes last popped at each lower depth
        path = [0] * length
        stack = [(ident, -1, 0)]
        while stack:
            m, last, depth = stack.pop()
            if depth:
                path[depth - 1] = last
            if depth == length:
                checked += 1
                if m == ident:
                    w = reduce(letters[i] for i in path)
                    return NontrivialityResult(False, maxlen, checked, w)
                continue
            for i in (3, 2, 1, 0):
                if last >= 0 and i == last ^ 1:
                    continue
                stack.append((mul(m, gens[i]), i, depth + 1))
    return NontrivialityResult(True, maxlen, checked)
