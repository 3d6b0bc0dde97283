"""The Bruhat-Tits tree of SL2(Q_p), with exact arithmetic over Z[1/p].

A vertex is the homothety class of a lattice ``B Z_p^2`` (columns of ``B``
form a basis).  Its canonical basis is the column Hermite form over the
p-local integers, ``[[p^a, c], [0, p^b]]`` with ``0 <= c < p^a``, scaled so
that ``min(a, b, v_p(c)) = 0``.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DeterminantNotOne, PrimeMismatch, SingularBasis, SizeLimit
from .padic import _check_prime, rational_valuation
from .pingpong import det, mat_inv, mat_mul

MAX_BALL = 200_000


def _v(x: Fraction, p: int) -> float:
    return float("inf") if x == 0 else rational_valuation(x, p)


def as_plocal(m, p: int) -> tuple:
    """2x2 matrix of rationals whose denominators are powers of p."""
    rows = tuple(tuple(Fraction(x) for x in row) for row in m)
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError("expected a 2x2 matrix")
    for row in rows:
        for x in row:
            d = x.denominator
            while d % p == 0:
                d //= p
            if d != 1:
                raise ValueError(f"entry {x} has a denominator that is not a power of {p}")
    return rows


@dataclass(frozen=True, order=True)
class LatticeClass:
    p: int
    a: int
    b: int
    c: int

    def basis(self) -> tuple:
        p = self.p
        return ((Fraction(p**self.a), Fraction(self.c)), (Fraction(0), Fraction(p**self.b)))

    @property
    def label(self) -> str:
        return f"({self.a},{self.b},{self.c})"

    def __str__(self):
        return f"[[{self.p}^{self.a}, {self.c}], [0, {self.p}^{self.b}]]"


def base_class(p: int) -> LatticeClass:
    return LatticeClass(_check_prime(p), 0, 0, 0)


def canonicalize(basis, p: int) -> LatticeClass:
    """Canonical representative of the class of the lattice spanned by the
    columns of ``basis``."""
    _check_prime(p)
    (x11, x12), (x21, x22) = (tuple(Fraction(x) for x in r) for r in basis)
    if x11 * x22 - x12 * x21 == 0:
        raise SingularBasis("basis is singular")
    # make the bottom-right entry the one of smaller valuation, then clear bottom-left
    if _v(x21, p) < _v(x22, p):
        x11, x12, x21, x22 = x12, x11, x22, x21
    t = x21 / x22  # p-integral
    x11, x21 = x11 - t * x12, Fraction(0)
    # scale columns by units so the diagonal is p^a, p^b
    a, b = rational_valuation(x11, p), rational_valuation(x22, p)
    y = x12 * Fraction(p) ** b / x22  # second column rescaled by the unit of x22
    m = min(a, b, _v(y, p))
    a, b = a - m, b - m
    y = y * Fraction(p) ** (-m)
    mod = p**a
    c = y.numerator * pow(y.denominator, -1, mod) % mod if a else 0
    return LatticeClass(p, a, b, c)


def _same_p(x: LatticeClass, y: LatticeClass):
    if x.p != y.p:
        raise PrimeMismatch(f"primes differ: {x.p} vs {y.p}")


def class_distance(x: LatticeClass, y: LatticeClass) -> int:
    """|e2 - e1| for the elementary divisors p^e1, p^e2 of B_x^-1 B_y."""
    _same_p(x, y)
    p = x.p
    M = mat_mul(mat_inv(x.basis()), y.basis())
    e1 = min(_v(z, p) for row in M for z in row)
    return int(rational_valuation(det(M), p) - 2 * e1)


def neighbors(x: LatticeClass) -> list[LatticeClass]:
    """The p+1 classes of lattices strictly between M and pM, one per line of
    F_p^2."""
    p = x.p
    B = x.basis()
    subs = [((1, 0), (t, p)) for t in range(p)] + [((p, 0), (0, 1))]
    return [canonicalize(mat_mul(B, s), p) for s in subs]


@dataclass
class TreeBall:
    base: LatticeClass
    radius: int
    vertices: list[LatticeClass]
    depth: dict[LatticeClass, int]
    adjacency: dict[LatticeClass, list[LatticeClass]] = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2

    def to_dot(self) -> str:
        idx = {v: i for i, v in enumerate(self.vertices)}
        lines = [f"graph tree_p{self.base.p}_r{self.radius} {{"]
        for v in self.vertices:
            lines.append(f'  {idx[v]} [label="{v.label}"];')
        for v in self.vertices:
            for w in self.adjacency[v]:
                if idx[v] < idx[w]:
                    lines.append(f"  {idx[v]} -- {idx[w]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def expected_ball_size(p: int, R: int) -> int:
    return 1 + (p + 1) * (p**R - 1) // (p - 1)


def build_ball(base: LatticeClass, R: int) -> TreeBall:
    if R < 0:
        raise ValueError("radius >= 0")
    if expected_ball_size(base.p, R) > MAX_BALL:
        raise SizeLimit(f"ball of radius {R} for p={base.p} is too large")
    depth = {base: 0}
    order = [base]
    queue = deque([base])
    nbrs = {}
    while queue:
        v = queue.popleft()
        nbrs[v] = neighbors(v)
        if depth[v] == R:
            continue
        for w in nbrs[v]:
            if w not in depth:
                depth[w] = depth[v] + 1
                order.append(w)
                queue.append(w)
    adjacency = {v: sorted({w for w in nbrs[v] if w in depth}) for v in order}
    return TreeBall(base, R, order, depth, adjacency)


@dataclass
class TreeReport:
    vertices: int
    edges: int
    expected_vertices: int
    connected: bool
    acyclic: bool
    interior_degree_ok: bool
    depth_matches_distance: bool
    neighbor_symmetry: bool

    @property
    def passed(self) -> bool:
        return (self.connected and self.acyclic and self.interior_degree_ok
                and self.depth_matches_distance and self.neighbor_symmetry
                and self.vertices == self.expected_vertices)

    def to_dict(self) -> dict:
        return {**self.__dict__, "passed": self.passed}


def verify_tree(ball: TreeBall) -> TreeReport:
    p, R = ball.base.p, ball.radius
    V = ball.vertices
    seen = {ball.base}
    stack = [ball.base]
    while stack:
        v = stack.pop()
        for w in ball.adjacency[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    E = ball.num_edges
    interior = all(len(ball.adjacency[v]) == p + 1 for v in V if ball.depth[v] < R)
    dist_ok = all(class_distance(ball.base, v) == ball.depth[v] for v in V)
    sym = all(v in neighbors(w) for v in V for w in ball.adjacency[v])
    return TreeReport(len(V), E, expected_ball_size(p, R), len(seen) == len(V),
                      E == len(V) - 1, interior, dist_ok, sym)


# -- the action of SL2 -----------------------------------------------------

def act(g, x: LatticeClass) -> LatticeClass:
    g = as_plocal(g, x.p)
    if det(g) != 1:
        raise DeterminantNotOne(f"det = {det(g)}")
    return canonicalize(mat_mul(g, x.basis()), x.p)


def in_stabilizer(g, p: int) -> bool:
    base = base_class(p)
    return act(g, base) == base


def is_p_integral(g, p: int) -> bool:
    return all(_v(Fraction(z), p) >= 0 for row in g for z in row)


def orbit_parity(x: LatticeClass) -> int:
    return class_distance(base_class(x.p), x) % 2


def transitivity_witness(x: LatticeClass) -> tuple:
    """g in SL2(Z[1/p]) with act(g, base) = x; only even-parity x qualify."""
    s = x.a + x.b
    if s % 2:
        raise ValueError("odd vertices are not in the orbit of the base class")
    scale = Fraction(x.p) ** (-(s // 2))
    return tuple(tuple(z * scale for z in row) for row in x.basis())


def random_element(p: int, rng: random.Random, length: int = 4, max_den_exp: int = 2,
                   integral: bool = False) -> tuple:
    """Random element of SL2(Z[1/p]) as a product of elementary and diagonal
    matrices.  ``integral=True`` keeps it in SL2(Z)."""
    g = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    for _ in range(length):
        kind = rng.randrange(3 if not integral else 2)
        if kind < 2:
            e = 0 if integral else rng.randint(0, max_den_exp)
            t = Fraction(rng.randint(-p**2, p**2), p**e)
            m = ((1, t), (0, 1)) if kind == 0 else ((1, 0), (t, 1))
        else:
            k = rng.choice((-1, 1))
            m = ((Fraction(p) ** k, 0), (0, Fraction(p) ** (-k)))
        g = mat_mul(g, tuple(tuple(Fraction(z) for z in row) for row in m))
    return g
