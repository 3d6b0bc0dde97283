"""Free group words, ball enumeration and the paradoxical decomposition of F2.

Words are stored run-length encoded as tuples of ``(generator, exponent)``
pairs.  Generators are indexed ``0..rank-1``; inverses are negative exponents.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

_NAMES = "abcdefghijklmnopqrstuvwxyz"


class Letter(NamedTuple):
    generator: int
    exponent: int


class Word(tuple):
    """A reduced word.  The empty word is the identity.

    Construct through :func:`reduce` (or :meth:`parse`) unless the letters are
    already known to be reduced.
    """

    __slots__ = ()

    def __new__(cls, letters: Iterable = ()):
        return super().__new__(cls, ((int(g), int(e)) for g, e in letters))

    def __len__(self):  # word length, not number of runs
        return sum(abs(e) for _, e in self.runs())

    def runs(self) -> Iterator[tuple[int, int]]:
        return tuple.__iter__(self)

    @property
    def nruns(self) -> int:
        return tuple.__len__(self)

    def __str__(self):
        if not self.nruns:
            return "ε"
        parts = []
        for g, e in self.runs():
            name = _NAMES[g] if g < len(_NAMES) else f"x{g}"
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)

    def __repr__(self):
        return f"Word({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse ``"a b^-1 a^2"``-style text (whitespace separated)."""
        raw = []
        for tok in text.split():
            if tok in ("ε", "1", "e"):
                continue
            m = re.fullmatch(r"([a-z])(?:\^?(-?\d+))?", tok)
            if not m:
                raise ValueError(f"bad letter {tok!r}")
            exp = int(m.group(2)) if m.group(2) else 1
            raw.append(Letter(_NAMES.index(m.group(1)), exp))
        return reduce(raw)

    def first(self) -> Letter | None:
        return Letter(*tuple.__getitem__(self, 0)) if self.nruns else None

    def last(self) -> Letter | None:
        return Letter(*tuple.__getitem__(self, -1)) if self.nruns else None

    def letters(self) -> Iterator[tuple[int, int]]:
        """Unit letters ``(generator, ±1)`` in order."""
        for g, e in self.runs():
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield g, s

    def rank_bound(self) -> int:
        return 1 + max((g for g, _ in self.runs()), default=-1)


IDENTITY = Word()
_mk = tuple.__new__


def reduce(raw: Iterable) -> Word:
    """Freely reduce a list of letters (exponents may be any integers)."""
    stack: list[list[int]] = []
    for g, e in raw:
        if e == 0:
            continue
        if stack and stack[-1][0] == g:
            stack[-1][1] += e
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([g, e])
    return Word(stack)


def multiply(u: Word, v: Word) -> Word:
    if not u.nruns:
        return v
    if not v.nruns:
        return u
    i, j = tuple.__len__(u), 0
    nv = tuple.__len__(v)
    mid = ()
    while i and j < nv:
        g, e = tuple.__getitem__(u, i - 1)
        h, f = tuple.__getitem__(v, j)
        if g != h:
            break
        i -= 1
        j += 1
        if e + f:
            mid = ((g, e + f),)
            break
    return _mk(Word, u[:i] + mid + v[j:])


def invert(u: Word) -> Word:
    return _mk(Word, tuple((g, -e) for g, e in reversed(u[:])))


def generator(g: int, exponent: int = 1) -> Word:
    return Word([(g, exponent)])


def _extensions(rank: int):
    return [(g, s) for g in range(rank) for s in (1, -1)]


def extend(w: Word, g: int, s: int) -> Word | None:
    """Append the unit letter ``g^s`` on the right; ``None`` if it cancels."""
    if not tuple.__len__(w):
        return _mk(Word, ((g, s),))
    lg, le = tuple.__getitem__(w, -1)
    if lg == g:
        if (le > 0) != (s > 0):
            return None
        return _mk(Word, w[:-1] + ((g, le + s),))
    return _mk(Word, w[:] + ((g, s),))


def enumerate_ball(rank: int, n: int) -> list[Word]:
    """All reduced words of length <= n, ordered by length then letter order
    ``a, a^-1, b, b^-1, ...``."""
    if rank < 1 or n < 0:
        raise ValueError("rank >= 1 and n >= 0 required")
    out = []
    for level in ball_levels(rank, n):
        out.extend(level)
    return out


def ball_levels(rank: int, n: int) -> list[list[Word]]:
    """Spheres of radius 0..n, each in deterministic letter order."""
    letters = _extensions(rank)
    levels = [[IDENTITY]]
    for _ in range(n):
        nxt = []
        for w in levels[-1]:
            for g, s in letters:
                x = extend(w, g, s)
                if x is not None:
                    nxt.append(x)
        levels.append(nxt)
    return levels


def ball_size(rank: int, n: int) -> int:
    """Closed form ``1 + 2r((2r-1)^n - 1)/(2r-2)`` (``2n+1`` for rank 1)."""
    if rank == 1:
        return 2 * n + 1
    q = 2 * rank - 1
    return 1 + 2 * rank * (q**n - 1) // (q - 1)


class Piece(enum.Enum):
    F_a = "F_a"
    F_aInv = "F_aInv"
    F_b = "F_b"
    F_bInv = "F_bInv"
    Identity = "Identity"


_PIECE = {(0, 1): Piece.F_a, (0, -1): Piece.F_aInv, (1, 1): Piece.F_b, (1, -1): Piece.F_bInv}


def _piece(w: Word) -> Piece:
    if not tuple.__len__(w):
        return Piece.Identity
    g, e = tuple.__getitem__(w, 0)
    return _PIECE[(g, 1 if e > 0 else -1)]


def classify_piece(w: Word) -> Piece:
    if w.rank_bound() > 2:
        raise ValueError("classify_piece is defined for rank 2 only")
    first = w.first()
    if first is None:
        return Piece.Identity
    return _PIECE[(first.generator, 1 if first.exponent > 0 else -1)]


@dataclass
class ParadoxReport:
    depth: int
    ball_size: int
    piece_counts: dict[str, int]
    identities: list[dict] = field(default_factory=list)
    counterexample: str | None = None
    note: str = (
        "a^-1 F_a = F2 minus F_{a^-1} is checked on words of length <= depth; "
        "membership of the translates uses the ball of radius depth+1"
    )

    @property
    def passed(self) -> bool:
        return all(i["status"] == "pass" for i in self.identities)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "ball_size": self.ball_size,
            "piece_counts": self.piece_counts,
            "identities": self.identities,
            "counterexample": self.counterexample,
            "passed": self.passed,
            "note": self.note,
        }


def _check_translate(x: int, inner, outer) -> str | None:
    """Check x^-1 F_x = F2 \\ F_{x^-1} on the inner ball.

    ``inner``/``outer`` map words of length <= n / <= n+1 to their pieces.
    Returns a counterexample description or None.
    """
    gx = generator(x, 1)
    gx_inv = generator(x, -1)
    start, start_inv = _PIECE[(x, 1)], _PIECE[(x, -1)]
    # w in x^-1 F_x  <=>  x w in F_x
    for w, piece in inner.items():
        xw = multiply(gx, w)
        in_lhs = outer[xw] is start
        in_rhs = piece is not start_inv
        if in_lhs != in_rhs:
            return f"{w}: x*w={xw} in F_x is {in_lhs}, w outside F_x^-1 is {in_rhs}"
    # converse direction: every u in F_x of length <= n+1 lands outside F_{x^-1}
    for u, piece in outer.items():
        if piece is start:
            v = multiply(gx_inv, u)
            if _piece(v) is start_inv:
                return f"{u} in F_x but x^-1*u={v} in F_x^-1"
    return None


def verify_paradox(n: int) -> ParadoxReport:
    """Exhaustively check the five-piece partition and both translation
    identities of F2 on the ball of radius ``n``."""
    if n < 1:
        raise ValueError("n >= 1 required")
    levels = ball_levels(2, n + 1)
    inner = {w: _piece(w) for level in levels[:-1] for w in level}
    outer = dict(inner)
    outer.update((w, _piece(w)) for w in levels[-1])
    counts = {p.value: 0 for p in Piece}
    for p in inner.values():
        counts[p.value] += 1

    report = ParadoxReport(depth=n, ball_size=len(inner), piece_counts=counts)
    partition_ok = sum(counts.values()) == len(inner) == ball_size(2, n)
    report.identities.append(
        {"name": "five-piece partition", "status": "pass" if partition_ok else "fail"}
    )
    for x, name in ((0, "a^-1 F_a = F2 \\ F_{a^-1}"), (1, "b^-1 F_b = F2 \\ F_{b^-1}")):
        bad = _check_translate(x, inner, outer)
        report.identities.append({"name": name, "status": "fail" if bad else "pass"})
        if bad and report.counterexample is None:
            report.counterexample = bad
    return report
