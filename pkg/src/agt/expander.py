"""Cayley graphs of SL_k(Z/n), spectral gaps, exact expansion and the
displacement identity for indicator vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy

from .errors import ConvergenceFailure, NotGenerating
from .graph import ExpansionResult, FiniteGraph, cheeger_bruteforce, complete_graph, cycle_graph

__all__ = [
    "build_sl_cayley",
    "sl_order",
    "elementary_generators",
    "spectral_gap",
    "SpectralReport",
    "edge_expansion_exact",
    "displacement_identity_check",
    "cycle_graph",
    "complete_graph",
]

DENSE_MAX = 2000


def sl_order(k: int, n: int) -> int:
    """|SL_k(Z/n)| = n^(k^2-1) prod_{p|n} prod_{i=2..k} (1 - p^-i)."""
    q = Fraction(n) ** (k * k - 1)
    for p in sympy.factorint(n):
        for i in range(2, k + 1):
            q *= 1 - Fraction(1, p**i)
    assert q.denominator == 1
    return int(q)


def _ident(k):
    return tuple(int(i == j) for i in range(k) for j in range(k))


def elementary_generators(k: int, n: int) -> list[tuple]:
    """E_ij(+1), E_ij(-1) for i != j, reduced mod n and deduplicated."""
    out = []
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            for t in (1, -1):
                m = list(_ident(k))
                m[i * k + j] = t % n
                m = tuple(m)
                if m not in out:
                    out.append(m)
    return out


def _mul(k, n):
    r = range(k)

    def mul(x, y):
        return tuple(
            sum(x[i * k + l] * y[l * k + j] for l in r) % n for i in r for j in r
        )

    return mul


def _inv_mod(m: tuple, k: int, n: int) -> tuple:
    M = sympy.Matrix(k, k, list(m))
    return tuple(int(x) % n for x in M.inv_mod(n))


def build_sl_cayley(k: int, n: int, gens: Sequence[Sequence[int]] | None = None) -> FiniteGraph:
    """Cayley graph of SL_k(Z/n) for right multiplication by ``gens``.

    ``gens`` are flattened k x k integer matrices; they are reduced mod n and
    closed under inversion.  Raises NotGenerating if the BFS does not reach the
    whole group.
    """
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    if n < 2:
        raise ValueError("n >= 2")
    if gens is None:
        S = elementary_generators(k, n)
    else:
        S = []
        for g in gens:
            flat = tuple(int(x) % n for x in np.asarray(g).ravel())
            if len(flat) != k * k:
                raise ValueError("generator has the wrong size")
            for x in (flat, _inv_mod(flat, k, n)):
                if x not in S:
                    S.append(x)
    mul = _mul(k, n)
    e = _ident(k)
    index = {e: 0}
    elems = [e]
    head = 0
    while head < len(elems):
        x = elems[head]
        head += 1
        for s in S:
            y = mul(x, s)
            if y not in index:
                index[y] = len(elems)
                elems.append(y)
    order = sl_order(k, n)
    if len(elems) != order:
        raise NotGenerating(f"generators reach {len(elems)} of {order} elements of SL_{k}(Z/{n})")
    perms = np.array([[index[mul(x, s)] for x in elems] for s in S], dtype=np.int64)
    labels = [str(x) for x in elems]
    g = FiniteGraph.from_perms(perms, labels=labels, name=f"SL{k}_Z{n}")
    g.generators = S  # type: ignore[attr-defined]
    return g


@dataclass
class SpectralReport:
    top: float
    lambda2: float
    degree: int
    method: str
    iterations: int = 0
    connected: bool = True
    multiplicity_top: int = 1

    @property
    def gap(self) -> float:
        return self.degree - self.lambda2

    @property
    def normalized_gap(self) -> float:
        return self.gap / self.degree

    def to_dict(self) -> dict:
        return {
            "top": self.top,
            "lambda2": self.lambda2,
            "gap": self.gap,
            "normalized_gap": self.normalized_gap,
            "degree": self.degree,
            "method": self.method,
            "iterations": self.iterations,
            "connected": self.connected,
            "multiplicity_top": self.multiplicity_top,
        }


def _matvec(g: FiniteGraph):
    if g.perms is not None:
        P = g.perms

        def mv(v):
            return v[P].sum(axis=0)

        return mv
    from scipy.sparse import csr_matrix

    rows = [u for u, nb in enumerate(g.adj) for _ in nb]
    cols = [v for nb in g.adj for v in nb]
    A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    return lambda v: A @ v


def spectral_gap(g: FiniteGraph, tol: float = 1e-10, max_iter: int = 200_000) -> SpectralReport:
    """Second adjacency eigenvalue of a regular graph.

    Dense symmetric solve up to DENSE_MAX vertices.  Beyond that, power
    iteration for A + dI on the complement of the constants, from a fixed
    start vector.
    """
    d = g.degree
    if d is None:
        raise ValueError("graph must be regular")
    n = g.n
    if n <= DENSE_MAX:
        ev = np.linalg.eigvalsh(g.adjacency_matrix())[::-1]
        mult = int(np.sum(np.abs(ev - d) < 1e-9))
        lam2 = float(ev[1]) if n > 1 else float("nan")
        return SpectralReport(float(ev[0]), lam2, d, "dense", 0, mult == 1, mult)
    mv = _matvec(g)
    i = np.arange(n, dtype=float)
    v = 1.0 + 0.5 * np.sin(1.0 + i) + 0.25 * np.cos(0.37 * i * i)
    v -= v.mean()
    v /= np.linalg.norm(v)
    lam = None
    for it in range(1, max_iter + 1):
        w = mv(v) + d * v
        w -= w.mean()
        nw = np.linalg.norm(w)
        new = float(v @ w) - d
        v = w / nw
        if lam is not None and abs(new - lam) < tol:
            connected = abs(new - d) > 1e-6
            return SpectralReport(float(d), new, d, "iterative", it, connected, 1 if connected else 2)
        lam = new
    raise ConvergenceFailure(f"power iteration did not reach tol {tol} in {max_iter} steps")


def edge_expansion_exact(g: FiniteGraph) -> ExpansionResult:
    """Exact min |dA|/|A| over |A| <= |V|/2 with the vertex boundary dA."""
    return cheeger_bruteforce(g)


@dataclass
class DisplacementReport:
    set_size: int
    n: int
    rows: list[dict] = field(default_factory=list)
    tol: float = 1e-12

    @property
    def max_error(self) -> float:
        return max((r["error"] for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def to_dict(self) -> dict:
        return {
            "set_size": self.set_size,
            "n": self.n,
            "rows": self.rows,
            "max_error": self.max_error,
            "passed": self.passed,
        }


def displacement_identity_check(g: FiniteGraph, A: Iterable[int], tol: float = 1e-12) -> DisplacementReport:
    """Compare ||rho(s)v - v||^2 for the normalized centred indicator of A with
    |As △ A| / (|A| (1 - |A|/|V|)), for each generator permutation s.

    ``rho(s)f = f o s``; the left side is a vector computation and the right
    side a set count, so the two are computed independently.
    """
    if g.perms is None:
        raise ValueError("graph has no generator permutations")
    n = g.n
    A = sorted(set(int(a) for a in A))
    if not 0 < len(A) < n:
        raise ValueError("A must be a nonempty proper subset")
    ind = np.zeros(n)
    ind[A] = 1.0
    v = ind - len(A) / n
    vhat = v / np.linalg.norm(v)
    Aset = set(A)
    rep = DisplacementReport(len(A), n, tol=tol)
    for j, perm in enumerate(g.perms):
        lhs = float(np.sum((vhat[perm] - vhat) ** 2))
        moved = {int(perm[a]) for a in A}
        sym = len(moved ^ Aset)
        rhs = sym / (len(A) * (1 - len(A) / n))
        rep.rows.append({"generator": j, "sym_diff": sym, "lhs": lhs, "rhs": rhs, "error": abs(lhs - rhs)})
    return rep
