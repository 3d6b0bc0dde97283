"""Finite undirected graphs, vertex boundaries and exact expansion minima."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import SizeLimit

BRUTE_FORCE_MAX = 24


@dataclass
class FiniteGraph:
    """Adjacency-list graph.  ``perms`` optionally holds one vertex permutation
    per generator (Cayley graphs: ``x -> x*s``); ``labels`` are display names."""

    adj: list[list[int]]
    perms: np.ndarray | None = None
    labels: list[str] | None = None
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.adj)

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adj])

    @property
    def degree(self) -> int | None:
        """Common degree if the graph is regular, else None."""
        deg = self.degrees()
        if len(deg) and (deg == deg[0]).all():
            return int(deg[0])
        return None

    def num_edges(self) -> int:
        """Edges counted with multiplicity (each appears in two lists)."""
        return sum(len(nb) for nb in self.adj) // 2

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for u, nb in enumerate(self.adj):
            for v in nb:
                A[u, v] += 1
        return A

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def vertex_boundary(self, A) -> set[int]:
        A = set(A)
        return {v for u in A for v in self.adj[u]} - A

    def to_dot(self, name: str | None = None) -> str:
        lines = [f"graph {name or self.name or 'G'} {{"]
        for u in range(self.n):
            label = self.labels[u] if self.labels else str(u)
            lines.append(f'  {u} [label="{label}"];')
        for u, nb in enumerate(self.adj):
            for v in sorted(set(nb)):
                if u < v:
                    lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_perms(cls, perms: Sequence[Sequence[int]], labels=None, name="") -> "FiniteGraph":
        """Graph with edges ``x -- perm[x]`` for each permutation (multi-edges kept,
        so the degree equals the number of permutations)."""
        P = np.asarray(perms, dtype=np.int64)
        adj = [[int(P[j, x]) for j in range(len(P))] for x in range(P.shape[1])]
        return cls(adj=adj, perms=P, labels=labels, name=name)


def cycle_graph(m: int) -> FiniteGraph:
    if m < 3:
        raise ValueError("cycle needs m >= 3")
    fwd = [(x + 1) % m for x in range(m)]
    bwd = [(x - 1) % m for x in range(m)]
    return FiniteGraph.from_perms([fwd, bwd], name=f"C{m}")


def complete_graph(m: int) -> FiniteGraph:
    adj = [[v for v in range(m) if v != u] for u in range(m)]
    return FiniteGraph(adj=adj, name=f"K{m}")


@dataclass
class ExpansionResult:
    value: Fraction
    witness: list[int]
    boundary_size: int
    per_size: dict[int, int] = field(default_factory=dict)  # |A| -> min |dA|

    def to_dict(self) -> dict:
        return {
            "value": str(self.value),
            "float": float(self.value),
            "witness": self.witness,
            "boundary_size": self.boundary_size,
            "per_size": {str(k): v for k, v in self.per_size.items()},
        }


def _or_table(masks: np.ndarray) -> np.ndarray:
    """OR of ``masks[i]`` over the set bits i of every index 0..2^len-1."""
    t = np.zeros(1, dtype=np.uint32)
    for m in masks:
        t = np.concatenate([t, t | np.uint32(m)])
    return t


def cheeger_bruteforce(g: FiniteGraph) -> ExpansionResult:
    """Exact min of |dA|/|A| over nonempty A with |A| <= |V|/2, where dA is the
    vertex boundary.  Exhaustive over all 2^|V| subsets, vectorized by bits."""
    n = g.n
    if n > BRUTE_FORCE_MAX:
        raise SizeLimit(f"brute force is limited to {BRUTE_FORCE_MAX} vertices (got {n})")
    if n < 2:
        raise ValueError("need at least two vertices")
    nbmask = np.zeros(n, dtype=np.uint32)
    for u, nb in enumerate(g.adj):
        for v in nb:
            nbmask[u] |= np.uint32(1 << v)
    h = min(n, 16)
    lo_tab = _or_table(nbmask[:h])
    hi_tab = _or_table(nbmask[h:])
    lo_idx = np.arange(1 << h, dtype=np.uint32)
    lo_pop = np.bitwise_count(lo_idx)
    half = n // 2
    best = {k: (n + 1, 0) for k in range(1, half + 1)}  # k -> (boundary, mask)
    for hi in range(1 << (n - h)):
        masks = (np.uint32(hi) << np.uint32(h)) | lo_idx if n > h else lo_idx
        sizes = lo_pop + np.bitwise_count(np.uint32(hi))
        bnd = np.bitwise_count((lo_tab | hi_tab[hi]) & ~masks)
        for k in range(1, half + 1):
            sel = sizes == k
            if not sel.any():
                continue
            vals = np.where(sel, bnd, np.uint8(255))
            i = int(np.argmin(vals))
            b = int(vals[i])
            if b < best[k][0]:
                best[k] = (b, int(masks[i]))
    value, bk, wmask = None, None, 0
    for k, (b, mask) in best.items():
        q = Fraction(b, k)
        if value is None or q < value:
            value, bk, wmask = q, b, mask
    witness = [v for v in range(n) if wmask >> v & 1]
    return ExpansionResult(value, witness, bk, {k: b for k, (b, _) in best.items()})
