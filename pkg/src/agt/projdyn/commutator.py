"""Commutators of elements near the identity in GL_n(C).

With x = 1 + X and y = 1 + Y one has [x, y] - 1 = (XY - YX) x^-1 y^-1, hence
||[x, y] - 1|| <= 2 ||X|| ||Y|| ||x^-1|| ||y^-1|| <= 8 ||X|| ||Y|| once both
inverses have norm below 2.  All norms are spectral (operator 2-norms).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CertFailure, NormsTooLarge


def _opnorm(m) -> float:
    return float(np.linalg.norm(m, 2))


def _square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def commutator(x, y) -> np.ndarray:
    x, y = _square(x), _square(y)
    return x @ y @ np.linalg.inv(x) @ np.linalg.inv(y)


@dataclass(frozen=True)
class CommutatorReport:
    defect: float  # ||[x,y] - 1||
    eps: float  # ||x - 1||
    delta: float  # ||y - 1||
    bound: float  # 8 eps delta
    sharp_bound: float  # 2 eps delta ||x^-1|| ||y^-1||
    inv_norms: tuple[float, float]

    @property
    def ok(self) -> bool:
        return self.defect <= self.bound * (1 + 1e-12) + 1e-15

    def to_dict(self) -> dict:
        return {
            "defect": self.defect,
            "eps": self.eps,
            "delta": self.delta,
            "bound": self.bound,
            "sharp_bound": self.sharp_bound,
            "inv_norms": list(self.inv_norms),
            "ok": self.ok,
        }


def commutator_defect(x, y) -> CommutatorReport:
    """Measured ||[x,y] - 1|| against 8 ||x-1|| ||y-1||.

    Raises NormsTooLarge when ||x^-1|| or ||y^-1|| is not below 2, where the
    bound no longer applies."""
    x, y = _square(x), _square(y)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same size")
    I = np.eye(x.shape[0])
    xi, yi = np.linalg.inv(x), np.linalg.inv(y)
    nx, ny = _opnorm(xi), _opnorm(yi)
    if nx >= 2 or ny >= 2:
        raise NormsTooLarge(f"||x^-1|| = {nx:.4g}, ||y^-1|| = {ny:.4g}; both must be < 2")
    eps, delta = _opnorm(x - I), _opnorm(y - I)
    # (XY - YX) x^-1 y^-1 avoids the cancellation in x y x^-1 y^-1 - 1
    X, Y = x - I, y - I
    defect = _opnorm((X @ Y - Y @ X) @ xi @ yi)
    rep = CommutatorReport(defect, eps, delta, 8 * eps * delta, 2 * eps * delta * nx * ny, (nx, ny))
    if not rep.ok:  # pragma: no cover - would contradict submultiplicativity
        raise CertFailure(f"defect {defect:.3g} exceeds 8 eps delta = {rep.bound:.3g}", certificate=rep)
    return rep


def random_perturbation(d: int, size: float, rng: np.random.Generator, complex_: bool = False) -> np.ndarray:
    """1 + X with X random and ||X|| = size exactly."""
    X = rng.standard_normal((d, d))
    if complex_:
        X = X + 1j * rng.standard_normal((d, d))
    X *= size / _opnorm(X)
    return np.eye(d) + X


@dataclass(frozen=True)
class IteratedReport:
    r: float
    eps: float  # ||x - 1||
    norms: list[float]  # ||y_k - 1|| for k = 0..n
    ratios: list[float]
    bounds: list[float]  # 1/r^k for k >= 1

    @property
    def ok(self) -> bool:
        return all(v < b for v, b in zip(self.norms[1:], self.bounds)) and \
            all(q <= 1 / self.r for q in self.ratios if np.isfinite(q))

    def to_dict(self) -> dict:
        return {"r": self.r, "eps": self.eps, "norms": self.norms, "ratios": self.ratios,
                "bounds": self.bounds, "ok": self.ok}


def iterated_commutators(x, y0, r: float, n: int = 5) -> IteratedReport:
    """y_k = [x, y_{k-1}] for k = 1..n.  For ||x - 1|| < 1/(8r) and y_0 in the
    same ball each step shrinks ||y - 1|| by at least 1/r, so ||y_k - 1|| < r^-k.
    """
    if r <= 1:
        raise ValueError("r must exceed 1")
    x, y = _square(x), _square(y0)
    I = np.eye(x.shape[0])
    eps = _opnorm(x - I)
    if eps >= 1 / (8 * r) or _opnorm(y - I) >= 1 / (8 * r):
        raise NormsTooLarge(f"x and y0 must lie within 1/(8r) = {1 / (8 * r):.4g} of the identity")
    norms = [_opnorm(y - I)]
    ratios = []
    for _ in range(n):
        rep = commutator_defect(x, y)
        y = commutator(x, y)
        norms.append(rep.defect)
        ratios.append(rep.defect / norms[-2] if norms[-2] > 0 else float("nan"))
    bounds = [r ** -k for k in range(1, n + 1)]
    return IteratedReport(r, eps, norms, ratios, bounds)
