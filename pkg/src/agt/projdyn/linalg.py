"""KAK decomposition, the wedge metric on projective space and exterior powers."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalFailure


@dataclass
class KAKDecomp:
    k1: np.ndarray
    alphas: np.ndarray  # descending
    k2: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return np.diag(self.alphas)

    def reconstruct(self) -> np.ndarray:
        return self.k1 @ np.diag(self.alphas) @ self.k2

    @property
    def attracting(self) -> np.ndarray:
        """k1 e1."""
        return self.k1[:, 0].copy()

    @property
    def repelling_normal(self) -> np.ndarray:
        """Unit normal of k2^-1 span(e2..ed), i.e. the first row of k2."""
        return self.k2[0].copy()

    @property
    def ratio(self) -> float:
        """alpha_1 / alpha_2."""
        return float(self.alphas[0] / self.alphas[1])


def as_realmat(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or not 2 <= g.shape[0] <= 20:
        raise ValueError("expected a square matrix of size 2..20")
    if not np.all(np.isfinite(g)):
        raise NumericalFailure("matrix has non-finite entries")
    return g


def kak(g, g_inv=None) -> KAKDecomp:
    """g = k1 diag(alphas) k2 with k1, k2 in SO(d) and alphas descending.

    If ``g_inv`` is supplied, small singular values are taken as reciprocals
    of the large singular values of the inverse, which keeps them accurate
    when the spread of g is near the limits of double precision.  A supplied
    inverse also marks g as known to be special linear: the floating
    determinant of a badly conditioned g is unreliable, so it is not tested.
    """
    g = as_realmat(g)
    if g_inv is None:
        sign, _ = np.linalg.slogdet(g)
        if sign <= 0:
            raise NumericalFailure("kak needs det(g) > 0")
    try:
        U, s, Vt = np.linalg.svd(g)
    except np.linalg.LinAlgError as e:  # pragma: no cover
        raise NumericalFailure(str(e)) from e
    if np.linalg.det(U) < 0:
        U[:, -1] *= -1
        Vt[-1] *= -1
    if g_inv is not None:
        s_inv = np.linalg.svd(as_realmat(g_inv), compute_uv=False)
        alt = 1.0 / s_inv[::-1]
        s = s.copy()
        for i in range(len(s)):
            # s[i] from g is accurate to ~eps*s[0]; alt[i] to ~eps*s[i]^2/s[-1]
            if s[0] / s[i] >= s[i] / s[-1]:
                s[i] = alt[i]
    return KAKDecomp(U, s, Vt)


def normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def proj_metric(x, y) -> float | np.ndarray:
    """||x ^ y|| / (||x|| ||y||), computed from 2x2 minors; broadcasts over
    leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    outer = x[..., :, None] * y[..., None, :]
    minors = outer - np.swapaxes(outer, -1, -2)
    wedge = np.sqrt(np.sum(minors**2, axis=(-1, -2)) / 2)
    out = wedge / (np.linalg.norm(x, axis=-1) * np.linalg.norm(y, axis=-1))
    return np.minimum(out, 1.0)


def hyperplane_distance(x, normal) -> float | np.ndarray:
    """d([x], H) = |<x, n>| / (|x| |n|) for the hyperplane with normal n."""
    x = np.asarray(x, dtype=float)
    n = np.asarray(normal, dtype=float)
    num = np.abs(np.sum(x * n, axis=-1))
    return np.minimum(num / (np.linalg.norm(x, axis=-1) * np.linalg.norm(n, axis=-1)), 1.0)


def act_point(g, x) -> np.ndarray:
    return normalize(np.asarray(x) @ np.asarray(g).T)


def act_hyperplane(g, normal, g_inv=None) -> np.ndarray:
    """Normal of g(H): the inverse transpose applied to the normal."""
    gi = np.linalg.inv(g) if g_inv is None else np.asarray(g_inv)
    return normalize(np.asarray(normal) @ gi)


def exterior_power(g, ell: int) -> np.ndarray:
    """Matrix of the ell-th exterior power in the basis e_I, I sorted."""
    g = as_realmat(g)
    d = g.shape[0]
    if not 1 <= ell <= d - 1:
        raise ValueError("1 <= ell <= d-1")
    if ell == 1:
        return g.copy()
    idx = np.array(list(itertools.combinations(range(d), ell)))
    sub = g[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def rotation2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_special_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_sl(d: int, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """Random element of SL_d(R): k1 diag(exp(t)) k2 with sum(t) = 0."""
    t = rng.normal(scale=spread, size=d)
    t -= t.mean()
    return random_special_orthogonal(d, rng) @ np.diag(np.exp(t)) @ random_special_orthogonal(d, rng)
