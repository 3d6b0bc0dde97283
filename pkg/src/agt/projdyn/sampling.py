"""Deterministic low-discrepancy samples on projective space."""
from __future__ import annotations

import numpy as np
from scipy.stats import norm, qmc

from .linalg import normalize

DEFAULT_SEED = 20240601


def sphere_points(d: int, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """n quasi-uniform unit vectors in R^d (scrambled Halton through the
    Gaussian quantile).  Antipodes represent the same projective point."""
    u = qmc.Halton(d, scramble=True, seed=seed).random(n)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    return normalize(norm.ppf(u))


def complement_basis(n: np.ndarray) -> np.ndarray:
    """Orthonormal basis (rows) of the orthogonal complement of unit n."""
    d = len(n)
    q, _ = np.linalg.qr(np.column_stack([n, np.eye(d)]))
    return q[:, 1:d].T


def outside_hyperplane(normal, eps: float, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Points with d(x, H) >= eps: quasi-uniform points plus points exactly
    at distance eps, which is where contraction is weakest."""
    normal = normalize(normal)
    d = len(normal)
    pts = sphere_points(d, n, seed)
    pts = pts[np.abs(pts @ normal) >= eps]
    W = complement_basis(normal)
    dirs = normalize(sphere_points(d - 1, max(n // 4, 8), seed + 1) @ W) if d > 2 else W
    edge = eps * normal + np.sqrt(1 - eps**2) * dirs
    return np.vstack([pts, edge, normal[None, :]])


def ball_points(center, radius: float, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Points of P(R^d) within sine-distance ``radius`` of ``center``,
    including points on the boundary sphere."""
    c = normalize(center)
    d = len(c)
    W = complement_basis(c)
    tmax = radius / np.sqrt(1 - radius**2)
    raw = sphere_points(d - 1, n, seed) if d > 2 else np.array([[1.0], [-1.0]] * max(n // 2, 1))
    dirs = normalize(raw @ W) if d > 2 else raw @ W
    scale = np.linspace(0.0, 1.0, len(dirs)) ** (1.0 / max(d - 1, 1))
    scale[-max(len(dirs) // 8, 1):] = 1.0
    pts = c + (tmax * scale)[:, None] * dirs
    return normalize(pts)
