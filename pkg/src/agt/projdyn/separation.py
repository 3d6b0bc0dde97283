"""Empirical (n, r)-separating families.

A configuration is n points and n hyperplane normals.  An element f scores
``min_{i,j} min(d(f v_i, H_j), d(f^-1 v_i, H_j))`` on it; a family F scores the
best of its members.  The family is chosen greedily against a pool of random,
degenerate and adversarially optimized configurations, and r is the worst
family score over that pool.  This is a measured estimate, not a proof.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import SearchExhausted
from .linalg import as_realmat, normalize
from .sampling import DEFAULT_SEED, sphere_points

R_FLOOR = 1e-3


@dataclass
class SeparatingFamily:
    indices: list[int]
    members: list[np.ndarray]
    r: float
    n: int
    configs_tested: int
    worst_config: tuple[np.ndarray, np.ndarray] | None = None
    pool: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "indices": self.indices,
            "members": [m.tolist() for m in self.members],
            "r": self.r,
            "n": self.n,
            "configs_tested": self.configs_tested,
            "worst_config": None if self.worst_config is None else {
                "points": self.worst_config[0].tolist(),
                "normals": self.worst_config[1].tolist(),
            },
        }


def _scores(mats, invs, V, N) -> np.ndarray:
    """scores[k, m] for candidate k on configuration m.  V, N: (m, n, d)."""
    out = np.empty((len(mats), V.shape[0]))
    for k, (f, fi) in enumerate(zip(mats, invs)):
        best = np.inf
        for g in (f, fi):
            img = normalize(V @ g.T)
            dist = np.abs(np.einsum("mid,mjd->mij", img, N))
            best = np.minimum(best, dist.min(axis=(1, 2)))
        out[k] = best
    return out


def _random_configs(d, n, count, seed):
    P = sphere_points(d, count * n, seed).reshape(count, n, d)
    Q = sphere_points(d, count * n, seed + 17).reshape(count, n, d)
    return P, Q


def _degenerate_configs(d, n, count, seed):
    """Configurations with v_1 on every hyperplane, plus coordinate ones."""
    rng = np.random.default_rng(seed)
    Vs, Ns = [], []
    E = np.eye(d)
    for i in range(d):
        for j in range(d):
            if i != j:
                Vs.append(np.repeat(E[i][None], n, 0))
                Ns.append(np.repeat(E[j][None], n, 0))
    for _ in range(count):
        V = normalize(rng.standard_normal((n, d)))
        N = normalize(rng.standard_normal((n, d)))
        N = normalize(N - (N @ V[0])[:, None] * V[0][None, :])
        Vs.append(V)
        Ns.append(N)
    return np.array(Vs), np.array(Ns)


def _greedy(S: np.ndarray, max_size: int) -> list[int]:
    chosen: list[int] = []
    cur = np.zeros(S.shape[1])
    best_val = -1.0
    while len(chosen) < max_size:
        vals = np.minimum.reduce(np.maximum(cur[None, :], S), axis=1) if chosen else S.min(axis=1)
        k = int(np.argmax(vals))
        if vals[k] <= best_val + 1e-12:
            break
        chosen.append(k)
        best_val = float(vals[k])
        cur = np.maximum(cur, S[k])
    return chosen


def _adversarial(mats, invs, V0, N0, iters=400):
    """Locally minimize the family score starting from a configuration."""
    n, d = V0.shape

    def unpack(x):
        x = x.reshape(2, n, d)
        return normalize(x[0])[None], normalize(x[1])[None]

    def obj(x):
        V, N = unpack(x)
        return float(_scores(mats, invs, V, N).max())

    res = minimize(obj, np.concatenate([V0.ravel(), N0.ravel()]), method="Nelder-Mead",
                   options={"maxiter": iters, "xatol": 1e-10, "fatol": 1e-12})
    V, N = unpack(res.x)
    return V[0], N[0]


def separating_search(candidates, n: int = 2, trial_configs: int = 300, max_size: int = 8,
                      rounds: int = 3, adversarial_starts: int = 6,
                      seed: int = DEFAULT_SEED) -> SeparatingFamily:
    """Greedy choice of F from ``candidates`` and its empirical separation r."""
    mats = [as_realmat(c) for c in candidates]
    if not mats:
        raise ValueError("no candidates")
    invs = [np.linalg.inv(m) for m in mats]
    d = mats[0].shape[0]
    V, N = _random_configs(d, n, trial_configs, seed)
    Vd, Nd = _degenerate_configs(d, n, max(trial_configs // 10, 4), seed + 3)
    V, N = np.concatenate([V, Vd]), np.concatenate([N, Nd])
    S = _scores(mats, invs, V, N)
    chosen = _greedy(S, max_size)
    for _ in range(rounds):
        fam = S[chosen].max(axis=0)
        worst = np.argsort(fam)[:adversarial_starts]
        sub_m, sub_i = [mats[k] for k in chosen], [invs[k] for k in chosen]
        newV, newN = [], []
        for m in worst:
            v, h = _adversarial(sub_m, sub_i, V[m], N[m])
            newV.append(v)
            newN.append(h)
        V = np.concatenate([V, np.array(newV)])
        N = np.concatenate([N, np.array(newN)])
        S = np.concatenate([S, _scores(mats, invs, np.array(newV), np.array(newN))], axis=1)
        chosen = _greedy(S, max_size)
    fam = S[chosen].max(axis=0)
    m = int(np.argmin(fam))
    r = float(fam[m])
    result = SeparatingFamily(chosen, [mats[k] for k in chosen], r, n, V.shape[0], (V[m], N[m]), (V, N))
    if r < R_FLOOR:
        raise SearchExhausted(f"empirical separation r={r:.3g} below floor {R_FLOOR}")
    return result
