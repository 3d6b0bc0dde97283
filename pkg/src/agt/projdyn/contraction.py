"""Contraction on projective space: certificates, Lipschitz estimates and the
choice of a contracting exterior power."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CertFailure, NotDiverging
from .linalg import act_point, as_realmat, kak, normalize, proj_metric
from .sampling import DEFAULT_SEED, ball_points, outside_hyperplane


def lipschitz_ratio_bound(delta: float) -> float:
    """Lower bound sqrt(1 - delta^2)/delta on alpha_1/alpha_2 for a map that is
    delta-Lipschitz on some open set."""
    if not 0 < delta < 1:
        raise ValueError("0 < delta < 1")
    return float(np.sqrt(1 - delta * delta) / delta)


def contraction_radius(ratio: float) -> float:
    """Smallest eps for which alpha_1/alpha_2 = ratio guarantees eps-contraction.

    For d(x, H) >= eps the image satisfies d(gx, v) <= (1/ratio) sqrt(1-eps^2)/eps;
    setting this equal to eps gives eps^2 = (-rho^2 + sqrt(rho^4 + 4 rho^2))/2
    with rho = 1/ratio.
    """
    rho = 1.0 / ratio
    if rho < 1e-7:
        # avoid cancellation: eps^2 = rho - rho^2/2 + O(rho^3)
        return float(np.sqrt(rho * (1 - rho / 2)))
    r2 = rho * rho
    return float(np.sqrt((-r2 + np.sqrt(r2 * r2 + 4 * r2)) / 2))


def contraction_ratio_threshold(eps: float) -> float:
    """The ratio M(eps) = sqrt(1-eps^2)/eps^2 at which contraction_radius = eps."""
    if not 0 < eps < 1:
        raise ValueError("0 < eps < 1")
    return float(np.sqrt(1 - eps * eps) / (eps * eps))


def lipschitz_constant_bound(g, g_inv=None) -> float:
    """Global Lipschitz bound alpha_1 alpha_2 / alpha_d^2 for g on P(R^d)."""
    a = kak(g, g_inv).alphas
    return float(a[0] * a[1] / a[-1] ** 2)


@dataclass
class ContractionCertificate:
    g: np.ndarray
    eps: float
    v: np.ndarray
    H: np.ndarray  # unit normal
    samples: int
    max_image_distance: float
    ratio: float
    analytic_radius: float

    @property
    def valid(self) -> bool:
        return self.max_image_distance <= self.eps

    def to_dict(self) -> dict:
        return {
            "g": self.g.tolist(),
            "eps": self.eps,
            "v": self.v.tolist(),
            "H_normal": self.H.tolist(),
            "samples": self.samples,
            "max_image_distance": self.max_image_distance,
            "ratio": self.ratio,
            "analytic_radius": self.analytic_radius,
            "valid": self.valid,
        }


def contraction_check(g, eps: float, nsamples: int = 2000, g_inv=None,
                      seed: int = DEFAULT_SEED) -> ContractionCertificate:
    """Sample points outside the eps-neighbourhood of the KAK repelling
    hyperplane and check their images stay within eps of the attracting point."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    g = as_realmat(g)
    dec = kak(g, g_inv)
    v, n = dec.attracting, dec.repelling_normal
    pts = outside_hyperplane(n, eps, nsamples, seed)
    dist = proj_metric(act_point(g, pts), v)
    i = int(np.argmax(dist))
    cert = ContractionCertificate(g, eps, v, n, len(pts), float(dist[i]), dec.ratio,
                                  contraction_radius(dec.ratio))
    if not cert.valid:
        raise CertFailure(
            f"image at distance {dist[i]:.3g} > eps={eps}",
            certificate=cert,
            witness=pts[i].tolist(),
        )
    return cert


def local_lipschitz(g, center, radius: float, nsamples: int = 400,
                    seed: int = DEFAULT_SEED) -> float:
    """Largest observed d(gx, gy)/d(x, y) over sampled pairs in the ball."""
    if not 0 < radius < 1:
        raise ValueError("0 < radius < 1")
    g = as_realmat(g)
    P = ball_points(center, radius, nsamples, seed)
    c = normalize(center)
    xs, ys = [np.repeat(c[None, :], len(P), 0)], [P]
    for shift in (1, 7, len(P) // 3 or 1):
        xs.append(P)
        ys.append(np.roll(P, shift, axis=0))
    # near-infinitesimal pairs capture the derivative
    h = 1e-6 * radius
    jitter = normalize(np.roll(P, 1, axis=1) - P * np.sum(np.roll(P, 1, axis=1) * P, axis=1)[:, None])
    xs.append(P)
    ys.append(normalize(P + h * jitter))
    X, Y = np.vstack(xs), np.vstack(ys)
    dxy = proj_metric(X, Y)
    keep = dxy > 1e-12
    gx, gy = act_point(g, X[keep]), act_point(g, Y[keep])
    return float(np.max(proj_metric(gx, gy) / dxy[keep]))


def pick_contracting_level(gs) -> int:
    """Index l (1-based) whose ratio alpha_l/alpha_{l+1} is largest at the end
    of the sequence; ties go to the smallest l."""
    gs = [as_realmat(g) for g in gs]
    if len(gs) < 2:
        raise ValueError("need at least two matrices")
    A = np.array([np.linalg.svd(g, compute_uv=False) for g in gs])
    ratios = A[:, :-1] / A[:, 1:]
    growth = ratios[-1] / ratios[0]
    if np.all(growth <= 1 + 1e-9):
        raise NotDiverging("no ratio alpha_l/alpha_{l+1} grows along the sequence")
    final = ratios[-1]
    best = final.max()
    for ell, val in enumerate(final, start=1):
        if val >= best * (1 - 1e-9):
            return ell
    raise AssertionError  # pragma: no cover
