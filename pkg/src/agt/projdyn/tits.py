"""Construction of a free pair of ping-pong players in an unbounded subgroup
of SL_d(R).

Pipeline stages (numbers are reported by :class:`PipelineStuck`):

1. pick a word gamma with the largest alpha_1/alpha_2;
2. find a ball Omega on which gamma^-1 is 2-Lipschitz;
3. choose a separating family F (constant r, Lipschitz bound C) and f in F
   moving gamma^-1 Omega away from the repelling hyperplane of gamma;
4. gamma_0 = gamma f gamma^-1, raising the power of gamma until
   C^4 eps_0 < r (eps_0 is the analytic contraction radius of gamma_0^{+-1});
5. gamma_1 = f_0 gamma_0 and gamma_2 = f_1 gamma_1 f_1^-1 with their
   attracting points and repelling hyperplanes;
6. check the proximality inequalities, the ping-pong separation of the four
   neighbourhoods and sampled contraction/ping-pong tables;
7. optionally evaluate every reduced word of bounded length in the players
   exactly (integral generators only).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import words as W
from ..errors import PipelineStuck, SearchExhausted
from ..pingpong import exhaustive_nontriviality
from .contraction import contraction_radius, lipschitz_constant_bound, local_lipschitz
from .linalg import act_hyperplane, act_point, as_realmat, hyperplane_distance, kak, normalize, proj_metric
from .sampling import DEFAULT_SEED, ball_points, outside_hyperplane
from .separation import separating_search


def _imul(x, y):
    n = len(x)
    return tuple(tuple(sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _is_integral_sl(m: np.ndarray) -> bool:
    return bool(np.all(m == np.round(m))) and round(np.linalg.det(m)) == 1


@dataclass(frozen=True)
class Elt:
    """Group element tracked as a word, float matrix and inverse, and (for
    integral generators) exact integer matrix and inverse."""

    word: W.Word
    M: np.ndarray
    Minv: np.ndarray
    exact: tuple | None = None
    exact_inv: tuple | None = None

    def __mul__(self, o: "Elt") -> "Elt":
        w = W.multiply(self.word, o.word)
        if self.exact is not None and o.exact is not None:
            ex = _imul(self.exact, o.exact)
            exi = _imul(o.exact_inv, self.exact_inv)
            return Elt(w, np.array(ex, dtype=float), np.array(exi, dtype=float), ex, exi)
        return Elt(w, self.M @ o.M, o.Minv @ self.Minv)

    def inv(self) -> "Elt":
        return Elt(W.invert(self.word), self.Minv, self.M, self.exact_inv, self.exact)

    def __pow__(self, k: int) -> "Elt":
        out, base = None, self
        while k:
            if k & 1:
                out = base if out is None else out * base
            base = base * base
            k >>= 1
        return out

    def to_dict(self) -> dict:
        d = {"word": str(self.word), "matrix": self.M.tolist()}
        if self.exact is not None:
            d["exact"] = [[str(x) for x in row] for row in self.exact]
        return d


def _generators(gens) -> list[Elt]:
    out = []
    mats = [as_realmat(g) for g in gens]
    integral = all(_is_integral_sl(m) for m in mats)
    for i, m in enumerate(mats):
        mi = np.linalg.inv(m)
        if integral:
            ex = tuple(tuple(int(round(x)) for x in row) for row in m)
            exi = tuple(tuple(int(round(x)) for x in row) for row in mi)
            out.append(Elt(W.generator(i), m, mi, ex, exi))
        else:
            out.append(Elt(W.generator(i), m, mi))
    return out


def _evaluate(word: W.Word, gens: list[Elt]) -> Elt:
    d = gens[0].M.shape[0]
    if gens[0].exact is not None:
        I = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
        e = Elt(W.IDENTITY, np.eye(d), np.eye(d), I, I)
    else:
        e = Elt(W.IDENTITY, np.eye(d), np.eye(d))
    for g, s in word.letters():
        e = e * (gens[g] if s > 0 else gens[g].inv())
    return e


@dataclass
class PipelineParams:
    word_len: int = 4  # stage 1 word sample
    sep_word_len: int | None = None  # separating family candidates; None tries 2, 3, 4
    n_sep: int = 2
    trial_configs: int = 300
    max_power: int = 256
    margin: float = 4.0  # require C^4 eps <= r / margin
    omega_radius: float = 0.1
    nsamples: int = 600
    exact_check_len: int | None = 10
    seed: int = DEFAULT_SEED


@dataclass
class PingPongCert:
    gamma1: Elt
    gamma2: Elt
    pairs: dict[str, tuple[np.ndarray, np.ndarray]]  # player -> (v, H normal)
    construction: dict[str, np.ndarray]
    C: float
    r: float
    eps: float
    rho: float
    inequalities: list[dict]
    samples: dict
    family: list[str]
    stages: list[str] = field(default_factory=list)
    exact_check: dict | None = None

    @property
    def valid(self) -> bool:
        ok = all(i["ok"] for i in self.inequalities) and self.samples.get("ok", False)
        if self.exact_check is not None:
            ok = ok and self.exact_check["passed"]
        return ok

    def to_dict(self) -> dict:
        return {
            "gamma1": self.gamma1.to_dict(),
            "gamma2": self.gamma2.to_dict(),
            "pairs": {k: {"v": v.tolist(), "H_normal": h.tolist()} for k, (v, h) in self.pairs.items()},
            "construction": {k: v.tolist() for k, v in self.construction.items()},
            "C": self.C,
            "r": self.r,
            "eps": self.eps,
            "rho": self.rho,
            "C4_eps": self.C**4 * self.eps,
            "inequalities": self.inequalities,
            "samples": self.samples,
            "family": self.family,
            "stages": self.stages,
            "exact_check": self.exact_check,
            "valid": self.valid,
        }


def _apply_factored(dec, pts) -> np.ndarray:
    """g x through its KAK factors.  For strongly contracting g the plain
    product loses the small components to cancellation; the factored form
    keeps each coordinate to relative precision."""
    return normalize(((pts @ dec.k2.T) * dec.alphas) @ dec.k1.T)


def _ineq(name, value, threshold) -> dict:
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "ok": bool(value > threshold)}


SEP_LENGTHS = (2, 3, 4)


def construct_free_pair(gens, params: PipelineParams | None = None) -> PingPongCert:
    """Run the pipeline.  Without a fixed ``sep_word_len`` the candidate
    words for the separating family grow until stages 3 and 6 succeed."""
    P = params or PipelineParams()
    if P.sep_word_len is not None:
        return _construct(gens, P)
    last = None
    for L in SEP_LENGTHS:
        try:
            cert = _construct(gens, replace(P, sep_word_len=L))
        except PipelineStuck as e:
            if e.stage not in (3, 6):
                raise
            last = e
            continue
        cert.stages.insert(0, f"separating candidates: words of length <= {L}")
        return cert
    raise last


def _construct(gens, P: PipelineParams) -> PingPongCert:
    G = _generators(gens)
    d = G[0].M.shape[0]
    log: list[str] = []

    # stage 1
    sample = [_evaluate(w, G) for w in W.enumerate_ball(len(G), P.word_len)[1:]]
    ratios = np.array([kak(e.M, e.Minv).ratio for e in sample])
    norms = np.array([np.linalg.norm(e.M, 2) for e in sample])
    if ratios.max() < 1 + 1e-6:
        raise PipelineStuck(1, "all sampled words have alpha_1/alpha_2 = 1; the group looks bounded",
                            {"max_ratio": float(ratios.max()), "max_norm": float(norms.max())})
    base = sample[int(np.argmax(ratios))]
    log.append(f"stage 1: base word {base.word} with ratio {ratios.max():.4g}")

    # separating family (used in stages 3 and 5)
    cands = [_evaluate(w, G) for w in W.enumerate_ball(len(G), P.sep_word_len)[1:]]
    try:
        fam = separating_search([c.M for c in cands], P.n_sep, P.trial_configs, seed=P.seed)
    except SearchExhausted as e:
        raise PipelineStuck(3, f"no separating family: {e}", {}) from e
    F = [cands[i] for i in fam.indices]
    r = fam.r
    C = max(max(lipschitz_constant_bound(f.M, f.Minv), lipschitz_constant_bound(f.Minv, f.M)) for f in F)
    log.append(f"stage 3: family {[str(f.word) for f in F]} r={r:.4g} C={C:.4g}")

    def dist(x, n):
        return float(hyperplane_distance(x, n))

    k = 1
    attempt = None
    while k <= P.max_power:
        gamma = base**k
        ginv = gamma.inv()
        # stage 2
        dec_inv = kak(ginv.M, ginv.Minv)
        center = dec_inv.k2[0]
        rad = P.omega_radius
        for _ in range(40):
            if local_lipschitz(ginv.M, center, rad, 200, P.seed) <= 2:
                break
            rad /= 2
        else:
            raise PipelineStuck(2, "no 2-Lipschitz ball for gamma^-1", {"power": k})
        v = center
        # stage 3
        H = kak(gamma.M, gamma.Minv).repelling_normal
        p = act_point(ginv.M, v)
        scores = [min(dist(act_point(f.M, p), H), dist(act_point(f.Minv, p), H)) for f in F]
        f = F[int(np.argmax(scores))]
        # stage 4
        g0 = gamma * f * ginv
        g0i = g0.inv()
        dec0, dec0i = kak(g0.M, g0.Minv), kak(g0i.M, g0i.Minv)
        eps = max(contraction_radius(dec0.ratio), contraction_radius(dec0i.ratio))
        attempt = {"power": k, "omega_radius": rad, "f_score": max(scores), "eps": eps,
                   "C4_eps": C**4 * eps, "r": r}
        if max(scores) > r and C**4 * eps <= r / P.margin:
            break
        k *= 2
    else:
        raise PipelineStuck(4, "could not reach C^4 eps < r within the power cap", attempt or {})
    log.append(f"stage 2: Omega radius {rad:.3g} around gamma^-1's top singular direction")
    log.append(f"stage 4: gamma = ({base.word})^{k}, f = {f.word}, eps = {eps:.3g}")

    # stage 5
    v0p, H0p = dec0.attracting, dec0.repelling_normal
    v0m, H0m = dec0i.attracting, dec0i.repelling_normal
    s0 = [min(dist(act_point(c.M, v0p), H0p), dist(act_point(c.Minv, v0m), H0m)) for c in F]
    f0 = F[int(np.argmax(s0))]
    if max(s0) <= r:
        raise PipelineStuck(5, "no f0 in F satisfies the proximality conditions", {"best": max(s0), "r": r})
    g1 = f0 * g0
    v1p, H1p = act_point(f0.M, v0p), H0p
    v1m, H1m = v0m, act_hyperplane(f0.M, H0m, f0.Minv)
    s1 = [min(dist(act_point(c.M, x), h) for x in (v1p, v1m) for h in (H1p, H1m)) for c in F]
    f1 = F[int(np.argmax(s1))]
    if max(s1) <= r:
        raise PipelineStuck(5, "no f1 in F separates (v1+-, H1+-)", {"best": max(s1), "r": r})
    g2 = f1 * g1 * f1.inv()
    v2p, v2m = act_point(f1.M, v1p), act_point(f1.M, v1m)
    H2p, H2m = act_hyperplane(f1.M, H1p, f1.Minv), act_hyperplane(f1.M, H1m, f1.Minv)
    log.append(f"stage 5: f0 = {f0.word}, f1 = {f1.word}")

    # stage 6
    ineqs = [
        _ineq("d(f0 v0+, H0+) > r", dist(act_point(f0.M, v0p), H0p), r),
        _ineq("d(f0^-1 v0-, H0-) > r", dist(act_point(f0.Minv, v0m), H0m), r),
        _ineq("d(v0-, f0 H0-) > r/C", dist(v0m, H1m), r / C),
    ]
    for xn, x in (("v2+", v2p), ("v2-", v2m)):
        for hn, h in (("H1+", H1p), ("H1-", H1m)):
            ineqs.append(_ineq(f"d({xn}, {hn}) > r", dist(x, h), r))
    for xn, x in (("v1+", v1p), ("v1-", v1m)):
        for hn, h in (("H2+", H2p), ("H2-", H2m)):
            ineqs.append(_ineq(f"d({xn}, {hn}) > r/C", dist(x, h), r / C))
    ineqs.append(_ineq("r - C^4 eps > 0", r - C**4 * eps, 0.0))

    rho = C**2 * eps
    players = {
        "g1": (kak(g1.M, g1.Minv), v1p, H1p),
        "g1^-1": (kak(g1.Minv, g1.M), v1m, H1m),
        "g2": (kak(g2.M, g2.Minv), v2p, H2p),
        "g2^-1": (kak(g2.Minv, g2.M), v2m, H2m),
    }
    inverse_of = {"g1": "g1^-1", "g1^-1": "g1", "g2": "g2^-1", "g2^-1": "g2"}
    names = list(players)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            ineqs.append(_ineq(f"d(v[{a}], v[{b}]) > 2 rho", float(proj_metric(players[a][1], players[b][1])), 2 * rho))
    for a in names:
        for b in names:
            if b != inverse_of[a]:
                ineqs.append(_ineq(f"d(v[{b}], H[{a}]) > 2 rho", dist(players[b][1], players[a][2]), 2 * rho))

    worst_contraction, worst_table = 0.0, 0.0
    for a in names:
        dec, v_, H_ = players[a]
        pts = outside_hyperplane(H_, rho, P.nsamples, P.seed)
        worst_contraction = max(worst_contraction, float(np.max(proj_metric(_apply_factored(dec, pts), v_)) / rho))
        for b in names:
            if b == inverse_of[a]:
                continue
            q = ball_points(players[b][1], rho, P.nsamples // 4, P.seed)
            worst_table = max(worst_table, float(np.max(proj_metric(_apply_factored(dec, q), v_)) / rho))
    samples = {
        "rho": rho,
        "max_contraction_over_rho": worst_contraction,
        "max_table_over_rho": worst_table,
        "ok": worst_contraction <= 1 and worst_table <= 1,
        "separating_configs": fam.configs_tested,
    }
    pairs = {a: (players[a][1], players[a][2]) for a in names}
    construction = {"v0+": v0p, "H0+": H0p, "v0-": v0m, "H0-": H0m}
    cert = PingPongCert(g1, g2, pairs, construction, C, r, eps, rho, ineqs, samples,
                        [str(x.word) for x in F], log)
    if not all(i["ok"] for i in ineqs) or not samples["ok"]:
        bad = [i["name"] for i in ineqs if not i["ok"]]
        raise PipelineStuck(6, f"verification failed: {bad or 'sampled tables'}",
                            {"certificate": cert.to_dict()})
    log.append("stage 6: inequalities and sampled tables hold")

    # stage 7
    if P.exact_check_len and g1.exact is not None:
        res = exhaustive_nontriviality(g1.exact, g2.exact, P.exact_check_len)
        cert.exact_check = res.to_dict()
        if not res.passed:
            raise PipelineStuck(7, f"exact relation found: {res.witness}", {"certificate": cert.to_dict()})
        log.append(f"stage 7: no relation of length <= {P.exact_check_len} ({res.words_checked} words)")
    return cert
