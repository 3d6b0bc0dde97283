import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agt import projdyn as pd
from agt import words as W
from agt.errors import CertFailure, NormsTooLarge, NotDiverging, PipelineStuck, SearchExhausted
from agt.projdyn.linalg import normalize, random_sl, random_special_orthogonal, rotation2
from agt.projdyn.sampling import sphere_points

A2 = np.array([[1.0, 2.0], [0.0, 1.0]])
B2 = np.array([[1.0, 0.0], [2.0, 1.0]])
seeds = st.integers(0, 2**32 - 1)


def svals(m):
    return np.linalg.svd(m, compute_uv=False)


def wedge_oracle(g, ell):
    """Exterior power by determinants of minors, looped in pure Python."""
    d = g.shape[0]
    idx = list(itertools.combinations(range(d), ell))
    return np.array([[np.linalg.det(g[np.ix_(I, J)]) for J in idx] for I in idx])


# -- KAK and the projective metric ------------------------------------------

def test_kak_examples():
    dec = pd.kak(np.diag([4.0, 1.0, 0.25]))
    assert np.allclose(dec.alphas, [4, 1, 0.25])
    assert np.allclose(np.abs(dec.k1), np.eye(3)) and np.allclose(np.abs(dec.k2), np.eye(3))
    assert np.allclose(pd.kak(rotation2(0.7)).alphas, 1)


@settings(max_examples=100)
@given(st.integers(2, 8), seeds, st.floats(0.1, 2.0))
def test_kak_reconstruction(d, seed, spread):
    g = random_sl(d, np.random.default_rng(seed), spread)
    dec = pd.kak(g)
    assert np.linalg.norm(dec.reconstruct() - g, 2) <= 1e-9 * np.linalg.norm(g, 2)
    assert np.all(np.diff(dec.alphas) <= 0)
    assert abs(np.prod(dec.alphas) - 1) < 1e-9
    for k in (dec.k1, dec.k2):
        assert np.allclose(k.T @ k, np.eye(d), atol=1e-10) and np.linalg.det(k) > 0


def test_kak_rejects_negative_det():
    with pytest.raises(Exception):
        pd.kak(np.diag([-1.0, 1.0]))


def test_proj_metric_examples():
    e1, e2 = np.eye(2)
    assert pd.proj_metric(e1, e2) == pytest.approx(1)
    assert pd.proj_metric(e1, e1) == 0
    assert pd.proj_metric(e1, -3 * e1) == 0
    assert pd.proj_metric(e1, (e1 + e2) / math.sqrt(2)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_proj_metric_triangle_and_k_invariance():
    rng = np.random.default_rng(5)
    for d in (2, 3, 5):
        X, Y, Z = (rng.standard_normal((10**4, d)) for _ in range(3))
        dxy, dyz, dxz = pd.proj_metric(X, Y), pd.proj_metric(Y, Z), pd.proj_metric(X, Z)
        assert np.all(dxz <= dxy + dyz + 1e-12)
        assert np.allclose(dxy, pd.proj_metric(Y, X), atol=0)
        # |sin angle| between the lines
        cos = np.abs(np.sum(normalize(X) * normalize(Y), axis=1))
        assert np.allclose(dxy, np.sqrt(np.clip(1 - cos**2, 0, 1)), atol=1e-7)
        k = random_special_orthogonal(d, rng)
        assert np.allclose(pd.proj_metric(X @ k.T, Y @ k.T), dxy, atol=1e-12)


def test_hyperplane_distance_is_nearest_point():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d = int(rng.integers(2, 5))
        x, n = rng.standard_normal(d), normalize(rng.standard_normal(d))
        # nearest point of H is the orthogonal projection; check it beats samples of H
        proj = x - np.dot(x, n) * n
        best = pd.proj_metric(x, proj)
        H = rng.standard_normal((4000, d))
        H -= np.outer(H @ n, n)
        assert best <= pd.proj_metric(x[None, :], H).min() + 1e-9
        assert abs(pd.hyperplane_distance(x, n) - best) < 1e-9


# -- exterior powers --------------------------------------------------------

def test_exterior_examples():
    g = np.diag([3.0, 2.0, 1 / 6])
    assert np.array_equal(pd.exterior_power(g, 1), g)
    assert np.allclose(svals(pd.exterior_power(g, 2)), [6, 0.5, 1 / 3])
    with pytest.raises(ValueError):
        pd.exterior_power(g, 3)


@settings(max_examples=60)
@given(st.integers(2, 6), seeds)
def test_exterior_power_properties(d, seed):
    rng = np.random.default_rng(seed)
    g, h = random_sl(d, rng), random_sl(d, rng)
    a = svals(g)
    for ell in range(1, d):
        E = pd.exterior_power(g, ell)
        assert np.allclose(E, wedge_oracle(g, ell), rtol=1e-9, atol=1e-12)
        top = svals(E)[0]
        assert abs(top - np.prod(a[:ell])) <= 1e-9 * top
        gh = pd.exterior_power(g @ h, ell)
        prod = E @ pd.exterior_power(h, ell)
        assert np.linalg.norm(gh - prod) <= 1e-9 * np.linalg.norm(gh)


# -- contraction ------------------------------------------------------------

def test_pick_contracting_level():
    seq = [np.diag([2.0**m, 1.0, 2.0**-m]) for m in range(1, 6)]
    assert pd.pick_contracting_level(seq) == 1
    seq = [np.diag([2.0**m, 2.0**m, 2.0 ** (-2 * m)]) for m in range(1, 6)]
    assert pd.pick_contracting_level(seq) == 2
    with pytest.raises(NotDiverging):
        pd.pick_contracting_level([np.diag([2.0, 1.0, 0.5])] * 4)


def test_contraction_check_examples():
    g = np.diag([100.0, 0.1, 0.1])
    cert = pd.contraction_check(g, 0.2)
    assert cert.valid and cert.max_image_distance <= 0.2
    assert abs(abs(cert.v[0]) - 1) < 1e-12 and abs(abs(cert.H[0]) - 1) < 1e-12
    with pytest.raises(CertFailure) as e:
        pd.contraction_check(np.array([[math.cos(1), -math.sin(1), 0], [math.sin(1), math.cos(1), 0], [0, 0, 1]]), 0.1)
    assert e.value.witness is not None


@pytest.mark.parametrize("seed", range(5))
def test_contraction_is_k_equivariant(seed):
    rng = np.random.default_rng(seed)
    k, kk = random_special_orthogonal(3, rng), random_special_orthogonal(3, rng)
    g = k @ np.diag([100.0, 0.1, 0.1]) @ kk
    cert = pd.contraction_check(g, 0.2)
    assert pd.proj_metric(cert.v, k[:, 0]) < 1e-9
    assert pd.proj_metric(cert.H, kk[0]) < 1e-9


def test_contraction_radius_and_threshold():
    for eps in (0.05, 0.2, 0.5):
        assert pd.contraction_radius(pd.contraction_ratio_threshold(eps)) == pytest.approx(eps, rel=1e-9)
    # the analytic radius is enough on samples
    for ratio in (30.0, 300.0, 3000.0):
        eps = pd.contraction_radius(ratio) * 1.001
        g = np.diag([math.sqrt(ratio), 1 / math.sqrt(ratio)])
        assert pd.contraction_check(g, eps).valid


def test_lipschitz_ratio_bound_examples():
    assert pd.lipschitz_ratio_bound(1 / math.sqrt(2)) == pytest.approx(1, abs=1e-15)
    assert pd.lipschitz_ratio_bound(1e-6) == pytest.approx(1e6, rel=1e-6)
    for bad in (0, 1, -0.5):
        with pytest.raises(ValueError):
            pd.lipschitz_ratio_bound(bad)


def test_local_lipschitz_examples():
    assert abs(pd.local_lipschitz(np.eye(3), np.array([1.0, 0, 0]), 0.05) - 1) < 1e-9
    est = pd.local_lipschitz(np.diag([10.0, 0.1]), np.array([1.0, 0]), 0.05)
    assert est <= 0.01 + 0.005
    far = pd.local_lipschitz(np.diag([10.0, 0.1]), np.array([0.0, 1.0]), 0.05)
    assert far > 1


@pytest.mark.parametrize("seed", range(8))
def test_lipschitz_ratio_consistency(seed):
    rng = np.random.default_rng(seed)
    g = random_sl(3, rng, spread=1.5)
    dec = pd.kak(g)
    # the derivative of g at k2^-1 e1 has norm alpha_2/alpha_1
    delta = pd.local_lipschitz(g, dec.k2[0], 0.01, nsamples=300)
    if delta < 1:
        assert dec.ratio >= pd.lipschitz_ratio_bound(delta) * (1 - 0.05)


def test_lipschitz_constant_bound_dominates_samples():
    rng = np.random.default_rng(3)
    for _ in range(5):
        g = random_sl(3, rng)
        L = pd.lipschitz_constant_bound(g)
        P = sphere_points(3, 500, seed=int(rng.integers(1 << 30)))
        Q = np.roll(P, 1, axis=0)
        dxy = pd.proj_metric(P, Q)
        ok = dxy > 1e-9
        ratios = pd.proj_metric(P[ok] @ g.T, Q[ok] @ g.T) / dxy[ok]
        assert ratios.max() <= L * (1 + 1e-9)


# -- separation -------------------------------------------------------------

def _words_up_to(n, gens):
    out = []
    for w in W.enumerate_ball(2, n)[1:]:
        m = np.eye(2)
        for g, s in w.letters():
            m = m @ (gens[g] if s > 0 else np.linalg.inv(gens[g]))
        out.append(m)
    return out


def test_separating_search_free_pair():
    fam = pd.separating_search(_words_up_to(4, (A2, B2)), n=2)
    assert fam.members and fam.r >= 1e-2
    assert fam.to_dict()["r"] == fam.r
    # the reported r is the family score on the stored worst configuration
    V, N = fam.worst_config
    score = max(
        min(min(pd.hyperplane_distance(normalize(f @ v), h), pd.hyperplane_distance(normalize(np.linalg.inv(f) @ v), h))
            for v in V for h in N)
        for f in fam.members
    )
    assert score == pytest.approx(fam.r, abs=1e-12)


def test_separating_search_identity_fails():
    with pytest.raises(SearchExhausted):
        pd.separating_search([np.eye(3)], n=1)


def test_separating_search_rotation():
    # one rotation alone fails on v = f^-1 H; a sample of SO(2) does not
    with pytest.raises(SearchExhausted):
        pd.separating_search([rotation2(1.0)], n=1)
    fam = pd.separating_search([rotation2(0.7 * k) for k in range(1, 9)], n=1)
    assert len(fam.members) >= 1 and fam.r > 1e-3


# -- the pipeline -----------------------------------------------------------

@pytest.fixture(scope="module")
def integral_cert():
    return pd.construct_free_pair([A2, B2])


def test_construct_integral_pair(integral_cert):
    cert = integral_cert
    assert cert.valid
    assert cert.C**4 * cert.eps < cert.r
    assert cert.exact_check is not None and cert.exact_check["passed"]
    assert cert.gamma1.exact is not None and cert.gamma2.exact is not None
    d = cert.to_dict()
    assert d["C4_eps"] < d["r"] and d["valid"]


def test_integral_players_are_free_by_exact_oracle(integral_cert):
    from agt import pingpong as pp

    g1, g2 = integral_cert.gamma1.exact, integral_cert.gamma2.exact
    assert pp.exhaustive_nontriviality(g1, g2, 6).passed


def test_players_in_group_generated(integral_cert):
    # the recorded word evaluates to the recorded matrix
    for e in (integral_cert.gamma1, integral_cert.gamma2):
        m = np.eye(2)
        for g, s in e.word.letters():
            x = (A2, B2)[g]
            m = m @ (x if s > 0 else np.linalg.inv(x))
        assert np.allclose(m, e.M, rtol=1e-12)


def test_neighbourhoods_disjoint(integral_cert):
    pts = [v for v, _ in integral_cert.pairs.values()]
    for v, w in itertools.combinations(pts, 2):
        assert pd.proj_metric(v, w) > 2 * integral_cert.eps


def test_rotations_stuck_at_stage_one():
    with pytest.raises(PipelineStuck) as e:
        pd.construct_free_pair([rotation2(1.0), rotation2(0.3)])
    assert e.value.stage == 1


def test_diag_and_rotation_fixture():
    cert = pd.construct_free_pair([np.diag([2.0, 0.5]), rotation2(1.0)])
    assert cert.valid and cert.exact_check is None
    assert cert.C**4 * cert.eps < cert.r


# -- commutators ------------------------------------------------------------

def test_commutator_identity():
    rep = pd.commutator_defect(np.eye(3), np.eye(3))
    assert rep.defect == 0 and rep.ok


def test_commutator_random_bound():
    rng = np.random.default_rng(0)
    for cplx in (False, True):
        for _ in range(200):
            x = pd.random_perturbation(3, 0.01, rng, complex_=cplx)
            y = pd.random_perturbation(3, 0.02, rng, complex_=cplx)
            rep = pd.commutator_defect(x, y)
            assert rep.eps == pytest.approx(0.01) and rep.delta == pytest.approx(0.02)
            assert rep.defect <= rep.sharp_bound * (1 + 1e-9) <= rep.bound * (1 + 1e-9)
            assert rep.ok


def test_commutator_large_norms():
    with pytest.raises(NormsTooLarge):
        pd.commutator_defect(np.diag([4.0, 0.25]), np.eye(2))


def test_iterated_commutators():
    rng = np.random.default_rng(1)
    r = 2.0
    x = pd.random_perturbation(3, 0.9 / (8 * r), rng)
    y = pd.random_perturbation(3, 0.9 / (8 * r), rng)
    rep = pd.iterated_commutators(x, y, r, n=5)
    assert rep.ok
    assert all(nm < r ** -(k + 1) for k, nm in enumerate(rep.norms[1:]))
    with pytest.raises(ValueError):
        pd.iterated_commutators(x, y, 1.0)
    with pytest.raises(NormsTooLarge):
        pd.iterated_commutators(pd.random_perturbation(3, 0.5, rng), y, r)
