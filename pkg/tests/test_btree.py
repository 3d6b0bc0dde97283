import random
from collections import deque
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agt import btree as bt
from agt.errors import DeterminantNotOne, NotPrime, SingularBasis


def bfs_distances(ball):
    base = ball.base
    dist = {base: 0}
    q = deque([base])
    while q:
        u = q.popleft()
        for v in ball.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


@st.composite
def local_units(draw, p):
    """Integer matrices with determinant prime to p (elements of GL2(Z_(p)))."""
    a, b, c = (draw(st.integers(-20, 20)) for _ in range(3))
    u = draw(st.integers(1, 40).filter(lambda t: t % p))
    # det = u * (1 + p*a) stays prime to p
    return mm(((u * (1 + p * a), b), (0, 1)), ((1, 0), (c, 1)))


def mm(x, y):
    return tuple(tuple(sum(Fraction(x[i][k]) * Fraction(y[k][j]) for k in range(2)) for j in range(2))
                 for i in range(2))


@pytest.mark.parametrize("p,R", [(2, 1), (2, 4), (3, 4), (5, 3), (7, 2)])
def test_ball_is_tree(p, R):
    ball = bt.build_ball(bt.base_class(p), R)
    rep = bt.verify_tree(ball)
    assert rep.passed
    assert rep.vertices == bt.expected_ball_size(p, R) == 1 + (p + 1) * (p**R - 1) // (p - 1)
    assert rep.edges == rep.vertices - 1
    for v in ball.vertices:
        if ball.depth[v] < R:
            assert len(ball.adjacency[v]) == p + 1


@pytest.mark.parametrize("p", [2, 3])
def test_distance_matches_bfs(p):
    ball = bt.build_ball(bt.base_class(p), 4)
    d = bfs_distances(ball)
    rng = random.Random(p)
    verts = ball.vertices
    for x in verts:
        assert bt.class_distance(ball.base, x) == d[x]
    # tree metric between arbitrary pairs: path through the meeting point
    for _ in range(200):
        x, y = rng.choice(verts), rng.choice(verts)
        assert bt.class_distance(x, y) == bt.class_distance(y, x)
        assert bt.class_distance(x, y) <= d[x] + d[y]
        assert (bt.class_distance(x, y) - d[x] - d[y]) % 2 == 0


@pytest.mark.parametrize("p", [2, 3, 5])
def test_neighbors(p):
    x = bt.LatticeClass(p, 1, 0, 0)
    nb = bt.neighbors(x)
    assert len(set(nb)) == p + 1
    assert all(bt.class_distance(x, y) == 1 for y in nb)
    assert all(x in bt.neighbors(y) for y in nb)


@settings(max_examples=60)
@given(st.data(), st.sampled_from([2, 3, 5]))
def test_canonical_form_invariance(data, p):
    ball = bt.build_ball(bt.base_class(p), 3)
    x = data.draw(st.sampled_from(ball.vertices))
    U = data.draw(local_units(p))
    k = data.draw(st.integers(-3, 3))
    B = x.basis()
    assert bt.canonicalize(mm(B, U), p) == x
    scaled = tuple(tuple(z * Fraction(p) ** k for z in row) for row in B)
    assert bt.canonicalize(scaled, p) == x
    assert 0 <= x.c < p**x.a or x.a == 0 and x.c == 0


def test_errors():
    with pytest.raises(NotPrime):
        bt.base_class(6)
    with pytest.raises(SingularBasis):
        bt.canonicalize(((1, 2), (2, 4)), 3)
    with pytest.raises(DeterminantNotOne):
        bt.act(((2, 0), (0, 1)), bt.base_class(3))


@pytest.mark.parametrize("p", [2, 3])
def test_action_is_isometry_and_homomorphism(p):
    rng = random.Random(10 + p)
    ball = bt.build_ball(bt.base_class(p), 2)
    for _ in range(60):
        g, h = bt.random_element(p, rng), bt.random_element(p, rng)
        x, y = rng.choice(ball.vertices), rng.choice(ball.vertices)
        assert bt.act(mm(g, h), x) == bt.act(g, bt.act(h, x))
        assert bt.class_distance(bt.act(g, x), bt.act(g, y)) == bt.class_distance(x, y)


@pytest.mark.parametrize("p", [2, 3])
def test_stabilizer_is_p_integral(p):
    rng = random.Random(p)
    seen = {True: 0, False: 0}
    for i in range(250):
        g = bt.random_element(p, rng, integral=(i % 3 == 0))
        s = bt.in_stabilizer(g, p)
        assert s == bt.is_p_integral(g, p)
        seen[s] += 1
    assert seen[True] and seen[False]


@pytest.mark.parametrize("p", [2, 3])
def test_parity_invariance(p):
    rng = random.Random(100 + p)
    ball = bt.build_ball(bt.base_class(p), 3)
    for _ in range(100):
        g = bt.random_element(p, rng)
        x = rng.choice(ball.vertices)
        assert bt.orbit_parity(bt.act(g, x)) == bt.orbit_parity(x)


@pytest.mark.parametrize("p", [2, 3])
def test_transitivity_on_even_vertices(p):
    ball = bt.build_ball(bt.base_class(p), 4)
    for x in ball.vertices:
        if bt.orbit_parity(x) == 0:
            g = bt.transitivity_witness(x)
            assert bt.act(g, bt.base_class(p)) == x
        else:
            with pytest.raises(ValueError):
                bt.transitivity_witness(x)


def test_dot_export():
    ball = bt.build_ball(bt.base_class(2), 2)
    dot = ball.to_dot()
    assert dot.count("label=") == 10
    assert dot.count("--") == 9
