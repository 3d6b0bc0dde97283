import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agt import cayley as cy
from agt.errors import MemoryBudgetExceeded, SizeLimit
from agt.graph import FiniteGraph, cheeger_bruteforce, complete_graph, cycle_graph


def naive_cheeger(adj):
    """min |dA|/|A| over nonempty A with |A| <= n/2, by itertools."""
    n = len(adj)
    best = None
    for k in range(1, n // 2 + 1):
        for A in itertools.combinations(range(n), k):
            S = set(A)
            bd = {v for u in A for v in adj[u]} - S
            q = Fraction(len(bd), k)
            if best is None or q < best:
                best = q
    return best


@st.composite
def random_graphs(draw):
    n = draw(st.integers(2, 11))
    edges = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=30))
    adj = [[] for _ in range(n)]
    for u, v in edges:
        if u != v and v not in adj[u]:
            adj[u].append(v)
            adj[v].append(u)
    return adj


# -- finite graphs ----------------------------------------------------------

def test_cheeger_examples():
    assert cheeger_bruteforce(complete_graph(4)).value == 1
    c8 = cheeger_bruteforce(cycle_graph(8))
    assert c8.value == Fraction(1, 2) and len(c8.witness) == 4
    assert cheeger_bruteforce(complete_graph(2)).value == 1


@settings(max_examples=60)
@given(random_graphs())
def test_cheeger_matches_itertools(adj):
    g = FiniteGraph(adj)
    res = cheeger_bruteforce(g)
    assert res.value == naive_cheeger(adj)
    # the witness realizes the value
    assert Fraction(len(g.vertex_boundary(res.witness)), len(res.witness)) == res.value
    assert 1 <= len(res.witness) <= g.n // 2


@pytest.mark.parametrize("m", range(3, 25))
def test_cycle_expansion_closed_form(m):
    # an arc of floor(m/2) vertices has two boundary vertices
    assert cheeger_bruteforce(cycle_graph(m)).value == Fraction(2, m // 2)


def test_size_limit():
    with pytest.raises(SizeLimit):
        cheeger_bruteforce(cycle_graph(25))


def test_graph_basics():
    c = cycle_graph(6)
    assert c.degree == 2 and c.num_edges() == 6 and c.is_connected()
    assert c.vertex_boundary([0, 1]) == {5, 2}
    two = FiniteGraph([[1], [0], [3], [2]])
    assert len(two.components()) == 2
    assert "graph" in c.to_dot()


# -- oracles and balls ------------------------------------------------------

ORACLES = ["z", "z2", "free2", "sl2z", "sl2z-mod:5", "trivial"]


@pytest.mark.parametrize("name", ORACLES)
def test_oracle_axioms(name):
    o = cy.make_oracle(name)
    B = cy.ball(o, None, 3).elements()
    sample = B[:: max(1, len(B) // 12)]
    for x, y, z in itertools.product(sample[:8], repeat=3):
        assert o.key(o.multiply(o.multiply(x, y), z)) == o.key(o.multiply(x, o.multiply(y, z)))
    for x in sample:
        assert o.key(o.multiply(x, o.invert(x))) == o.key(o.identity)
        assert o.key(o.multiply(o.identity, x)) == o.key(x)


def test_symmetrize():
    o = cy.z_oracle()
    assert sorted(o.symmetrize([1])) == [-1, 0, 1]


def test_ball_examples():
    assert cy.ball(cy.z_oracle(), [1], 3).counts == [1, 3, 5, 7]
    assert cy.ball(cy.trivial_oracle(), None, 5).counts == [1] * 6
    assert cy.ball(cy.free2_oracle(), None, 3).counts == [1, 5, 17, 53]


def test_free2_counts_closed_form():
    counts = cy.ball(cy.free2_oracle(), None, 8).counts
    assert counts == [2 * 3**n - 1 for n in range(9)]


def test_z2_lattice_counts():
    counts = cy.ball(cy.z2_oracle(), None, 10).counts
    # lattice points with |x| + |y| <= n
    assert counts == [2 * n * n + 2 * n + 1 for n in range(11)]
    est = cy.growth_rate_estimate(counts)
    assert np.allclose(est.poly_fit, [2, 2, 1])
    assert abs(est.poly_exponent - 2) < 0.3


def test_sl2z_mod_saturates():
    counts = cy.ball(cy.sl2z_mod_oracle(3), None, 12).counts
    assert counts[-1] == 24
    assert counts == sorted(counts)


def test_memory_budget():
    with pytest.raises(MemoryBudgetExceeded):
        cy.ball(cy.free2_oracle(), None, 10, budget=1000)


def test_growth_estimates():
    z = cy.growth_rate_estimate([2 * n + 1 for n in range(200)])
    assert abs(z.estimate - 399 ** (1 / 199)) < 1e-12 and z.estimate < 1.031
    f2 = cy.growth_rate_estimate([2 * 3**n - 1 for n in range(13)])
    assert f2.running_inf == sorted(f2.running_inf, reverse=True)
    assert all(abs(r - (2 * 3**n - 1) ** (1 / n)) < 1e-12 for n, r in enumerate(f2.rates, start=1))
    assert f2.submultiplicative
    with pytest.raises(ValueError):
        cy.growth_rate_estimate([1, 3])


@settings(max_examples=30)
@given(st.sampled_from(["z", "z2", "free2", "sl2z-mod:4"]), st.integers(2, 5))
def test_submultiplicative(name, n):
    counts = cy.ball(cy.make_oracle(name), None, n).counts
    for a in range(n + 1):
        for b in range(n + 1 - a):
            assert counts[a + b] <= counts[a] * counts[b]


# -- boundaries and Folner sets ---------------------------------------------

@pytest.mark.parametrize("n", [0, 1, 5, 20])
def test_z_interval_boundary(n):
    o = cy.z_oracle()
    assert sorted(cy.boundary(o, cy.z_interval(n), [1])) == [-n - 1, n + 1]
    ok, q = cy.folner_check(o, cy.z_interval(n), [1], Fraction(1))
    assert q == Fraction(2, 2 * n + 1)


def test_folner_examples():
    o = cy.z_oracle()
    assert cy.folner_check(o, cy.z_interval(10), [1, -1], Fraction(1, 10)) == (True, Fraction(2, 21))
    assert cy.cheeger_quotient(cy.trivial_oracle(), [0], [0]) == 0
    res = cy.folner_ball_search(o, [1], Fraction(1, 100), 200)
    assert res.found and res.radius == 100
    res = cy.folner_ball_search(cy.free2_oracle(), None, Fraction(1), 8)
    assert not res.found
    res = cy.folner_ball_search(cy.z2_oracle(), None, Fraction(1, 2), 20)
    assert res.found


@pytest.mark.parametrize("n", range(0, 6))
def test_free2_ball_boundary_is_next_sphere(n):
    o = cy.free2_oracle()
    B = cy.ball(o, None, n + 1)
    bd = cy.boundary(o, B.elements(n))
    assert len(bd) == 4 * 3**n
    assert {o.key(x) for x in bd} == {o.key(x) for x in B.spheres[n + 1]}
    assert cy.cheeger_quotient(o, B.elements(n)) == Fraction(4 * 3**n, 2 * 3**n - 1)


def test_boundary_of_finite_group_is_empty():
    o = cy.sl2z_mod_oracle(3)
    G = cy.ball(o, None, 20).elements()
    assert cy.boundary(o, G) == []


@settings(max_examples=40)
@given(st.sets(st.integers(-15, 15), min_size=1))
def test_boundary_disjoint_and_cheeger_min(A):
    o = cy.z_oracle()
    bd = cy.boundary(o, A, [1])
    assert not set(bd) & A
    assert cy.cheeger_quotient(o, A, [1]) >= Fraction(2, len(A)) or len(A) == 0


def test_ball_graph_matches_ball():
    g = cy.ball_graph(cy.free2_oracle(), None, 2)
    assert g.n == 17 and g.is_connected()
    assert g.num_edges() == 16  # a tree
