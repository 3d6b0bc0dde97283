import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agt import words as W

letters = st.lists(st.tuples(st.integers(0, 2), st.sampled_from([-2, -1, 1, 2])), max_size=25)


def naive_reduce(raw):
    """Unit-letter stack reduction, independent of the run-length code."""
    out = []
    for g, e in raw:
        s = 1 if e > 0 else -1
        for _ in range(abs(e)):
            if out and out[-1] == (g, -s):
                out.pop()
            else:
                out.append((g, s))
    return out


def brute_ball(n):
    """All reduced unit-letter strings of length <= n over a, a^-1, b, b^-1."""
    alphabet = [(0, 1), (0, -1), (1, 1), (1, -1)]
    out = [()]
    for k in range(1, n + 1):
        for t in itertools.product(alphabet, repeat=k):
            if all(t[i] != (t[i + 1][0], -t[i + 1][1]) for i in range(k - 1)):
                out.append(t)
    return out


@given(letters)
def test_reduce_matches_unit_letter_stack(raw):
    assert list(W.reduce(raw).letters()) == naive_reduce(raw)


@given(letters)
def test_reduced_word_has_no_mergeable_runs(raw):
    w = W.reduce(raw)
    runs = list(w.runs())
    assert all(e != 0 for _, e in runs)
    assert all(runs[i][0] != runs[i + 1][0] for i in range(len(runs) - 1))
    assert len(w) == len(naive_reduce(raw))


@given(letters, letters, letters)
def test_group_axioms(x, y, z):
    u, v, w = W.reduce(x), W.reduce(y), W.reduce(z)
    assert W.multiply(W.multiply(u, v), w) == W.multiply(u, W.multiply(v, w))
    assert W.multiply(u, W.invert(u)) == W.IDENTITY
    assert W.invert(W.invert(u)) == u
    assert W.multiply(u, v) == W.reduce(list(u.letters()) + list(v.letters()))


def test_parse_and_print():
    w = W.Word.parse("a b^-1 a^2")
    assert str(w) == "a b^-1 a^2"
    assert len(w) == 4
    assert W.Word.parse("a a^-1") == W.IDENTITY
    assert str(W.IDENTITY) == "ε"
    with pytest.raises(ValueError):
        W.Word.parse("a? b")


@pytest.mark.parametrize("n", range(0, 7))
def test_ball_matches_brute_force(n):
    ball = W.enumerate_ball(2, n)
    brute = {tuple(W.reduce(t).letters()) for t in brute_ball(n)}
    assert len(ball) == len(brute) == len(set(ball))
    assert {tuple(w.letters()) for w in ball} == brute


@pytest.mark.parametrize("n", range(0, 13))
def test_ball_size_formula(n):
    assert W.ball_size(2, n) == 2 * 3**n - 1


def test_sphere_sizes():
    levels = W.ball_levels(2, 6)
    assert [len(x) for x in levels] == [1] + [4 * 3 ** (k - 1) for k in range(1, 7)]
    assert all(len(w) == k for k, lev in enumerate(levels) for w in lev)
    # rank 3: |S_k| = 6 * 5^(k-1)
    assert [len(x) for x in W.ball_levels(3, 3)] == [1, 6, 30, 150]


@given(letters.filter(lambda r: all(g < 2 for g, _ in r)))
def test_pieces_partition_by_first_letter(raw):
    w = W.reduce(raw)
    p = W.classify_piece(w)
    first = naive_reduce(raw)[:1]
    expected = {(): W.Piece.Identity, ((0, 1),): W.Piece.F_a, ((0, -1),): W.Piece.F_aInv,
                ((1, 1),): W.Piece.F_b, ((1, -1),): W.Piece.F_bInv}[tuple(first)]
    assert p is expected


def test_piece_translate_identity_small_oracle():
    # a^-1 F_a = F2 \ F_{a^-1}, checked with the brute-force ball as oracle
    a = W.generator(0)
    for t in brute_ball(6):
        w = W.reduce(t)
        lhs = W.classify_piece(W.multiply(a, w)) is W.Piece.F_a
        rhs = W.classify_piece(w) is not W.Piece.F_aInv
        assert lhs == rhs


def test_verify_paradox_small():
    rep = W.verify_paradox(5)
    assert rep.passed
    assert rep.ball_size == 2 * 3**5 - 1
    assert rep.piece_counts["Identity"] == 1
    assert len({v for k, v in rep.piece_counts.items() if k != "Identity"}) == 1
    assert rep.to_dict()["passed"] is True
