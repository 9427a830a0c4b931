from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morselab.cayley import GroupSpec, build_ball
from morselab.errors import MarginError
from morselab.localglobal import enumerate_qg_paths
from morselab.morse import (Linear, MiddleSpec, consequence_lemma_probe, morse_profile, mu_star,
                            punctured_distance, recurrence_estimate, t_middle, weak_morse_test)
from morselab.qgpaths import DiscretePath, QGParams, is_quasi_geodesic, path_from_letters, path_from_literal


@pytest.fixture(scope="module")
def f2():
    return build_ball(GroupSpec.free("a", "b"), 8)


@pytest.fixture(scope="module")
def z2():
    return build_ball(GroupSpec.abelian("a", "b"), 20)


def axis(ball, n):
    return path_from_literal(ball, " ".join(["a"] * n))


def test_tree_geodesic_excursions(f2):
    g = axis(f2, 4)
    assert weak_morse_test(f2, g, 3, 0, 0).holds
    assert mu_star(f2, g, 3, 0).value == 0
    r = mu_star(f2, g, 3, 2)
    assert r.value == 3 and r.exhaustive
    assert is_quasi_geodesic(r.witness, QGParams(3, 2))


def test_degenerate_pair_holds(z2):
    g = axis(z2, 3)
    for mu in (0, 1, 5):
        assert weak_morse_test(z2, g, 3, 0, mu, pair=(1, 1)).holds


def test_z2_witness_escapes(z2):
    g = axis(z2, 8)
    r = weak_morse_test(z2, g, 3, 0, 2, pair=(0, 8))
    assert r.holds is False and r.verdict == "fails"
    assert r.max_excursion >= 3
    assert is_quasi_geodesic(r.witness, QGParams(3, 0))
    assert (r.witness.start, r.witness.end) == (g.start, g.end)


def test_exact_excursion_reported(z2):
    g = axis(z2, 4)
    r = weak_morse_test(z2, g, 3, 0, 10, exact_excursion=True)
    assert r.holds and r.max_excursion == mu_star(z2, g, 3, 0).value == 4


def test_budget_exhaustion_is_unknown(z2):
    r = weak_morse_test(z2, axis(z2, 8), 3, 0, 100, node_budget=50)
    assert r.holds is None and not r.search_exhaustive
    assert r.verdict == "unknown-exhausted"


def test_region_must_fit(f2):
    small = build_ball(GroupSpec.abelian("a", "b"), 6)
    with pytest.raises(MarginError):
        weak_morse_test(small, axis(small, 4), 3, 0, 0)


def test_profile(f2, z2):
    prof = morse_profile(f2, axis(f2, 3), [(1, 0), (2, 0), (3, 0)])
    assert [prof[(Q, 0)] for Q in (1, 2, 3)] == [0, 0, 0]
    const = DiscretePath(z2, (z2.origin,))
    assert morse_profile(z2, const, [(1, 0), (3, 0)]).rows()[1]["mu_star"] == 0
    prof = morse_profile(z2, axis(z2, 3), [(1, 0), (2, 0), (3, 0)])
    vals = [prof[(Q, 0)] for Q in (1, 2, 3)]
    assert vals == sorted(vals) and prof.exhaustive
    assert prof.to_csv().splitlines()[0] == "Q,q,mu_star,exhaustive,nodes_expanded"
    assert morse_profile(z2, axis(z2, 3), []).rows() == []


def geodesics_on_path(ball, g, s, t):
    # brute force: every geodesic from g[s] to g[t] stays on g's vertex set
    src, dst = g[s], g[t]
    d = ball.distance(src, dst)
    on = set(g.vertices[s : t + 1])
    for verts in enumerate_qg_paths(ball, src, d, QGParams(1, 0), geodesic_only=True):
        if len(verts) == d + 1 and verts[-1] == dst and not set(verts) <= on:
            return False
    return True


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=4))
def test_geodesic_criterion(word):
    ball = build_ball(GroupSpec.abelian("a", "b"), 8)
    g = path_from_letters(ball, word)
    if not is_quasi_geodesic(g, QGParams(1, 0)):
        return
    n = g.length
    holds = weak_morse_test(ball, g, 1, 0, 0, pair=(0, n)).holds
    assert holds == geodesics_on_path(ball, g, 0, n)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.integers(0, 3))
def test_monotone_in_mu_and_Q(word, mu):
    ball = build_ball(GroupSpec.abelian("a", "b"), 12)
    g = path_from_letters(ball, word)
    r = weak_morse_test(ball, g, 2, 0, mu)
    if r.holds:
        assert weak_morse_test(ball, g, 2, 0, mu + 1).holds
    else:
        assert weak_morse_test(ball, g, 3, 0, mu).holds is False
        assert weak_morse_test(ball, g, 2, 1, mu).holds is False


def test_t_middle(z2):
    g = axis(z2, 10)
    assert t_middle(g, 0, 10, Fraction(1, 4)) == [3, 4, 5, 6, 7]
    assert t_middle(g, 4, 4, Fraction(1, 4)) == [4]
    stair = path_from_literal(z2, "a b a b a b")
    assert t_middle(stair, 0, 6, Fraction(1, 3)) == [2, 3, 4]


def test_middle_spec_validation():
    with pytest.raises(ValueError):
        MiddleSpec(Fraction(1, 2), 2)
    with pytest.raises(ValueError):
        MiddleSpec(Fraction(1, 4), Fraction(1, 2))


def test_recurrence_tree_is_zero(f2):
    g = axis(f2, 4)
    for t in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 3)):
        for c in (1, 2, 3):
            assert recurrence_estimate(f2, g, 0, 4, MiddleSpec(t, c)) == 0


def test_recurrence_z2(z2):
    g = axis(z2, 8)
    grid = {t: [recurrence_estimate(z2, g, 0, 8, MiddleSpec(t, c)) for c in (1, Fraction(3, 2), 2)]
            for t in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 3))}
    assert grid[Fraction(1, 4)] == [0, 2, 2]
    for row in grid.values():
        assert row == sorted(row)
    # larger t shrinks the middle, so avoiding paths get more room
    for k in range(3):
        col = [grid[t][k] for t in sorted(grid)]
        assert col == sorted(col)


def test_punctured_distance(z2):
    blocked = np.zeros(len(z2), dtype=bool)
    blocked[z2.vertex("a")] = True
    target = z2.vertex("a a")
    assert punctured_distance(z2, z2.origin, target, blocked) == 4
    assert punctured_distance(z2, z2.origin, target, blocked, limit=3) is None
    d, path = punctured_distance(z2, z2.origin, target, blocked, parents=True)
    assert len(path) == d + 1 and not blocked[path].any()


def test_consequence_probe(f2):
    big = build_ball(GroupSpec.abelian("a", "b"), 12)
    g = axis(big, 6)
    hit = consequence_lemma_probe(big, g, 1, 4, Linear(1), Linear(4), Linear(0, 2))
    assert hit.found and hit.path.length <= 16
    tree = consequence_lemma_probe(f2, axis(f2, 4), 1, 2, Linear(1), Linear(4), Linear(0))
    assert not tree.found
    empty = consequence_lemma_probe(big, g, 1, 4, Linear(1), Linear(4), Linear(0, 3))
    assert not empty.found and empty.degenerate_pairs > 0
