from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from morselab.cayley import GroupSpec, build_ball
from morselab.errors import PathError, PreconditionError
from morselab.qgpaths import (DiscretePath, QGParams, check_local_qg_near_qg, concat_lambda,
                              continuous_excess, empirical_global_params, hausdorff,
                              improvement_constants, is_quasi_geodesic, is_tame, local_qg_scale,
                              path_from_letters, path_from_literal, reverse_inclusion_bound)

L_PATH = "b b b a a a a a b^-1 b^-1 b^-1"


@pytest.fixture(scope="module")
def z2():
    return build_ball(GroupSpec.abelian("a", "b"), 8)


@pytest.fixture(scope="module")
def f2():
    return build_ball(GroupSpec.free("a", "b"), 6)


@pytest.fixture(scope="module")
def loop10():
    return build_ball(GroupSpec.wedge(10), 5)


def loop_path(ball, n):
    return path_from_literal(ball, " ".join(["o"] + [f"c0.{j}" for j in range(1, n)] + ["o"]))


def brute_qg(path, lam, kappa):
    # direct transcription of (j - i) / lam - kappa <= d(v_i, v_j)
    for i in range(len(path.vertices)):
        for j in range(i + 1, len(path.vertices)):
            if Fraction(j - i) / lam - kappa > path.ball.distance(path[i], path[j]):
                return (i, j)
    return None


def test_path_validation(z2):
    with pytest.raises(PathError):
        DiscretePath(z2, (z2.origin, z2.vertex("a a")))
    with pytest.raises(PathError):
        DiscretePath(z2, (z2.origin, z2.origin))
    assert DiscretePath(z2, (z2.origin, z2.origin), allow_stays=True).length == 1


def test_literal_round_trip(z2, loop10):
    p = path_from_literal(z2, L_PATH)
    assert p.literal() == L_PATH
    q = loop_path(loop10, 10)
    assert path_from_literal(loop10, q.literal()) == q


def test_geodesics_are_qg(z2):
    p = path_from_literal(z2, "a b a b a")
    assert is_quasi_geodesic(p, QGParams(1, 0))
    assert local_qg_scale(p, QGParams(1, 0)) == 5


def test_l_path(z2):
    p = path_from_literal(z2, L_PATH)
    got = is_quasi_geodesic(p, QGParams(1, 0))
    assert not got and got.pair == brute_qg(p, 1, 0) == (0, 9)
    assert is_quasi_geodesic(p, QGParams(Fraction(11, 5), 0))
    assert not is_quasi_geodesic(p, QGParams(Fraction(21, 10), 0))
    assert is_tame(p, improvement_constants(QGParams(2, 1)))
    # "b a a a a a b^-1" is the shortest non-geodesic subpath
    assert local_qg_scale(p, QGParams(1, 0)) == 6


def test_local_scale_on_cycle(loop10):
    assert local_qg_scale(loop_path(loop10, 10), QGParams(1, 0)) == 5


def test_loop_is_not_tame(loop10):
    loop = loop_path(loop10, 10)
    assert not is_tame(loop, improvement_constants(QGParams(1, 0)))


def test_improvement_constants():
    table = {(1, 0): (2, 1, 5), (2, 1): (6, 6, 45), (3, 2): (10, 15, 165)}
    for (lam, kappa), want in table.items():
        c = improvement_constants(QGParams(lam, kappa))
        assert (c.kappa_prime, c.k1, c.k2) == want


def test_reverse_inclusion_bound():
    assert reverse_inclusion_bound(QGParams(1, 0), 0) == 0
    assert reverse_inclusion_bound(QGParams(1, 0), 2) == 6
    assert reverse_inclusion_bound(QGParams(2, 1), 3) == 30


def test_concat_lambda():
    assert concat_lambda(QGParams(1, 0), 0) == 3
    assert concat_lambda(QGParams(2, 0), Fraction(1, 4)) == 6
    assert concat_lambda(QGParams(1, 0), Fraction(49, 100)) == 100
    with pytest.raises(ValueError):
        concat_lambda(QGParams(1, 0), Fraction(1, 2))


def test_params_validation():
    with pytest.raises(ValueError):
        QGParams(Fraction(1, 2), 0)
    with pytest.raises(ValueError):
        QGParams(1, -1)
    assert QGParams("3/2", 1).scaled() == (2, 3, 3)


def test_hausdorff_examples(z2, f2):
    a = path_from_literal(z2, "a a a a a")
    b = path_from_literal(z2, "a a a a a", "b b")
    assert hausdorff(a, a).symmetric == 0
    assert hausdorff(a, b).symmetric == 2
    g1 = path_from_literal(f2, "a a a")
    g2 = path_from_literal(f2, "a a b")
    h = hausdorff(g1, g2)
    assert (h.one_sided_ab, h.one_sided_ba, h.symmetric) == (1, 1, 1)


def test_continuous_excess_counts_edge_midpoints(z2):
    # parallel unit edges: the vertices are 1 apart but the midpoints 3/2
    a = path_from_literal(z2, "a")
    b = path_from_literal(z2, "a", "b")
    assert hausdorff(a, b).symmetric == 1
    assert continuous_excess(a, b) == Fraction(3, 2)
    # edges shared with the target contribute nothing beyond their vertices
    c = path_from_literal(z2, "a b")
    assert continuous_excess(a, c) == 0


def test_global_fits(z2, loop10):
    assert empirical_global_params(path_from_literal(z2, "a a b")).params == QGParams(1, 0)
    fit = empirical_global_params(path_from_literal(z2, L_PATH))
    assert fit.params == QGParams(Fraction(11, 5), 0)
    # a closed path needs kappa with 10 <= lam * kappa
    assert empirical_global_params(loop_path(loop10, 10)).params == QGParams(Fraction(10, 3), 3)
    loop = empirical_global_params(loop_path(loop10, 10), kappa_max=2)
    assert not loop.fits and loop.required_kappa == 3


def test_local_near_qg(f2, loop10):
    g = path_from_literal(f2, "a b a b")
    assert check_local_qg_near_qg(g, g, 0, QGParams(1, 0), 2).fit.params == QGParams(1, 0)
    hug = path_from_literal(f2, "a b b b^-1 a b")
    rep = check_local_qg_near_qg(hug, g, 1, QGParams(1, 2), 4)
    assert rep.globally_qg
    loop = loop_path(loop10, 10)
    const = DiscretePath(loop10, (loop10.origin,))
    assert not check_local_qg_near_qg(loop, const, 5, QGParams(1, 0), 5, kappa_max=2).globally_qg
    with pytest.raises(PreconditionError):
        check_local_qg_near_qg(loop, const, 4, QGParams(1, 0), 5)


letters = st.lists(st.integers(0, 3), min_size=0, max_size=6)
params = st.tuples(st.fractions(1, 3, max_denominator=4), st.fractions(0, 3, max_denominator=4))


@settings(max_examples=80, deadline=None)
@given(letters, params)
def test_qg_check_matches_brute_force(f2, word, lk):
    p = path_from_letters(f2, word)
    lam, kappa = lk
    got = is_quasi_geodesic(p, QGParams(lam, kappa))
    assert got.pair == brute_qg(p, lam, kappa)


@settings(max_examples=60, deadline=None)
@given(letters, params, st.fractions(0, 2, max_denominator=3), st.fractions(0, 2, max_denominator=3))
def test_qg_monotone_and_scale(f2, word, lk, dl, dk):
    p = path_from_letters(f2, word)
    tight, loose = QGParams(*lk), QGParams(lk[0] + dl, lk[1] + dk)
    if is_quasi_geodesic(p, tight):
        assert is_quasi_geodesic(p, loose)
    assert local_qg_scale(p, tight) <= local_qg_scale(p, loose)
    assert (local_qg_scale(p, tight) == p.length) == bool(is_quasi_geodesic(p, tight))


@settings(max_examples=40, deadline=None)
@given(letters, letters, letters)
def test_hausdorff_pseudometric(f2, w1, w2, w3):
    a, b, c = (path_from_letters(f2, w) for w in (w1, w2, w3))
    ab, bc, ac = hausdorff(a, b), hausdorff(b, c), hausdorff(a, c)
    assert ab.symmetric == max(ab.one_sided_ab, ab.one_sided_ba)
    assert ab.symmetric == hausdorff(b, a).symmetric
    assert ac.symmetric <= ab.symmetric + bc.symmetric
