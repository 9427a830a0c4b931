from fractions import Fraction

import numpy as np
import pytest

from morselab import suites
from morselab.qgpaths import QGParams, is_quasi_geodesic


def test_instance_rng_is_counter_based():
    a = suites.instance_rng(7, 3).integers(0, 1 << 30, size=5)
    b = suites.instance_rng(7, 3).integers(0, 1 << 30, size=5)
    c = suites.instance_rng(7, 4).integers(0, 1 << 30, size=5)
    assert (a == b).all() and not (a == c).all()
    with pytest.raises(ValueError):
        suites.instance_rng(2**64, 0)


def test_random_qg_path_respects_constraints():
    z2, f2 = suites.suite_balls()
    rng = np.random.default_rng(0)
    params = QGParams(2, 1)
    for ball in (z2, f2):
        for length in (1, 3, 5):
            p = suites.random_qg_path(ball, rng, ball.origin, length, params)
            assert p is not None and p.length == length
            assert is_quasi_geodesic(p, params)
        target = ball.vertex("a a")
        p = suites.random_qg_path(ball, rng, ball.origin, 4, params, target=target)
        assert p is None or p.end == target


@pytest.mark.parametrize("fn", [suites.reverse_inclusion_suite, suites.concatenation_suite,
                                suites.exit_point_suite, suites.qg_stay_suite])
def test_small_suites_pass_and_ignore_threads(fn):
    one = fn(11, 12, threads=1)
    two = fn(11, 12, threads=3)
    assert one.ok, one.violations
    assert one.to_dict() == two.to_dict()
    assert one.instances == 12 and one.skipped < 12


def test_formula_table():
    rows = suites.formula_table()
    assert len(rows) == 20
    first = {(r["lambda"], r["kappa"]): r for r in rows}
    assert first[("3", "2")]["k2"] == "165"
    for r in rows:
        lam, kappa, mu = Fraction(r["lambda"]), Fraction(r["kappa"]), Fraction(r["mu"])
        assert Fraction(r["mu_prime"]) == (1 + 2 * lam**2) * mu + lam * kappa + kappa
