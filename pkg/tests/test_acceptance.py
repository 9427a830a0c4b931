"""Acceptance criteria, one test each.

Every test prints a single ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line; the lines are also collected and replayed at the end of the session.
"""
import time
from fractions import Fraction

from morselab import suites
from morselab.cayley import GroupSpec, build_ball
from morselab.cli import main
from morselab.combing import boundedness_estimate, shortlex_combing
from morselab.localglobal import (build_catalog, certify_path, combing_line_proximity,
                                  weak_mltg_check)
from morselab.morse import MiddleSpec, mu_star, recurrence_estimate
from morselab.qgpaths import QGParams, path_from_literal

# (lambda, kappa, mu, theta, kappa', k1, k2, mu', lambda'), worked out by hand
FORMULA_TABLE = [
    ("1", "0", "0", "0", "2", "1", "5", "0", "3"),
    ("1", "0", "2", "1/4", "2", "1", "5", "6", "4"),
    ("2", "1", "3", "1/4", "6", "6", "45", "30", "6"),
    ("3", "2", "1", "1/3", "10", "15", "165", "27", "12"),
    ("2", "0", "1", "1/4", "4", "4", "22", "9", "6"),
    ("1", "1", "1", "1/8", "4", "2", "14", "5", "3"),
    ("3/2", "1", "2", "2/5", "5", "15/4", "105/4", "27/2", "25/2"),
    ("5/4", "1/2", "3/2", "1/3", "7/2", "35/16", "413/32", "117/16", "27/4"),
    ("4", "0", "5", "9/20", "8", "16", "140", "165", "50"),
    ("1", "3", "0", "1/10", "8", "4", "44", "6", "3"),
    ("2", "2", "2", "1/5", "8", "8", "76", "24", "5"),
    ("3", "0", "4", "1/6", "6", "9", "63", "76", "7"),
    ("5", "1", "1", "3/8", "12", "30", "378", "57", "24"),
    ("1", "1/3", "7/3", "3/7", "8/3", "4/3", "68/9", "23/3", "14"),
    ("7/5", "2", "3", "0", "34/5", "119/25", "5321/125", "489/25", "19/5"),
    ("10", "10", "10", "1/4", "40", "200", "8060", "2120", "22"),
    ("6", "5/2", "1/2", "1/3", "17", "51", "1785/2", "54", "21"),
    ("9/8", "0", "8", "49/100", "9/4", "81/64", "1593/256", "113/4", "425/4"),
    ("2", "3/4", "6", "1/12", "11/2", "11/2", "77/2", "225/4", "5"),
    ("8", "3", "2", "2/9", "22", "88", "1969", "285", "17"),
]
KEYS = ("lambda", "kappa", "mu", "theta", "kappa_prime", "k1", "k2", "mu_prime", "lambda_prime")


def report(log, n, ok, detail, elapsed, budget):
    ok = ok and elapsed < budget
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} ({elapsed:.2f}s of {budget}s)"
    print(line)
    log.append(line)
    assert ok, line


def test_criterion_1_formula_table(acceptance_log):
    start = time.perf_counter()
    got = [tuple(row[k] for k in KEYS) for row in suites.formula_table()]
    ok = got == FORMULA_TABLE
    report(acceptance_log, 1, ok, f"{len(got)} formula rows match the hand table",
           time.perf_counter() - start, 1)


def _suite(log, n, fn, count, budget):
    start = time.perf_counter()
    res = fn(7, count)
    tested = res.stats["tested"]
    ok = res.ok and tested >= count
    report(log, n, ok, f"{res.name}: {tested} tested, {len(res.violations)} violations, stats {res.stats}",
           time.perf_counter() - start, budget)


def test_criterion_2_reverse_inclusion(acceptance_log):
    _suite(acceptance_log, 2, suites.reverse_inclusion_suite, 1000, 120)


def test_criterion_3_concatenation(acceptance_log):
    _suite(acceptance_log, 3, suites.concatenation_suite, 500, 120)


def test_criterion_4_free_group(acceptance_log):
    start = time.perf_counter()
    ball = build_ball(GroupSpec.free("a", "b"), 8)
    comb = shortlex_combing(ball)
    paths = [path_from_literal(ball, w) for w in ("a a a a", "a b a b", "a b^-1 a^-1 b", "a b^-1 a^-1 b a b")]
    # the c = 3 ellipse around a length-4 geodesic just fits in the radius-8 ball
    rec = {recurrence_estimate(ball, g, 0, g.length, MiddleSpec(t, c))
           for g in paths[:3] for t in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 3)) for c in (1, 2, 3)}
    rec.discard(None)
    kappa0 = boundedness_estimate(comb, radius_cap=6).kappa0_hat
    prox = {combing_line_proximity(ball, comb, g).symmetric for g in paths}
    ok = rec == {0} and kappa0 == 1 and prox == {0}
    report(acceptance_log, 4, ok, f"recurrence {sorted(rec)}, kappa0 {kappa0}, proximity {sorted(prox)}",
           time.perf_counter() - start, 60)


def test_criterion_5_flat_plane(acceptance_log):
    start = time.perf_counter()
    ball = build_ball(GroupSpec.abelian("a", "b"), 24)
    axes = [path_from_literal(ball, " ".join(["a"] * n)) for n in (4, 8, 12)]
    gauges = [mu_star(ball, g, 3, 0) for g in axes]
    mus = [r.value for r in gauges]
    mhat = [recurrence_estimate(ball, g, 0, g.length, MiddleSpec("1/4", 2)) for g in axes]
    increasing = all(x < y for x, y in zip(mus, mus[1:])) and all(x < y for x, y in zip(mhat, mhat[1:]))
    ok = increasing and all(r.exhaustive for r in gauges)
    report(acceptance_log, 5, ok, f"mu* {mus}, m-hat {mhat}", time.perf_counter() - start, 300)


def test_criterion_6_wedge_loop(acceptance_log):
    start = time.perf_counter()
    ball = build_ball(GroupSpec.wedge(20), 10)
    cat = build_catalog(ball, 9, QGParams(1, 0), 3, 0, 7)
    loop = path_from_literal(ball, " ".join(["o"] + [f"c0.{j}" for j in range(1, 20)] + ["o"]))
    cert = certify_path(cat, loop)
    ok = cat.exhaustive and cert.overall == "certified" and not cert.fit.fits
    report(acceptance_log, 6, ok, f"catalog {len(cat)} segments, loop {cert.overall}, "
           f"global fit {cert.fit.fits}, required kappa {cert.fit.required_kappa}",
           time.perf_counter() - start, 60)


def test_criterion_7_exit_points(acceptance_log):
    start = time.perf_counter()
    res = suites.exit_point_suite(7, 100)
    ok = res.ok and res.stats["tested"] >= 100 and "nu_slope" in res.stats
    report(acceptance_log, 7, ok, f"{res.stats['tested']} tested, {len(res.violations)} violations, "
           f"nu fit {res.stats['nu_slope']} D + {res.stats['nu_intercept']}",
           time.perf_counter() - start, 180)


def test_criterion_8_qg_stay(acceptance_log):
    _suite(acceptance_log, 8, suites.qg_stay_suite, 200, 180)


def test_criterion_9_weak_mltg(acceptance_log):
    start = time.perf_counter()
    ball = build_ball(GroupSpec.free("a", "b"), 8)
    rep = weak_mltg_check(ball, 8, 4, 3, 0)
    ok = rep.exhaustive and not rep.violations
    report(acceptance_log, 9, ok, f"{rep.segments} segments, gauge {rep.gauge}, N {rep.N}, "
           f"{len(rep.violations)} violations", time.perf_counter() - start, 300)


def test_criterion_10_thread_determinism(acceptance_log, tmp_path):
    start = time.perf_counter()
    cfg = tmp_path / "suite.cfg"
    cfg.write_text("experiment = lemma-suite\nseed = 7\n")
    codes, blobs = [], []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        codes.append(main(["run", "--config", str(cfg), "--out", str(out), "--threads", str(threads)]))
        blobs.append((out / "report.json").read_bytes())
    ok = codes == [0, 0] and blobs[0] == blobs[1]
    report(acceptance_log, 10, ok, f"exit codes {codes}, reports identical: {blobs[0] == blobs[1]}",
           time.perf_counter() - start, 600)
