"""Randomized property suites for the path lemmas.

Each instance ``k`` of a suite draws from its own counter-based stream
``Philox(key = seed * 2**64 + k)``, so results do not depend on the order
or the number of threads used to run instances.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .cayley import CayleyBall, GroupSpec, build_ball, geodesic
from .errors import MarginError
from .localglobal import check_exit_lemmas, exit_point, fit_upper_envelope, qg_stay_check
from .qgpaths import (DiscretePath, QGParams, concat_lambda, continuous_excess, format_fraction,
                      improvement_constants, is_quasi_geodesic, reverse_inclusion_bound)

SUITE_PARAMS = (QGParams(1, 0), QGParams(1, 1), QGParams(2, 0), QGParams(2, 1),
                QGParams(Fraction(3, 2), 1))
THETAS = (Fraction(0), Fraction(1, 8), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5))
MAX_TRIES = 200


def instance_rng(seed: int, item: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 bits")
    return np.random.Generator(np.random.Philox(key=(seed << 64) | item))


_balls: dict[str, CayleyBall] = {}
_balls_lock = threading.Lock()


def suite_balls() -> tuple[CayleyBall, CayleyBall]:
    """ℤ² of radius 7 and F₂ of radius 6, with dense distance tables."""
    with _balls_lock:
        if not _balls:
            for name, spec, r in (("Z2", GroupSpec.abelian("a", "b"), 7),
                                  ("F2", GroupSpec.free("a", "b"), 6)):
                ball = build_ball(spec, r)
                ball.full_dist  # computed once, before any thread reads it
                _balls[name] = ball
        return _balls["Z2"], _balls["F2"]


# ---------------------------------------------------------------------------
# Random quasi-geodesics


def random_qg_path(ball: CayleyBall, rng: np.random.Generator, start: int, length: int,
                   params: QGParams, target: int | None = None, allowed: np.ndarray | None = None,
                   node_budget: int = 4000) -> DiscretePath | None:
    """Uniformly branching randomized DFS for a ``params``-QG of exactly ``length`` steps.

    With ``target`` the path must end there; ``allowed`` masks usable vertices.
    """
    dist = ball.full_dist
    A, B, C = params.scaled()
    core = ball.core_radius
    nodes = 0
    path = [start]
    options = [None]

    def choices(k):
        v = path[-1]
        out = []
        for w in ball.nbr[v]:
            w = int(w)
            if w < 0 or ball.norms[w] > core or (allowed is not None and not allowed[w]):
                continue
            if target is not None and dist[w, target] > length - k - 1:
                continue
            prefix = np.asarray(path)
            if (A * (k + 1 - np.arange(k + 1)) > B * dist[w, prefix] + C).any():
                continue
            out.append(w)
        rng.shuffle(out)
        return out

    if allowed is not None and not allowed[start]:
        return None
    options[0] = choices(0)
    while path:
        k = len(path) - 1
        if k == length:
            return DiscretePath(ball, tuple(path))
        if not options[k]:
            path.pop()
            options.pop()
            continue
        nodes += 1
        if nodes > node_budget:
            return None
        path.append(options[k].pop())
        options.append(choices(k + 1))
    return None


def _near(ball, rng, v, radius):
    """Random vertex of the core within ``radius`` of ``v``."""
    d = ball.full_dist[v]
    cand = np.flatnonzero((d <= radius) & (ball.norms <= ball.core_radius))
    return int(rng.choice(cand))


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


# ---------------------------------------------------------------------------
# Suites


@dataclass
class SuiteResult:
    name: str
    seed: int
    instances: int
    violations: list = field(default_factory=list)
    skipped: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "instances": self.instances,
                "skipped": self.skipped, "violations": self.violations, "stats": self.stats,
                "ok": self.ok}


def _run(seed, n, threads, fn: Callable):
    items = range(n)
    if threads <= 1:
        return [fn(seed, k) for k in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda k: fn(seed, k), items))


def _ball_and_params(rng):
    z2, f2 = suite_balls()
    ball = z2 if rng.integers(2) == 0 else f2
    return ball, _pick(rng, SUITE_PARAMS)


def _reverse_inclusion_instance(seed, item):
    rng = instance_rng(seed, item)
    ball, params = _ball_and_params(rng)
    for _ in range(MAX_TRIES):
        g2 = random_qg_path(ball, rng, ball.origin, int(rng.integers(1, 7)), params)
        if g2 is None:
            continue
        gap = int(rng.integers(0, 3))
        a = _near(ball, rng, g2.start, gap)
        b = _near(ball, rng, g2.end, gap)
        length = int(ball.full_dist[a, b]) + 2 * int(rng.integers(0, 3))
        g1 = random_qg_path(ball, rng, a, length, params, target=b)
        if g1 is None:
            continue
        d = max(int(ball.full_dist[a, g2.start]), int(ball.full_dist[b, g2.end]))
        # smallest mu meeting both hypotheses is the hardest case
        mu = max(Fraction(d), continuous_excess(g1, g2))
        bound = reverse_inclusion_bound(params, mu)
        actual = continuous_excess(g2, g1)
        rec = {"item": item, "ball": ball.spec.kind, "params": params.as_list(),
               "mu": format_fraction(mu), "bound": format_fraction(bound),
               "actual": format_fraction(actual)}
        if actual > bound:
            rec.update(gamma1=g1.literal(), gamma2=g2.literal(),
                       start1=ball.label(g1.start), start2=ball.label(g2.start))
            return rec, False
        return rec, True
    return None, True


def reverse_inclusion_suite(seed: int, n: int = 1000, threads: int = 1) -> SuiteResult:
    out = _run(seed, n, threads, _reverse_inclusion_instance)
    res = SuiteResult("reverse-inclusion", seed, n)
    ratios = []
    for rec, ok in out:
        if rec is None:
            res.skipped += 1
            continue
        if not ok:
            res.violations.append(rec)
        ratios.append(Fraction(rec["actual"]) / Fraction(rec["bound"]) if Fraction(rec["bound"]) else Fraction(0))
    res.stats = {"tested": n - res.skipped,
                 "max_actual_over_bound": format_fraction(max(ratios, default=Fraction(0)))}
    return res


def _hyp1(ball, sub, u, z):
    # every point of the subpath is at least as far from z as u is
    return bool((ball.full_dist[z, list(sub.vertices)] >= ball.full_dist[z, u]).all())


def _choose_z(ball, rng, sub, u, radius):
    d = ball.full_dist[u]
    cand = [int(z) for z in np.flatnonzero((d <= radius) & (ball.norms <= ball.core_radius))]
    good = [z for z in cand if _hyp1(ball, sub, u, z)]
    return _pick(rng, good)


def _concatenation_instance(seed, item):
    rng = instance_rng(seed, item)
    ball, params = _ball_and_params(rng)
    theta = _pick(rng, THETAS)
    lam2 = QGParams(2 * params.lam + 1, params.kappa)
    lamc = QGParams(concat_lambda(params, theta), params.kappa)
    for _ in range(MAX_TRIES):
        g = random_qg_path(ball, rng, ball.origin, int(rng.integers(2, 6)), params)
        if g is None:
            continue
        i = int(rng.integers(0, g.length))
        j = int(rng.integers(i + 1, g.length + 1))
        sub = g.sub(i, j)
        u1, u2 = sub.start, sub.end
        try:
            # single-sided: hypothesis (1) only
            z1 = _choose_z(ball, rng, sub, u1, 2)
            z2 = _choose_z(ball, rng, sub, u2, 2)
            a1 = DiscretePath(ball, tuple(geodesic(ball, z1, u1)))
            a2 = DiscretePath(ball, tuple(geodesic(ball, u2, z2)))
            left, right = a1.concat(sub), sub.concat(a2)
            # double-sided: also d(u_i, z_i) <= theta d(u1, u2)
            r = int(theta * int(ball.full_dist[u1, u2]))
            w1 = _choose_z(ball, rng, sub, u1, r)
            w2 = _choose_z(ball, rng, sub, u2, r)
            b1 = DiscretePath(ball, tuple(geodesic(ball, w1, u1)))
            b2 = DiscretePath(ball, tuple(geodesic(ball, u2, w2)))
            both = b1.concat(sub).concat(b2)
        except MarginError:
            continue
        bad = []
        for name, path, p in (("left", left, lam2), ("right", right, lam2), ("both", both, lamc)):
            check = is_quasi_geodesic(path, p)
            if not check:
                bad.append({"case": name, "path": path.literal(), "start": ball.label(path.start),
                            "params": p.as_list(), "pair": list(check.pair)})
        rec = {"item": item, "ball": ball.spec.kind, "params": params.as_list(),
               "theta": format_fraction(theta), "failures": bad}
        return rec, not bad
    return None, True


def concatenation_suite(seed: int, n: int = 500, threads: int = 1) -> SuiteResult:
    out = _run(seed, n, threads, _concatenation_instance)
    res = SuiteResult("concatenation", seed, n)
    for rec, ok in out:
        if rec is None:
            res.skipped += 1
        elif not ok:
            res.violations.append(rec)
    res.stats = {"tested": n - res.skipped}
    return res


def brute_force_min_exit(eta: DiscretePath, gamma: DiscretePath, D: int, ell: int):
    """Least exit moment by direct evaluation of the definition (no prefix tables)."""
    dist = eta.ball.full_dist
    T = gamma.length
    for t_e in range(T + 1):
        for t in range(eta.length + 1):
            if dist[eta[t], gamma[t_e]] > D:
                continue
            far = min(int(dist[eta[a], gamma[b]]) for a in range(t, eta.length + 1)
                      for b in range(min(t_e + ell, T) + 1))
            if far >= D:
                return t_e, t
    return None


def _exit_instance(seed, item):
    rng = instance_rng(seed, item)
    ball, params = _ball_and_params(rng)
    for _ in range(MAX_TRIES):
        eta = random_qg_path(ball, rng, ball.origin, int(rng.integers(2, 8)), params)
        gamma = random_qg_path(ball, rng, ball.origin, int(rng.integers(2, 8)), params)
        if eta is None or gamma is None:
            continue
        D, ell = int(rng.integers(1, 3)), int(rng.integers(0, 4))
        rec = exit_point(eta, gamma, D, ell)
        far_end = int(ball.full_dist[eta.end, list(gamma.vertices)].min()) > D
        info = {"item": item, "ball": ball.spec.kind, "params": params.as_list(), "D": D,
                "ell": ell, "eta": eta.literal(), "gamma": gamma.literal(), "far_end": far_end}
        problems = []
        if far_end and rec is None:
            problems.append("no exit point although eta ends outside N_D(gamma)")
        if len(eta.vertices) * len(gamma.vertices) <= 200:
            brute = brute_force_min_exit(eta, gamma, D, ell)
            got = None if rec is None else (rec.t_e, rec.t)
            if brute != got:
                problems.append(f"minimal exit point mismatch: {got} vs {brute}")
        if rec is not None:
            lem = check_exit_lemmas(rec)
            info.update(t=rec.t, t_e=rec.t_e, ties=rec.ties, hausdorff=lem.hausdorff)
            if lem.violations:
                problems.append(f"no nearby gamma point for s in {list(lem.violations)}")
        info["problems"] = problems
        return info, not problems
    return None, True


def exit_point_suite(seed: int, n: int = 100, threads: int = 1) -> SuiteResult:
    out = _run(seed, n, threads, _exit_instance)
    res = SuiteResult("exit-point", seed, n)
    xs, ys = [], []
    found = 0
    for rec, ok in out:
        if rec is None:
            res.skipped += 1
            continue
        if not ok:
            res.violations.append(rec)
        if "hausdorff" in rec:
            found += 1
            xs.append(rec["ell"] + rec["D"])
            ys.append(rec["hausdorff"])
    nu = fit_upper_envelope(xs, ys)
    over = [y for x, y in zip(xs, ys) if y > nu(x)]
    if over:
        res.violations.append({"problem": "hausdorff above fitted envelope", "values": over})
    res.stats = {"tested": n - res.skipped, "records": found,
                 "nu_slope": format_fraction(nu.slope), "nu_intercept": format_fraction(nu.intercept)}
    return res


def _qg_stay_instance(seed, item):
    rng = instance_rng(seed, item)
    ball, params = _ball_and_params(rng)
    for _ in range(MAX_TRIES):
        g1 = random_qg_path(ball, rng, ball.origin, int(rng.integers(2, 8)), params)
        if g1 is None:
            continue
        D = int(rng.integers(0, 3))
        allowed = ball.full_dist[:, list(g1.vertices)].min(axis=1) <= D
        a = _near(ball, rng, g1[int(rng.integers(g1.length + 1))], D)
        g2 = random_qg_path(ball, rng, a, int(rng.integers(1, 8)), params, allowed=allowed)
        if g2 is None:
            continue
        t2 = int(rng.integers(g2.length + 1))
        s2 = int(rng.integers(t2, g2.length + 1))
        dist = ball.full_dist
        firsts = [t for t in range(g1.length + 1) if dist[g1[t], g2[t2]] <= D]
        if not firsts:
            continue
        t1 = _pick(rng, firsts)
        seconds = [s for s in range(t1, g1.length + 1) if dist[g1[s], g2[s2]] <= D]
        if not seconds:
            continue
        s1 = _pick(rng, seconds)
        rep = qg_stay_check(g1, g2, (t1, s1, t2, s2), D, params)
        rec = {"item": item, "ball": ball.spec.kind, "params": params.as_list(), "D": D,
               "delta_hat": rep.delta_hat, "delta": format_fraction(rep.delta_bound)}
        if not rep.ok:
            rec.update(gamma1=g1.literal(), gamma2=g2.literal(), start2=ball.label(g2.start),
                       matches=[t1, s1, t2, s2])
        return rec, rep.ok
    return None, True


def qg_stay_suite(seed: int, n: int = 200, threads: int = 1) -> SuiteResult:
    out = _run(seed, n, threads, _qg_stay_instance)
    res = SuiteResult("qg-stay", seed, n)
    worst: dict[int, int] = {}
    for rec, ok in out:
        if rec is None:
            res.skipped += 1
            continue
        if not ok:
            res.violations.append(rec)
        worst[rec["D"]] = max(worst.get(rec["D"], 0), rec["delta_hat"])
    res.stats = {"tested": n - res.skipped,
                 "max_delta_hat_by_D": {str(k): v for k, v in sorted(worst.items())}}
    return res


# ---------------------------------------------------------------------------
# Closed forms


FORMULA_CASES = (
    (1, 0, 0, 0), (1, 0, 2, Fraction(1, 4)), (2, 1, 3, Fraction(1, 4)), (3, 2, 1, Fraction(1, 3)),
    (2, 0, 1, Fraction(1, 4)), (1, 1, 1, Fraction(1, 8)), (Fraction(3, 2), 1, 2, Fraction(2, 5)),
    (Fraction(5, 4), Fraction(1, 2), Fraction(3, 2), Fraction(1, 3)), (4, 0, 5, Fraction(9, 20)),
    (1, 3, 0, Fraction(1, 10)), (2, 2, 2, Fraction(1, 5)), (3, 0, 4, Fraction(1, 6)),
    (5, 1, 1, Fraction(3, 8)), (1, Fraction(1, 3), Fraction(7, 3), Fraction(3, 7)),
    (Fraction(7, 5), 2, 3, 0), (10, 10, 10, Fraction(1, 4)), (6, Fraction(5, 2), Fraction(1, 2), Fraction(1, 3)),
    (Fraction(9, 8), 0, 8, Fraction(49, 100)), (2, Fraction(3, 4), 6, Fraction(1, 12)), (8, 3, 2, Fraction(2, 9)),
)


def formula_table() -> list[dict]:
    rows = []
    for lam, kappa, mu, theta in FORMULA_CASES:
        p = QGParams(lam, kappa)
        imp = improvement_constants(p)
        rows.append({
            "lambda": format_fraction(p.lam), "kappa": format_fraction(p.kappa),
            "mu": format_fraction(Fraction(mu)), "theta": format_fraction(Fraction(theta)),
            "kappa_prime": format_fraction(imp.kappa_prime), "k1": format_fraction(imp.k1),
            "k2": format_fraction(imp.k2),
            "mu_prime": format_fraction(reverse_inclusion_bound(p, mu)),
            "lambda_prime": format_fraction(concat_lambda(p, theta)),
        })
    return rows
