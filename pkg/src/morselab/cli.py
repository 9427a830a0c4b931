"""``morse-lab run --config FILE [--out DIR] [--threads N] [--seed-override S]``.

Exit status: 0 success, 1 a checked statement was violated, 2 bad
configuration, 3 a search budget ran out (a partial report is still written).
"""
from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import suites
from .cayley import GroupSpec, build_ball
from .combing import shortlex_combing
from .config import ExperimentConfig, load_config
from .errors import BallBudgetError, ConfigError, MarginError, PathError
from .localglobal import build_catalog, certify_path, enumerate_qg_paths
from .morse import DEFAULT_NODE_BUDGET, MiddleSpec, mu_star, recurrence_estimate
from .qgpaths import DiscretePath, QGParams, as_fraction, format_fraction, path_from_literal
from .report import RunReport, write_outputs

OK, VIOLATION, BAD_CONFIG, BUDGET = 0, 1, 2, 3


def _frac(value, what):
    try:
        return as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{what}: {value!r} is not a rational number") from None


def _tuple(cfg, key, n, default=None):
    value = cfg.get(key, default)
    if not isinstance(value, list) or len(value) != n:
        raise ConfigError(f"{key} must be a list of {n} numbers")
    return [_frac(v, key) if v is not None else None for v in value]


def _ball(cfg: ExperimentConfig):
    return build_ball(cfg.group, cfg.get("radius"), cfg.get("margin", 0),
                      cfg.get("vertex_budget", 3_000_000))


def _paths(cfg, ball) -> list[DiscretePath]:
    raw = cfg.get("paths", [])
    if not isinstance(raw, list) or not all(isinstance(p, str) for p in raw):
        raise ConfigError("paths must be a list of path literals")
    try:
        start = ball.vertex(cfg.get("start", "e" if ball.is_group else "o"))
        return [path_from_literal(ball, p, start) for p in raw]
    except (PathError, KeyError) as err:
        raise ConfigError(f"bad path: {err}") from None


def _grid(cfg):
    grid = cfg.get("grid", [])
    if not isinstance(grid, list) or not all(isinstance(c, list) and len(c) == 2 for c in grid):
        raise ConfigError("grid must be a list of [Q, q] pairs")
    out = [(_frac(Q, "grid"), _frac(q, "grid")) for Q, q in grid]
    if any(Q < 1 or q < 0 for Q, q in out):
        raise ConfigError("grid needs Q >= 1 and q >= 0")
    return out


def _map(threads, fn, items):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _fixture_name(cfg):
    return cfg.group.to_expr() if cfg.group is not None else cfg.kind


# ---------------------------------------------------------------------------
# Experiments


def run_profile(cfg, threads):
    ball = _ball(cfg)
    paths, grid = _paths(cfg, ball), _grid(cfg)
    budget = cfg.get("node_budget", DEFAULT_NODE_BUDGET)
    items = [(i, j) for i in range(len(paths)) for j in range(len(grid))]

    def cell(item):
        i, j = item
        Q, q = grid[j]
        return mu_star(ball, paths[i], Q, q, budget)

    got = _map(threads, cell, items)
    rep = RunReport("profile", cfg.echo(), cfg.seed)
    csv_lines = ["path,Q,q,mu_star,exhaustive,nodes_expanded"]
    for (i, j), r in zip(items, got):
        Q, q = grid[j]
        row = {"path": paths[i].literal(), "n": paths[i].length, "Q": format_fraction(Q),
               "q": format_fraction(q), "mu_star": r.value, "exhaustive": r.exhaustive,
               "nodes_expanded": r.nodes,
               "witness": r.witness.literal() if r.witness else None,
               "witness_start": ball.label(r.witness.start) if r.witness else None}
        rep.results.append(row)
        rep.exhaustive &= r.exhaustive
        csv_lines.append(f'"{row["path"]}",{row["Q"]},{row["q"]},{r.value},'
                         f'{str(r.exhaustive).lower()},{r.nodes}')
        rep.plot_rows.append((_fixture_name(cfg), paths[i].length,
                              f"mu_star(Q={row['Q']},q={row['q']})", r.value))
    rep.status = OK if rep.exhaustive else BUDGET
    return rep, {"profile.csv": "\n".join(csv_lines) + "\n"}


def _catalog(cfg, ball, threads):
    D = cfg.get("D")
    if not isinstance(D, int) or D < 0:
        raise ConfigError("D must be a non-negative integer")
    lam, kappa = _tuple(cfg, "local_params", 2, [1, 0])
    Q, q, mu = _tuple(cfg, "weak_morse", 3)
    return build_catalog(ball, D, QGParams(lam, kappa), Q, q, mu,
                         cfg.get("node_budget", DEFAULT_NODE_BUDGET), threads)


def run_catalog(cfg, threads):
    ball = _ball(cfg)
    cat = _catalog(cfg, ball, threads)
    rep = RunReport("catalog", cfg.echo(), cfg.seed)
    rep.results.append({"D": cat.D, "count": len(cat), "tested": cat.tested,
                        "exhaustive": cat.exhaustive, "ball_hash": ball.digest})
    rep.exhaustive = cat.exhaustive
    rep.plot_rows.append((_fixture_name(cfg), cat.D, "catalog_size", len(cat)))
    rep.status = OK if cat.exhaustive else BUDGET
    return rep, {str(cfg.get("catalog_file", "catalog.txt")): cat.to_text()}


def run_certify(cfg, threads):
    ball = _ball(cfg)
    cat = _catalog(cfg, ball, threads)
    combing = None
    if cfg.get("combing") == "shortlex":
        combing = shortlex_combing(ball)
    elif cfg.get("combing") is not None:
        raise ConfigError("combing must be 'shortlex' or absent")
    rep = RunReport("certify", cfg.echo(), cfg.seed)
    for path in _paths(cfg, ball):
        cert = certify_path(cat, path, combing, threads)
        rep.results.append(cert.to_dict())
        rep.plot_rows.append((_fixture_name(cfg), path.length, "certified",
                              int(cert.overall == "certified")))
    rep.exhaustive = cat.exhaustive
    rep.status = OK if cat.exhaustive else BUDGET
    return rep, {}


def run_middle(cfg, threads):
    ball = _ball(cfg)
    paths = _paths(cfg, ball)
    ts = [_frac(t, "t") for t in (cfg.get("t", ["1/4"]) or [])]
    cs = [_frac(c, "c") for c in (cfg.get("c", [2]) or [])]
    try:
        specs = [MiddleSpec(t, c) for t in ts for c in cs]
    except ValueError as err:
        raise ConfigError(str(err)) from None
    items = [(p, s) for p in paths for s in specs]
    got = _map(threads, lambda it: recurrence_estimate(ball, it[0], 0, it[0].length, it[1]), items)
    rep = RunReport("middle", cfg.echo(), cfg.seed)
    for (p, s), m in zip(items, got):
        rep.results.append({"path": p.literal(), "n": p.length, "t": format_fraction(s.t),
                            "c": format_fraction(s.c), "m_hat": m})
        rep.plot_rows.append((_fixture_name(cfg), p.length,
                              f"m_hat(t={format_fraction(s.t)},c={format_fraction(s.c)})",
                              "" if m is None else m))
    return rep, {}


def _suite_report(rep, res):
    rep.results.append(res.to_dict())
    rep.violations.extend({"suite": res.name, **v} for v in res.violations)
    rep.plot_rows.append((res.name, res.instances, "violations", len(res.violations)))


def run_exitpoints(cfg, threads):
    rep = RunReport("exitpoints", cfg.echo(), cfg.seed)
    _suite_report(rep, suites.exit_point_suite(cfg.seed, cfg.get("instances", 100), threads))
    rep.status = VIOLATION if rep.violations else OK
    return rep, {}


def run_counterexample(cfg, threads):
    n = cfg.get("cycle", 20)
    D = cfg.get("D", 9)
    if not isinstance(n, int) or n < 3 or not isinstance(D, int) or D < 0:
        raise ConfigError("cycle must be an integer >= 3 and D a non-negative integer")
    Q, q, mu = _tuple(cfg, "weak_morse", 3, [3, 0, None])
    ball = build_ball(GroupSpec.wedge(n), n // 2)
    budget = cfg.get("node_budget", DEFAULT_NODE_BUDGET)
    arcs = [DiscretePath(ball, p) for p in enumerate_qg_paths(ball, ball.origin, D, QGParams(1, 0))]
    gauge = max(mu_star(ball, a, Q, q, budget, pairs=[(0, a.length)]).value for a in arcs)
    if mu is None:
        mu = Fraction(gauge)
    cat = build_catalog(ball, D, QGParams(1, 0), Q, q, mu, budget, threads)
    loop = path_from_literal(ball, " ".join(["o"] + [f"c0.{j}" for j in range(1, n)] + ["o"]))
    cert = certify_path(cat, loop, threads=threads)
    rep = RunReport("counterexample", cfg.echo(), cfg.seed)
    rep.results.append({"cycle": n, "D": D, "weak_morse": [format_fraction(x) for x in (Q, q, mu)],
                        "arc_gauge": gauge, "catalog_size": len(cat), "certificate": cert.to_dict()})
    if cert.overall != "certified":
        rep.violations.append({"problem": "loop is not certified", "overall": cert.overall})
    if cert.fit.fits:
        rep.violations.append({"problem": "loop admits a global fit",
                               "fit": cert.fit.params.as_list()})
    rep.exhaustive = cat.exhaustive
    rep.plot_rows.append((f"graph({n})", n, "certified", int(cert.overall == "certified")))
    rep.plot_rows.append((f"graph({n})", n, "global_fit", int(cert.fit.fits)))
    rep.status = VIOLATION if rep.violations else OK
    return rep, {}


def run_lemma_suite(cfg, threads):
    rep = RunReport("lemma-suite", cfg.echo(), cfg.seed)
    counts = {k: cfg.get(k, d) for k, d in (("reverse_inclusion", 1000), ("concatenation", 500),
                                            ("exit_points", 100), ("qg_stay", 200))}
    for k, v in counts.items():
        if not isinstance(v, int) or v < 0:
            raise ConfigError(f"{k} must be a non-negative integer")
    rep.summary["formulas"] = suites.formula_table()
    for fn, key in ((suites.reverse_inclusion_suite, "reverse_inclusion"),
                    (suites.concatenation_suite, "concatenation"),
                    (suites.exit_point_suite, "exit_points"),
                    (suites.qg_stay_suite, "qg_stay")):
        _suite_report(rep, fn(cfg.seed, counts[key], threads))
    rep.status = VIOLATION if rep.violations else OK
    return rep, {}


RUNNERS = {
    "profile": run_profile, "catalog": run_catalog, "certify": run_certify,
    "middle": run_middle, "exitpoints": run_exitpoints, "counterexample": run_counterexample,
    "lemma-suite": run_lemma_suite,
}


def run(cfg: ExperimentConfig, out_dir: Path, threads: int = 1) -> int:
    began = time.perf_counter()
    try:
        rep, tables = RUNNERS[cfg.kind](cfg, threads)
    except BallBudgetError as err:
        rep, tables = RunReport(cfg.kind, cfg.echo(), cfg.seed, exhaustive=False,
                                status=BUDGET), {}
        rep.summary["error"] = str(err)
    except MarginError as err:
        raise ConfigError(f"configuration does not fit the ball: {err}") from None
    write_outputs(rep, out_dir, tables, {"seconds": round(time.perf_counter() - began, 3),
                                         "threads": threads})
    return rep.status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morse-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment described by a config file")
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--out", default="morse-lab-out", help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker threads")
    p.add_argument("--seed-override", type=int, default=None, help="replace the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed_override)
        threads = args.threads if args.threads is not None else cfg.get("threads", 1)
        if threads < 1:
            raise ConfigError("--threads must be positive")
        status = run(cfg, Path(args.out), threads)
    except ConfigError as err:
        print(f"morse-lab: config error: {err}", file=sys.stderr)
        return BAD_CONFIG
    print(f"morse-lab: {cfg.kind} finished with status {status}; report in {args.out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
