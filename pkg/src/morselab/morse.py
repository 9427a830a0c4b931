"""Weak Morse testing by exact witness search, gauge profiles and middle recurrence.

Witnesses are unit-speed ``(Q,q)``-quasi-geodesic edge paths between two
points of ``gamma``.  Their excursion is the largest vertex distance to the
vertex set of the tested subpath ``gamma[s..t]``.  Searches are exact up to a
node budget; a result that ran out of budget says so instead of guessing.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .cayley import CayleyBall
from .errors import MarginError
from .qgpaths import (DiscretePath, QGParams, as_fraction, distances_to, format_fraction,
                      is_quasi_geodesic)

DEFAULT_NODE_BUDGET = 2_000_000_000
NO_STOP = 2**62


# ---------------------------------------------------------------------------
# Search regions


@dataclass
class SearchRegion:
    """Vertices a witness between ``src`` and ``dst`` can visit, with local tables."""

    vertices: np.ndarray
    adj: np.ndarray
    dist: np.ndarray
    src: int
    dst: int
    max_len: int

    def __len__(self):
        return len(self.vertices)


def witness_region(ball: CayleyBall, src: int, dst: int, params: QGParams) -> SearchRegion:
    """All vertices within reach of a ``params``-quasi-geodesic from ``src`` to ``dst``.

    A witness has length at most ``T = max_span(d(src, dst))`` so its vertices
    satisfy ``d(src, x) + d(x, dst) <= T``.  In a tree every excursion away
    from the geodesic ``[src, dst]`` revisits its base point, which limits
    its depth to ``floor(Qq / 2)``.
    """
    d = ball.distance(src, dst)
    T = params.max_span(d)
    ns, nd = int(ball.norms[src]), int(ball.norms[dst])
    if ball.is_tree:
        depth = math.floor(params.lam * params.kappa / 2)
        need = max(ns, nd) + depth
    else:
        depth = None
        need = (ns + nd + T) // 2
    ball.check_fits(need, "witness search region")
    cand = np.arange(ball.sphere_offsets[min(need, ball.radius) + 1])
    dd = ball.dist_matrix(cand, [src, dst])
    keep = dd.sum(axis=1) <= T
    if depth is not None:
        keep &= (dd.sum(axis=1) - d) <= 2 * depth
    verts = cand[keep]
    local = np.full(len(ball), -1, dtype=np.int64)
    local[verts] = np.arange(len(verts))
    nb = ball.nbr[verts]
    adj = np.where(nb >= 0, local[np.maximum(nb, 0)], -1)
    dist = ball.dist_matrix(verts, verts).astype(np.int32)
    return SearchRegion(verts, adj, dist, int(local[src]), int(local[dst]), T)


# ---------------------------------------------------------------------------
# Weak Morse


@dataclass(frozen=True)
class WeakMorseResult:
    """Outcome of a witness search.

    ``holds`` is ``True`` (exhaustive, no witness beyond ``mu``), ``False``
    (a verified witness escapes ``N_mu``) or ``None`` (budget exhausted).
    On failure ``max_excursion`` is the excursion of the witness (a lower
    bound); on success it is the exact maximum if ``exact_excursion`` was
    requested and ``None`` otherwise.
    """

    holds: bool | None
    witness: DiscretePath | None
    max_excursion: int | None
    search_exhaustive: bool
    nodes: int
    pair: tuple[int, int] | None = None

    @property
    def verdict(self) -> str:
        return {True: "holds", False: "fails", None: "unknown-exhausted"}[self.holds]


def _run_search(ball, gamma, s, t, params, incumbent, stop_above, budget, backend=None):
    src, dst = gamma[s], gamma[t]
    region = witness_region(ball, src, dst, params)
    exc = distances_to(ball, region.vertices, gamma.vertices[s : t + 1]).astype(np.int32)
    A, B, C = params.scaled()
    search = backend or kernels.witness_search
    best, path, nodes, exhaustive = search(
        region.adj, region.dist, exc, region.src, region.dst, A, B, C, region.max_len,
        incumbent, stop_above, budget)
    witness = None
    if path:
        witness = DiscretePath(ball, tuple(int(region.vertices[i]) for i in path))
    return int(best), witness, int(nodes), bool(exhaustive)


def _check_witness(witness, gamma, s, t, params, excursion):
    # every reported witness is re-verified independently of the kernel
    assert witness.start == gamma[s] and witness.end == gamma[t]
    assert is_quasi_geodesic(witness, params)
    got = distances_to(gamma.ball, witness.vertices, gamma.vertices[s : t + 1]).max()
    assert int(got) == excursion


def weak_morse_test(ball: CayleyBall, gamma: DiscretePath, Q, q, mu, pair=None,
                    node_budget: int = DEFAULT_NODE_BUDGET, backend=None,
                    exact_excursion: bool = False) -> WeakMorseResult:
    """Is ``gamma`` ``(Q,q,mu)``-weakly Morse for ``pair`` (or all pairs when None)?"""
    params = QGParams(Q, q)
    mu = as_fraction(mu)
    if mu < 0:
        raise ValueError("mu must be non-negative")
    stop = math.floor(mu)
    pairs = _pairs(gamma) if pair is None else [tuple(pair)]
    for s, t in pairs:
        if not 0 <= s <= t <= gamma.length:
            raise IndexError(f"bad endpoint pair ({s}, {t})")
    total = 0
    exhaustive = True
    for s, t in pairs:
        # incumbent = mu: only witnesses escaping N_mu are of interest
        got, witness, nodes, exh = _run_search(ball, gamma, s, t, params, stop, stop,
                                               max(node_budget - total, 0), backend)
        total += nodes
        if witness is not None and got > stop:
            _check_witness(witness, gamma, s, t, params, got)
            return WeakMorseResult(False, witness, got, False, total, (s, t))
        exhaustive &= exh
    excursion = None
    if exhaustive and exact_excursion:
        m = mu_star(ball, gamma, Q, q, node_budget, pairs=pairs, backend=backend)
        excursion, total = m.value, total + m.nodes
    return WeakMorseResult(True if exhaustive else None, None, excursion, exhaustive, total)


def _pairs(gamma: DiscretePath) -> list[tuple[int, int]]:
    n = gamma.length
    return sorted(((s, t) for s in range(n + 1) for t in range(s, n + 1)),
                  key=lambda p: (p[0] - p[1], p))


@dataclass(frozen=True)
class MuStar:
    value: int
    exhaustive: bool
    nodes: int
    witness: DiscretePath | None
    pair: tuple[int, int] | None


def mu_star(ball: CayleyBall, gamma: DiscretePath, Q, q, node_budget: int = DEFAULT_NODE_BUDGET,
            pairs=None, backend=None) -> MuStar:
    """Least integer ``mu`` for which ``gamma`` is ``(Q,q,mu)``-weakly Morse in the ball.

    Pairs run longest first and share the incumbent, so later searches only
    look for strictly larger excursions.
    """
    params = QGParams(Q, q)
    best, witness, where = 0, None, None
    total, exhaustive = 0, True
    for s, t in (pairs if pairs is not None else _pairs(gamma)):
        got, w, nodes, exh = _run_search(ball, gamma, s, t, params, best, NO_STOP,
                                         max(node_budget - total, 0), backend)
        total += nodes
        exhaustive &= exh
        if w is not None and got > best:
            _check_witness(w, gamma, s, t, params, got)
            best, witness, where = got, w, (s, t)
    return MuStar(best, exhaustive, total, witness, where)


@dataclass
class ProfileCell:
    Q: Fraction
    q: Fraction
    mu_star: int
    exhaustive: bool
    nodes_expanded: int


@dataclass
class MorseGaugeProfile:
    cells: list[ProfileCell] = field(default_factory=list)

    def __getitem__(self, key) -> int:
        Q, q = (as_fraction(k) for k in key)
        for c in self.cells:
            if c.Q == Q and c.q == q:
                return c.mu_star
        raise KeyError(key)

    @property
    def exhaustive(self) -> bool:
        return all(c.exhaustive for c in self.cells)

    def rows(self) -> list[dict]:
        return [{"Q": format_fraction(c.Q), "q": format_fraction(c.q), "mu_star": c.mu_star,
                 "exhaustive": c.exhaustive, "nodes_expanded": c.nodes_expanded}
                for c in self.cells]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["Q", "q", "mu_star", "exhaustive", "nodes_expanded"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.rows(), sort_keys=True, indent=1)


def morse_profile(ball: CayleyBall, gamma: DiscretePath, grid: Iterable,
                  node_budget: int = DEFAULT_NODE_BUDGET, backend=None) -> MorseGaugeProfile:
    cells = []
    for Q, q in grid:
        Q, q = as_fraction(Q), as_fraction(q)
        r = mu_star(ball, gamma, Q, q, node_budget, backend=backend)
        cells.append(ProfileCell(Q, q, r.value, r.exhaustive, r.nodes))
    return MorseGaugeProfile(cells)


# ---------------------------------------------------------------------------
# Middles and recurrence


def t_middle(gamma: DiscretePath, a_idx: int, b_idx: int, t) -> list[int]:
    """Indices ``i`` in ``[a_idx, b_idx]`` with ``min(d(x,a), d(x,b)) >= t*d(a,b)``.

    The set need not be contiguous for non-geodesic ``gamma``; all qualifying
    indices are returned.  When ``d(a,b) = 0`` the middle is ``[a_idx]``.
    """
    t = as_fraction(t)
    if not 0 < t < Fraction(1, 2):
        raise ValueError("t must lie in (0, 1/2)")
    if not 0 <= a_idx <= b_idx <= gamma.length:
        raise IndexError("bad index pair")
    D = gamma.dist
    dab = int(D[a_idx, b_idx])
    if dab == 0:
        return [a_idx]
    need = t * dab
    return [i for i in range(a_idx, b_idx + 1)
            if min(int(D[i, a_idx]), int(D[i, b_idx])) >= need]


@dataclass(frozen=True)
class MiddleSpec:
    t: Fraction
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", as_fraction(self.t))
        object.__setattr__(self, "c", as_fraction(self.c))
        if not 0 < self.t < Fraction(1, 2):
            raise ValueError("t must lie in (0, 1/2)")
        if self.c < 1:
            raise ValueError("c must be at least 1")


def punctured_distance(ball: CayleyBall, src: int, dst: int, blocked: np.ndarray,
                       limit: int | None = None, parents: bool = False):
    """BFS distance from ``src`` to ``dst`` avoiding ``blocked`` vertices.

    Returns ``None`` when ``dst`` is unreachable within ``limit`` steps.  With
    ``parents=True`` returns ``(distance, path)``.
    """
    if blocked[src] or blocked[dst]:
        return None
    seen = np.full(len(ball), -1, dtype=np.int64)
    seen[src] = src
    depth = {src: 0}
    queue = deque([src])
    nbr = ball.nbr
    while queue:
        u = queue.popleft()
        du = depth[u]
        if u == dst:
            break
        if limit is not None and du >= limit:
            continue
        for v in nbr[u]:
            if v >= 0 and seen[v] < 0 and not blocked[v]:
                seen[v] = u
                depth[int(v)] = du + 1
                queue.append(int(v))
    if dst not in depth:
        return None
    if not parents:
        return depth[dst]
    path = [dst]
    while path[-1] != src:
        path.append(int(seen[path[-1]]))
    return depth[dst], path[::-1]


def _ellipse(ball, a, b, budget):
    """Vertices any path of length <= budget from a to b can visit."""
    need = (int(ball.norms[a]) + int(ball.norms[b]) + budget) // 2
    ball.check_fits(need, "recurrence region")
    cand = np.arange(ball.sphere_offsets[min(need, ball.radius) + 1])
    dd = ball.dist_matrix(cand, [a, b])
    return cand[dd.sum(axis=1) <= budget]


def recurrence_estimate(ball: CayleyBall, gamma: DiscretePath, a_idx: int, b_idx: int,
                        spec: MiddleSpec) -> int | None:
    """Least ``r`` such that every ``a``-``b`` path of length ``<= c d(a,b)`` meets ``N_r(middle)``.

    Returns ``None`` if the middle is empty (no constraint at all).
    """
    middle = t_middle(gamma, a_idx, b_idx, spec.t)
    if not middle:
        return None
    a, b = gamma[a_idx], gamma[b_idx]
    budget = math.floor(spec.c * ball.distance(a, b))
    region = _ellipse(ball, a, b, budget)
    dmid = distances_to(ball, region, [gamma[i] for i in middle])
    outside = np.ones(len(ball), dtype=bool)
    outside[region] = False
    r = 0
    while True:
        blocked = outside.copy()
        blocked[region[dmid <= r]] = True
        if blocked[a] or blocked[b]:
            return r
        d = punctured_distance(ball, a, b, blocked, budget)
        if d is None or d > budget:
            return r
        r += 1


@dataclass(frozen=True)
class Linear:
    """``slope * x + intercept``."""

    slope: Fraction
    intercept: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "slope", as_fraction(self.slope))
        object.__setattr__(self, "intercept", as_fraction(self.intercept))

    def __call__(self, x) -> Fraction:
        return self.slope * as_fraction(x) + self.intercept


@dataclass(frozen=True)
class ProbeResult:
    path: DiscretePath | None
    t1: int | None = None
    t2: int | None = None
    degenerate_pairs: int = 0

    @property
    def found(self) -> bool:
        return self.path is not None


def consequence_lemma_probe(ball: CayleyBall, gamma: DiscretePath, D: int, ell: int,
                            sigma: Linear, chi: Linear, delta: Linear) -> ProbeResult:
    """Search for a path between ``gamma(t1), gamma(t2)`` violating the recurrence consequence.

    Conditions: ``ell <= t2 - t1 <= sigma(ell)``, length ``<= chi(ell)`` and
    distance ``>= D`` from ``gamma[t1 + delta(D) .. t1 + ell - delta(D)]``.
    Pairs whose window is empty are counted as degenerate and skipped.
    """
    length_budget = math.floor(chi(ell))
    top = math.floor(sigma(ell))
    lo_off, hi_off = math.ceil(delta(D)), math.floor(ell - delta(D))
    degenerate = 0
    for t1 in range(gamma.length + 1):
        for t2 in range(t1 + ell, min(t1 + top, gamma.length) + 1):
            lo, hi = t1 + lo_off, min(t1 + hi_off, gamma.length)
            if lo > hi:
                degenerate += 1
                continue
            a, b = gamma[t1], gamma[t2]
            region = _ellipse(ball, a, b, length_budget)
            dwin = distances_to(ball, region, gamma.vertices[lo : hi + 1])
            blocked = np.ones(len(ball), dtype=bool)
            blocked[region[dwin >= D]] = False
            got = punctured_distance(ball, a, b, blocked, length_budget, parents=True)
            if got is not None and got[0] <= length_budget:
                return ProbeResult(DiscretePath(ball, tuple(got[1])), t1, t2, degenerate)
    return ProbeResult(None, degenerate_pairs=degenerate)
