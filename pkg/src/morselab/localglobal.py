"""Local-to-global pipeline: segment catalogs, certification, fits and exit points."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .cayley import CayleyBall, parse_letters
from .combing import Combing
from .errors import MarginError, PreconditionError
from .morse import DEFAULT_NODE_BUDGET, Linear, mu_star, weak_morse_test
from .qgpaths import (DiscretePath, GlobalFit, QGParams, as_fraction, distances_to,
                      empirical_global_params, format_fraction, hausdorff, is_quasi_geodesic)

__all__ = [
    "enumerate_qg_paths", "SegmentCatalog", "build_catalog", "Certificate", "certify_path", "empirical_global_params",
    "ExitPointRecord", "exit_point", "check_exit_lemmas", "fit_upper_envelope",
    "qg_stay_delta", "qg_stay_check", "combing_line_proximity", "weak_mltg_check",
]

CATALOG_HEADER = "# morselab-catalog v1"


# ---------------------------------------------------------------------------
# Catalogs


def enumerate_qg_paths(ball: CayleyBall, start: int, max_len: int, params: QGParams,
                       geodesic_only: bool = False) -> list[tuple[int, ...]]:
    """All ``params``-quasi-geodesic edge paths from ``start`` of length ``<= max_len``."""
    A, B, C = params.scaled()
    out = []
    stack = [(start,)]
    while stack:
        verts = stack.pop()
        out.append(verts)
        if len(verts) - 1 == max_len:
            continue
        k = len(verts)
        for w in ball.nbr[verts[-1]]:
            w = int(w)
            if w < 0 or ball.norms[w] > ball.core_radius:
                continue
            d = ball.dist_matrix([w], verts)[0]
            if geodesic_only:
                if d[0] != k:
                    continue
            elif (A * (k - np.arange(k)) > B * d + C).any():
                continue
            stack.append(verts + (w,))
    out.sort(key=lambda p: (len(p), p))
    return out


@dataclass
class SegmentCatalog:
    ball: CayleyBall
    D: int
    local_params: QGParams
    Q: Fraction
    q: Fraction
    mu: Fraction
    keys: frozenset
    exhaustive: bool
    tested: int = 0
    refused: frozenset = frozenset()

    @property
    def by_vertices(self) -> bool:
        return not self.ball.is_group

    def key_of(self, path: DiscretePath):
        return path.vertices if self.by_vertices else tuple(path.letters())

    def __contains__(self, path: DiscretePath) -> bool:
        return self.key_of(path) in self.keys

    def __len__(self):
        return len(self.keys)

    def _key_text(self, key) -> str:
        if self.by_vertices:
            return " ".join(self.ball.label(v) for v in key)
        return " ".join(self.ball.spec.letter_name(l) for l in key) or "-"

    def to_text(self) -> str:
        lines = [
            CATALOG_HEADER,
            f"D={self.D}",
            f"local_params={format_fraction(self.local_params.lam)},{format_fraction(self.local_params.kappa)}",
            f"weak_morse={format_fraction(self.Q)},{format_fraction(self.q)},{format_fraction(self.mu)}",
            f"margin={self.ball.margin}",
            f"exhaustive={str(self.exhaustive).lower()}",
            f"ball_hash={self.ball.digest}",
            f"count={len(self.keys)}",
            f"refused={len(self.refused)}",
            "---",
        ]
        lines.extend(sorted(self._key_text(k) for k in self.keys))
        lines.extend(sorted("! " + self._key_text(k) for k in self.refused))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, ball: CayleyBall, text: str) -> "SegmentCatalog":
        head, sep, body = text.partition("---\n")
        rows = head.splitlines()
        if not sep or not rows or rows[0] != CATALOG_HEADER:
            raise ValueError("not a catalog file")
        meta = dict(r.split("=", 1) for r in rows[1:])
        if meta["ball_hash"] != ball.digest:
            raise ValueError("catalog was built on a different ball")
        lam, kappa = meta["local_params"].split(",")
        Q, q, mu = (as_fraction(x) for x in meta["weak_morse"].split(","))
        keys, refused = set(), set()
        for line in body.splitlines():
            dest = keys
            if line.startswith("! "):
                dest, line = refused, line[2:]
            if ball.is_group:
                dest.add(() if line == "-" else tuple(parse_letters(ball.spec, line)))
            else:
                dest.add(tuple(ball.vertex(v) for v in line.split()))
        if len(keys) != int(meta["count"]) or len(refused) != int(meta.get("refused", 0)):
            raise ValueError("catalog count does not match its body")
        return cls(ball, int(meta["D"]), QGParams(lam, kappa), Q, q, mu, frozenset(keys),
                   meta["exhaustive"] == "true", refused=frozenset(refused))


def build_catalog(ball: CayleyBall, D: int, local_params: QGParams, Q, q, mu,
                  node_budget: int = DEFAULT_NODE_BUDGET, threads: int = 1) -> SegmentCatalog:
    """All ``local_params``-quasi-geodesic segments of length ``<= D`` that pass the
    ``(Q,q,mu)`` weak Morse test for their endpoint pair.

    Group balls enumerate segments from the origin (translation handles the
    rest); fixture graphs enumerate from every vertex of the valid core.
    Fixture segments whose witness region leaves the core are recorded as
    refused rather than judged.
    """
    Q, q, mu = as_fraction(Q), as_fraction(q), as_fraction(mu)
    if ball.is_group:
        starts = [ball.origin]
    else:
        starts = [v for v in range(len(ball)) if ball.norms[v] <= ball.core_radius]
    paths = [p for s in starts for p in enumerate_qg_paths(ball, s, D, local_params)]

    def test(verts):
        path = DiscretePath(ball, verts)
        try:
            return weak_morse_test(ball, path, Q, q, mu, pair=(0, path.length),
                                   node_budget=node_budget)
        except MarginError:
            if ball.is_group:
                raise
            return None

    with ThreadPoolExecutor(max(1, threads)) as pool:
        results = list(pool.map(test, paths))
    keys, refused = set(), set()
    exhaustive = True
    for verts, res in zip(paths, results):
        if res is None:
            refused.add(verts)
            continue
        exhaustive &= res.holds is not None
        if res.holds:
            path = DiscretePath(ball, verts)
            keys.add(verts if not ball.is_group else tuple(path.letters()))
    return SegmentCatalog(ball, D, local_params, Q, q, mu, frozenset(keys), exhaustive, len(paths),
                          frozenset(refused))


# ---------------------------------------------------------------------------
# Certification


@dataclass
class Certificate:
    path: DiscretePath
    windows: list[tuple[int, str]]
    overall: str
    fit: GlobalFit
    hausdorff_to_combing: int | None = None

    @property
    def failing_windows(self) -> list[int]:
        return [i for i, v in self.windows if v == "not-in-catalog"]

    def to_dict(self) -> dict:
        fp = self.fit.params
        return {
            "path": self.path.literal(),
            "start": self.path.ball.label(self.path.start),
            "windows": [{"offset": i, "verdict": v} for i, v in self.windows],
            "overall": self.overall,
            "fitted_params": fp.as_list() if fp else None,
            "required_kappa": self.fit.required_kappa,
            "hausdorff": self.hausdorff_to_combing,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def certify_path(catalog: SegmentCatalog, path: DiscretePath,
                 combing: Combing | None = None, threads: int = 1) -> Certificate:
    """Look up every window of length ``D`` (stride 1) in the catalog."""
    ball = catalog.ball
    if path.ball is not ball:
        raise PreconditionError("path and catalog use different balls")
    n, D = path.length, catalog.D
    offsets = range(max(n - D, 0) + 1)

    def judge(i):
        window = path.sub(i, min(i + D, n))
        if catalog.by_vertices and (max(ball.norms[list(window.vertices)]) > ball.core_radius
                                    or window.vertices in catalog.refused):
            return i, "margin-refused"
        return i, "in-catalog" if window in catalog else "not-in-catalog"

    with ThreadPoolExecutor(max(1, threads)) as pool:
        windows = list(pool.map(judge, offsets))
    verdicts = {v for _, v in windows}
    if "not-in-catalog" in verdicts:
        overall = "not-certified"
    elif "margin-refused" in verdicts or not catalog.exhaustive:
        overall = "conditional"
    else:
        overall = "certified"
    fit = empirical_global_params(path)
    haus = None
    if combing is not None:
        haus = hausdorff(path, combing.line(path.start, path.end)).symmetric
    return Certificate(path, windows, overall, fit, haus)


# ---------------------------------------------------------------------------
# Exit points


@dataclass(frozen=True)
class ExitPointRecord:
    eta: DiscretePath
    gamma: DiscretePath
    D: int
    ell: int
    t: int
    t_e: int
    ties: int = 1
    minimal: bool = True


def _suffix_prefix_min(X: np.ndarray) -> np.ndarray:
    """``M[t, u] = min X[t':, :u+1]`` over ``t' >= t``."""
    P = np.minimum.accumulate(X, axis=1)
    return np.minimum.accumulate(P[::-1], axis=0)[::-1]


def exit_point(eta: DiscretePath, gamma: DiscretePath, D: int, ell: int) -> ExitPointRecord | None:
    """Minimal ``(D, ell)``-exit point of ``(eta, gamma)``; ties broken by least ``t``."""
    if eta.start != gamma.start:
        raise PreconditionError("exit points need a common start vertex")
    if D < 0 or ell < 0:
        raise ValueError("D and ell must be non-negative")
    X = eta.ball.dist_matrix(eta.vertices, gamma.vertices)
    M = _suffix_prefix_min(X)
    T = gamma.length
    for t_e in range(T + 1):
        reach = min(t_e + ell, T)
        ok = (X[:, t_e] <= D) & (M[:, reach] >= D)
        hits = np.flatnonzero(ok)
        if len(hits):
            return ExitPointRecord(eta, gamma, D, ell, int(hits[0]), t_e, len(hits))
    return None


@dataclass(frozen=True)
class ExitLemmaReport:
    violations: tuple[int, ...]
    hausdorff: int

    @property
    def ok(self) -> bool:
        return not self.violations


def check_exit_lemmas(record: ExitPointRecord) -> ExitLemmaReport:
    """For each ``s <= t_e`` some ``s'`` in ``[s, s + ell]`` has ``d(gamma(s'), eta) <= D``."""
    eta, gamma = record.eta, record.gamma
    T = gamma.length
    near = distances_to(gamma.ball, gamma.vertices, eta.vertices) <= record.D
    bad = [s for s in range(record.t_e + 1) if not near[s : min(s + record.ell, T) + 1].any()]
    haus = hausdorff(gamma.sub(0, record.t_e), eta.sub(0, record.t)).symmetric
    return ExitLemmaReport(tuple(bad), haus)


def fit_upper_envelope(xs: Sequence, ys: Sequence) -> Linear:
    """Least-squares line through the per-``x`` maxima, raised to dominate every point."""
    if not len(xs):
        return Linear(0, 0)
    top: dict[Fraction, Fraction] = {}
    for x, y in zip(xs, ys):
        x, y = as_fraction(x), as_fraction(y)
        top[x] = max(top.get(x, y), y)
    px, py = list(top), [top[x] for x in top]
    n = len(px)
    mx, my = sum(px) / n, sum(py) / n
    var = sum((x - mx) ** 2 for x in px)
    slope = sum((x - mx) * (y - my) for x, y in zip(px, py)) / var if var else Fraction(0)
    intercept = my - slope * mx
    lift = max(as_fraction(y) - (slope * as_fraction(x) + intercept) for x, y in zip(xs, ys))
    return Linear(slope, intercept + max(lift, Fraction(0)))


# ---------------------------------------------------------------------------
# Quasi-geodesics stay


def qg_stay_delta(params: QGParams, D) -> Fraction:
    """Window half-width guaranteed for edge-path quasi-geodesics.

    With ``E = (2D+1) + lam(2D+1) + lam kappa`` and ``eps = lam E + lam kappa``,
    ``delta(D) = lam (eps + 2D + 1) + lam kappa``.  The ``+1`` terms absorb the
    unit jumps of edge paths where the continuous argument uses continuity.
    """
    D = as_fraction(D)
    lam, kappa = params.lam, params.kappa
    E = (2 * D + 1) + lam * (2 * D + 1) + lam * kappa
    eps = lam * E + lam * kappa
    return lam * (eps + 2 * D + 1) + lam * kappa


@dataclass(frozen=True)
class QGStayReport:
    delta_hat: int
    delta_bound: Fraction

    @property
    def ok(self) -> bool:
        return self.delta_hat <= self.delta_bound


def qg_stay_check(gamma1: DiscretePath, gamma2: DiscretePath, matches: tuple[int, int, int, int],
                  D: int, params: QGParams) -> QGStayReport:
    """Least ``w`` such that ``gamma1(t)`` is ``D``-far from ``gamma2[t2..s2]`` off ``[t1-w, s1+w]``."""
    t1, s1, t2, s2 = matches
    ball = gamma1.ball
    if not (0 <= t1 <= s1 <= gamma1.length and 0 <= t2 <= s2 <= gamma2.length):
        raise PreconditionError("matched indices out of order or out of range")
    for g in (gamma1, gamma2):
        if not is_quasi_geodesic(g, params):
            raise PreconditionError(f"path is not a {params} quasi-geodesic")
    if distances_to(ball, gamma2.vertices, gamma1.vertices).max() > D:
        raise PreconditionError("gamma2 is not inside the D-neighbourhood of gamma1")
    if ball.distance(gamma1[t1], gamma2[t2]) > D or ball.distance(gamma1[s1], gamma2[s2]) > D:
        raise PreconditionError("matched points are more than D apart")
    close = distances_to(ball, gamma1.vertices, gamma2.vertices[t2 : s2 + 1]) <= D
    hat = 0
    for t in np.flatnonzero(close):
        t = int(t)
        if t < t1:
            hat = max(hat, t1 - t)
        elif t > s1:
            hat = max(hat, t - s1)
    return QGStayReport(hat, qg_stay_delta(params, D))


# ---------------------------------------------------------------------------
# Combing lines


@dataclass(frozen=True)
class ProximityReport:
    one_sided: int
    symmetric: int


def combing_line_proximity(ball: CayleyBall, combing: Combing, path: DiscretePath,
                           catalog: SegmentCatalog | None = None) -> ProximityReport:
    """Distance from ``path`` to the combing line between its endpoints."""
    if catalog is not None and certify_path(catalog, path).overall != "certified":
        raise PreconditionError("path is not certified against the supplied catalog")
    h = hausdorff(path, combing.line(path.start, path.end))
    return ProximityReport(h.one_sided_ab, h.symmetric)


# ---------------------------------------------------------------------------
# Local weak Morse segments are globally weakly Morse (desk form)


@dataclass
class WeakMLTGReport:
    max_len: int
    scale: int
    Q: Fraction
    q: Fraction
    gauge: int
    N: int
    segments: int
    locally_morse: int
    violations: list = field(default_factory=list)
    exhaustive: bool = True


def weak_mltg_check(ball: CayleyBall, max_len: int, scale: int, Q, q,
                    node_budget: int = DEFAULT_NODE_BUDGET) -> WeakMLTGReport:
    """Exhaustive check over all geodesic segments of length ``<= max_len``.

    Each origin-based geodesic word gets its exact endpoint-pair excursion
    ``e(w)``.  The local gauge is the worst ``e`` over words of length
    ``<= scale``; ``N`` the worst over all words.  A segment is ``(Q,q,mu)``
    weakly Morse iff every subword has ``e <= mu``, since subpaths of a
    segment are translates of shorter words.
    """
    Q, q = as_fraction(Q), as_fraction(q)
    words = enumerate_qg_paths(ball, ball.origin, max_len, QGParams(1, 0), geodesic_only=True)
    exc: dict[tuple[int, ...], int] = {}
    exhaustive = True
    for verts in words:
        path = DiscretePath(ball, verts)
        r = mu_star(ball, path, Q, q, node_budget, pairs=[(0, path.length)])
        exhaustive &= r.exhaustive
        exc[tuple(path.letters())] = r.value
    gauge = max(v for k, v in exc.items() if len(k) <= scale)
    N = max(exc.values())

    def worst(word, upto):
        return max(exc[word[i:j]] for i in range(len(word) + 1)
                   for j in range(i, min(len(word), i + upto) + 1))

    local = 0
    bad = []
    for word in exc:
        if worst(word, scale) <= gauge:
            local += 1
            if worst(word, len(word)) > N:
                bad.append(word)
    return WeakMLTGReport(max_len, scale, Q, q, gauge, N, len(exc), local, bad, exhaustive)
