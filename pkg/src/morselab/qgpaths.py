"""Unit-speed edge paths, quasi-geodesic predicates and constant calculators.

A path is a sequence of ball vertices ``v_0 .. v_n`` with consecutive
vertices adjacent; vertex ``v_i`` sits at time ``i``.  A path is a
``(lam, kappa)``-quasi-geodesic when for all ``i < j``

    (j - i) / lam - kappa <= d(v_i, v_j) <= lam * (j - i) + kappa.

Everything here is exact: parameters are :class:`fractions.Fraction` and the
lower inequality is checked in the integer form
``den(lam)*den(kappa)*(j-i) <= num(lam)*den(kappa)*d + num(lam)*num(kappa)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .cayley import CayleyBall, parse_letters
from .errors import MarginError, PathError, PreconditionError

Rational = Fraction


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, ``"3/2"`` string or decimal float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Paths


@dataclass(frozen=True, eq=False)
class DiscretePath:
    ball: CayleyBall
    vertices: tuple[int, ...]
    allow_stays: bool = False

    def __post_init__(self):
        verts = tuple(int(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if not verts:
            raise PathError("a path needs at least one vertex")
        n = len(self.ball)
        for v in verts:
            if not 0 <= v < n:
                raise PathError(f"vertex index {v} is not in the ball")
        for u, v in zip(verts, verts[1:]):
            if u == v:
                if not self.allow_stays:
                    raise PathError("constant steps are disabled for this path")
            elif v not in self.ball.nbr[u]:
                raise PathError(
                    f"{self.ball.label(u)!r} and {self.ball.label(v)!r} are not adjacent"
                )
        self.ball.check_vertices(verts, "path")

    def __repr__(self):
        return f"DiscretePath({self.literal()!r}, start={self.ball.label(self.start)!r})"

    def __len__(self) -> int:
        return len(self.vertices) - 1

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def __getitem__(self, i: int) -> int:
        return self.vertices[i]

    def __eq__(self, other):
        return (isinstance(other, DiscretePath) and other.ball is self.ball
                and other.vertices == self.vertices)

    def __hash__(self):
        return hash(self.vertices)

    def sub(self, i: int, j: int) -> "DiscretePath":
        """Subpath on the closed index range ``[i, j]``."""
        if not 0 <= i <= j <= self.length:
            raise PathError(f"bad subpath range [{i}, {j}] for path of length {self.length}")
        return DiscretePath(self.ball, self.vertices[i : j + 1], self.allow_stays)

    def reversed(self) -> "DiscretePath":
        return DiscretePath(self.ball, self.vertices[::-1], self.allow_stays)

    def concat(self, other: "DiscretePath") -> "DiscretePath":
        if self.end != other.start:
            raise PathError("paths do not meet")
        return DiscretePath(self.ball, self.vertices + other.vertices[1:],
                            self.allow_stays or other.allow_stays)

    def letters(self) -> list[int]:
        return [self.ball.letter_between(u, v) for u, v in zip(self.vertices, self.vertices[1:])]

    def literal(self) -> str:
        """Path literal: generator tokens for groups, vertex ids for fixtures."""
        if not self.ball.is_group:
            return " ".join(self.ball.label(v) for v in self.vertices)
        return " ".join(self.ball.spec.letter_name(l) for l in self.letters())

    @cached_property
    def dist(self) -> np.ndarray:
        """Pairwise distances between the path's vertices."""
        return self.ball.dist_matrix(self.vertices, self.vertices)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(frozenset(e) for e in zip(self.vertices, self.vertices[1:]) if e[0] != e[1])


def path_from_letters(ball: CayleyBall, letters: Sequence[int], start: int = 0) -> DiscretePath:
    verts = [start]
    v = start
    for l in letters:
        v = int(ball.nbr[v, l])
        if v < 0:
            raise MarginError("path leaves the ball")
        verts.append(v)
    return DiscretePath(ball, tuple(verts))


def translate_to_origin(ball: CayleyBall, path: DiscretePath) -> DiscretePath:
    """Left-translate ``path`` so that it starts at the identity.

    Only meaningful in a group; raises :class:`MarginError` if the translate
    leaves the ball's valid core.
    """
    if path.ball is not ball:
        raise PreconditionError("path lives in a different ball")
    if not ball.is_group:
        raise PreconditionError("translation needs a Cayley graph of a group")
    out = path_from_letters(ball, path.letters(), ball.origin)
    ball.check_vertices(out.vertices, "translated path")
    return out


def path_from_literal(ball: CayleyBall, text: str, start: int | str = 0) -> DiscretePath:
    """Parse a path literal (see :meth:`DiscretePath.literal`)."""
    if isinstance(start, str):
        start = ball.vertex(start)
    tokens = text.split()
    if not ball.is_group and tokens and all(t in ball._label_index for t in tokens):
        return DiscretePath(ball, tuple(ball.vertex(t) for t in tokens))
    return path_from_letters(ball, parse_letters(ball.spec, text), start)


def path_from_vertices(ball: CayleyBall, vertices: Iterable) -> DiscretePath:
    return DiscretePath(ball, tuple(ball.vertex(v) if isinstance(v, str) else int(v)
                                    for v in vertices))


# ---------------------------------------------------------------------------
# Parameters and predicates


@dataclass(frozen=True)
class QGParams:
    lam: Fraction
    kappa: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "lam", as_fraction(self.lam))
        object.__setattr__(self, "kappa", as_fraction(self.kappa))
        if self.lam < 1:
            raise ValueError("lambda must be at least 1")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")

    def scaled(self) -> tuple[int, int, int]:
        """Integers ``(A, B, C)`` with: lower inequality iff ``A*(j-i) <= B*d + C``."""
        a, b = self.lam.numerator, self.lam.denominator
        c, e = self.kappa.numerator, self.kappa.denominator
        return b * e, a * e, a * c

    def max_span(self, d: int) -> int:
        """Longest domain a quasi-geodesic can have between points at distance ``d``."""
        A, B, C = self.scaled()
        return (B * d + C) // A

    def as_list(self) -> list[str]:
        return [format_fraction(self.lam), format_fraction(self.kappa)]

    def __str__(self):
        return f"({format_fraction(self.lam)},{format_fraction(self.kappa)})"


@dataclass(frozen=True)
class QGCheck:
    ok: bool
    pair: tuple[int, int] | None = None

    def __bool__(self):
        return self.ok


def _span_grid(n):
    i, j = np.triu_indices(n, 1)
    return i, j, (j - i).astype(np.int64)


def _first(i, j, bad) -> tuple[int, int] | None:
    hits = np.flatnonzero(bad)
    if len(hits) == 0:
        return None
    k = hits[0]
    return int(i[k]), int(j[k])


def qg_violations(path: DiscretePath, params: QGParams):
    """Boolean mask of violating pairs over ``np.triu_indices`` order."""
    n = len(path.vertices)
    i, j, span = _span_grid(n)
    d = path.dist[i, j]
    A, B, C = params.scaled()
    a, b = params.lam.numerator, params.lam.denominator
    c, e = params.kappa.numerator, params.kappa.denominator
    if max(A, B, C, a * e, b * c) * (n + 1) > 2**60:
        raise OverflowError("quasi-geodesic parameters are too large for exact checking")
    lower = A * span > B * d + C
    upper = b * e * d > a * e * span + b * c
    return i, j, lower | upper


def is_quasi_geodesic(path: DiscretePath, params: QGParams) -> QGCheck:
    """Exact check; on failure reports the lexicographically first bad ``(i, j)``."""
    if path.length == 0:
        return QGCheck(True)
    i, j, bad = qg_violations(path, params)
    pair = _first(i, j, bad)
    return QGCheck(pair is None, pair)


def local_qg_scale(path: DiscretePath, params: QGParams) -> int:
    """Largest ``L`` such that every subpath of domain length ``<= L`` is a QG."""
    if path.length == 0:
        return 0
    i, j, bad = qg_violations(path, params)
    if not bad.any():
        return path.length
    return int((j - i)[bad].min()) - 1


# ---------------------------------------------------------------------------
# Closed-form constants


@dataclass(frozen=True)
class ImprovementConstants:
    kappa_prime: Fraction
    k1: Fraction
    k2: Fraction


def improvement_constants(params: QGParams) -> ImprovementConstants:
    lam, kappa = params.lam, params.kappa
    kp = 2 * (lam + kappa)
    return ImprovementConstants(kp, lam * (lam + kappa), (lam * kp + 3) * (lam + kappa))


def is_tame(path: DiscretePath, constants: ImprovementConstants) -> QGCheck:
    """Every subpath has length at most ``k1 * d(endpoints) + k2``."""
    if path.length == 0:
        return QGCheck(True)
    n = len(path.vertices)
    i, j, span = _span_grid(n)
    d = path.dist[i, j]
    k1, k2 = constants.k1, constants.k2
    den = k1.denominator * k2.denominator
    bad = span * den > d * (k1.numerator * k2.denominator) + k2.numerator * k1.denominator
    pair = _first(i, j, bad)
    return QGCheck(pair is None, pair)


def reverse_inclusion_bound(params: QGParams, mu) -> Fraction:
    """Radius ``(1 + 2 lam^2) mu + lam kappa + kappa`` of the reverse inclusion."""
    mu = as_fraction(mu)
    lam, kappa = params.lam, params.kappa
    return (1 + 2 * lam * lam) * mu + lam * kappa + kappa


def concat_lambda(params: QGParams, theta) -> Fraction:
    """Multiplicative constant for appending two short geodesics at ratio ``theta``."""
    theta = as_fraction(theta)
    if not 0 <= theta < Fraction(1, 2):
        raise ValueError("theta must lie in [0, 1/2)")
    lam = params.lam
    return max((lam + 1) / (1 - 2 * theta), 2 * lam + 1)


# ---------------------------------------------------------------------------
# Neighbourhoods


@dataclass(frozen=True)
class HausdorffDistances:
    one_sided_ab: int
    one_sided_ba: int

    @property
    def symmetric(self) -> int:
        return max(self.one_sided_ab, self.one_sided_ba)


def distances_to(ball: CayleyBall, points: Sequence[int], target: Sequence[int]) -> np.ndarray:
    """``d(p, target)`` for each point, with ``target`` a vertex set."""
    return ball.dist_matrix(list(points), list(dict.fromkeys(target))).min(axis=1)


def hausdorff(path_a: DiscretePath, path_b: DiscretePath) -> HausdorffDistances:
    """Vertex-set Hausdorff distances; ``one_sided_ab`` is ``sup_{x in A} d(x, B)``."""
    if path_a.ball is not path_b.ball:
        raise PathError("paths live in different balls")
    m = path_a.ball.dist_matrix(path_a.vertices, path_b.vertices)
    return HausdorffDistances(int(m.min(axis=1).max()), int(m.min(axis=0).max()))


def continuous_excess(p1: DiscretePath, p2: DiscretePath) -> Fraction:
    """Smallest ``mu`` with the metric-graph image of ``p1`` inside ``N_mu(p2)``.

    Points interior to an edge of ``p1`` count too: an edge ``uv`` not used by
    ``p2`` has its worst point at distance ``(1 + d(u, p2) + d(v, p2)) / 2``.
    """
    dv = distances_to(p1.ball, p1.vertices, p2.vertices)
    worst = Fraction(int(dv.max()))
    for k, (u, v) in enumerate(zip(p1.vertices, p1.vertices[1:])):
        if u == v or frozenset((u, v)) in p2.edge_set:
            continue
        worst = max(worst, Fraction(1 + int(dv[k]) + int(dv[k + 1]), 2))
    return worst


# ---------------------------------------------------------------------------
# Global fits


LAMBDA_MAX = Fraction(4)
KAPPA_MAX = 4
LATTICE_DENOMINATOR = 12


@dataclass(frozen=True)
class GlobalFit:
    params: QGParams | None
    required_kappa: int | None = None

    @property
    def fits(self) -> bool:
        return self.params is not None


def lattice_ceiling(x: Fraction, max_den: int = LATTICE_DENOMINATOR) -> Fraction:
    """Least rational with denominator ``<= max_den`` that is ``>= x``."""
    return min(Fraction(math.ceil(x * q), q) for q in range(1, max_den + 1))


def _max_span_by_distance(path: DiscretePath) -> dict[int, int]:
    n = len(path.vertices)
    i, j, span = _span_grid(n)
    d = path.dist[i, j]
    out: dict[int, int] = {}
    for dv in np.unique(d):
        out[int(dv)] = int(span[d == dv].max())
    return out


def empirical_global_params(path: DiscretePath, lam_max=LAMBDA_MAX, kappa_max: int = KAPPA_MAX,
                            max_den: int = LATTICE_DENOMINATOR) -> GlobalFit:
    """Smallest ``kappa`` in ``0..kappa_max``, then least lattice ``lambda <= lam_max``."""
    lam_max = as_fraction(lam_max)
    if path.length == 0:
        return GlobalFit(QGParams(1, 0))
    spans = _max_span_by_distance(path)
    for kappa in range(kappa_max + 1):
        if spans.get(0) and kappa == 0:
            continue
        ratio = max(Fraction(s, d + kappa) for d, s in spans.items())
        lam = lattice_ceiling(max(ratio, Fraction(1)), max_den)
        if lam <= lam_max:
            return GlobalFit(QGParams(lam, kappa))
    needed = max(Fraction(s) / lam_max - d for d, s in spans.items())
    return GlobalFit(None, max(0, math.ceil(needed)))


@dataclass(frozen=True)
class NearQGReport:
    fit: GlobalFit
    scale: int
    r: Fraction

    @property
    def globally_qg(self) -> bool:
        return self.fit.fits


def check_local_qg_near_qg(path: DiscretePath, gamma: DiscretePath, r, local_params: QGParams,
                           scale: int, lam_max=LAMBDA_MAX, kappa_max: int = KAPPA_MAX) -> NearQGReport:
    """Verify the hypotheses, then fit global constants for ``path``."""
    r = as_fraction(r)
    if continuous_excess(path, gamma) > r:
        raise PreconditionError(f"path is not inside the {r}-neighbourhood of gamma")
    if local_qg_scale(path, local_params) < min(scale, path.length):
        raise PreconditionError(f"path is not {scale}-locally a {local_params} quasi-geodesic")
    fit = empirical_global_params(path, lam_max, kappa_max)
    return NearQGReport(fit, scale, r)
