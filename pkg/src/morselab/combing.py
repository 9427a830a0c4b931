"""Combings: a chosen line for every ordered pair of vertices, and boundedness.

Lines are extended by constants past their end, so ``line(t)`` is defined
for every integer ``t >= 0``.  A combing with constant ``kappa0`` is bounded
on a scope when ``d(q_{x y1}(t), q_{x y2}(t)) <= kappa0 * (d(y1, y2) + 1)``
for every ``x, y1, y2`` in the scope and every ``t``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .cayley import CayleyBall, geodesic
from .errors import MarginError, PathError, UnsupportedKind
from .qgpaths import DiscretePath, QGParams, is_quasi_geodesic


class Combing:
    """Immutable assignment ``(x, y) -> line``; lines are memoized thread-safely."""

    def __init__(self, ball: CayleyBall, line_fn: Callable[[int, int], tuple[int, ...]],
                 declared: QGParams, kind: str, equivariant: bool = False):
        self.ball = ball
        self._line_fn = line_fn
        self.declared = declared
        self.kind = kind
        self.equivariant = equivariant
        self._cache: dict[tuple[int, int], tuple[int, ...]] = {}
        self._lock = threading.Lock()

    def vertices(self, x: int, y: int) -> tuple[int, ...]:
        key = (int(x), int(y))
        with self._lock:
            got = self._cache.get(key)
        if got is None:
            got = tuple(self._line_fn(*key))
            with self._lock:
                self._cache.setdefault(key, got)
        return got

    def line(self, x: int, y: int) -> DiscretePath:
        return DiscretePath(self.ball, self.vertices(x, y))


def shortlex_combing(ball: CayleyBall) -> Combing:
    """Lines are shortlex-least geodesic words; declared constants ``(1, 0)``."""
    if not ball.is_group:
        raise UnsupportedKind("fixture graphs need an explicit combing table")

    def line(x, y):
        if x == ball.origin:
            return _origin_line(ball, y)
        return tuple(geodesic(ball, x, y))

    return Combing(ball, line, QGParams(1, 0), "shortlex", equivariant=True)


def _origin_line(ball, y):
    # ball words are the shortlex-least geodesic words of their elements
    out = [ball.origin]
    v = ball.origin
    for l in ball.words[y]:
        v = int(ball.nbr[v, l])
        out.append(v)
    return tuple(out)


def constant_extension(line: DiscretePath | tuple, t: int):
    """Vertex of ``line`` at time ``t``, frozen at the end vertex afterwards."""
    if t < 0:
        raise ValueError("time must be non-negative")
    verts = line.vertices if isinstance(line, DiscretePath) else line
    return verts[min(t, len(verts) - 1)]


def load_combing_table(ball: CayleyBall, text: str, declared: QGParams,
                       kind: str = "fixture") -> Combing:
    """Parse ``x y : v0 v1 ... vk`` lines (canonical labels) into a combing."""
    table: dict[tuple[int, int], tuple[int, ...]] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, body = line.partition(":")
        ends = head.split()
        if not sep or len(ends) != 2:
            raise ValueError(f"line {n}: expected 'x y : v0 ... vk'")
        x, y = (ball.vertex(e) for e in ends)
        verts = tuple(ball.vertex(v) for v in body.split())
        if not verts or verts[0] != x or verts[-1] != y:
            raise ValueError(f"line {n}: line does not run from {ends[0]} to {ends[1]}")
        try:
            DiscretePath(ball, verts)
        except PathError as err:
            raise ValueError(f"line {n}: {err}") from None
        if (x, y) in table:
            raise ValueError(f"line {n}: duplicate pair {ends[0]} {ends[1]}")
        table[(x, y)] = verts

    def lookup(x, y):
        if x == y and (x, y) not in table:
            return (x,)
        try:
            return table[(x, y)]
        except KeyError:
            raise KeyError(f"no combing line for ({ball.label(x)}, {ball.label(y)})") from None

    return Combing(ball, lookup, declared, kind)


@dataclass(frozen=True)
class BoundednessReport:
    kappa0_hat: int
    scope: str
    radius_cap: int
    exhaustive: bool
    pairs_tested: int
    worst: tuple[int, int, int] | None = None


def _line_matrix(combing: Combing, x: int, ys: np.ndarray, width: int) -> np.ndarray:
    out = np.empty((len(ys), width), dtype=np.int64)
    for k, y in enumerate(ys):
        verts = combing.vertices(x, int(y))
        if len(verts) > width:
            raise MarginError("combing line is longer than the scope allows")
        out[k, : len(verts)] = verts
        out[k, len(verts):] = verts[-1]
    return out


def _kappa_from(combing, x, ys, width):
    ball = combing.ball
    P = _line_matrix(combing, x, ys, width)
    worst = np.zeros((len(ys), len(ys)), dtype=np.int64)
    for t in range(width):
        np.maximum(worst, ball.dist_matrix(P[:, t], P[:, t]), out=worst)
    dy = ball.dist_matrix(ys, ys)
    need = -(-worst // (dy + 1))  # ceil
    k = int(need.max()) if len(ys) else 0
    where = None
    if len(ys):
        i, j = np.unravel_index(int(need.argmax()), need.shape)
        where = (int(x), int(ys[i]), int(ys[j]))
    return k, where


def boundedness_estimate(combing: Combing, scope: str = "basepoint-only",
                         radius_cap: int | None = None) -> BoundednessReport:
    """Least integer ``kappa0`` over the scope, using constant extensions.

    ``basepoint-only`` tests ``x = origin`` and ``|y1|, |y2| <= radius_cap``;
    ``all-pairs`` also ranges ``x`` over the same set.
    """
    ball = combing.ball
    cap = ball.core_radius if radius_cap is None else radius_cap
    if scope == "basepoint-only":
        ball.check_fits(cap, "combing scope")
        xs = [ball.origin]
    elif scope == "all-pairs":
        ball.check_fits(2 * cap, "combing scope")
        xs = None
    else:
        raise ValueError(f"unknown scope {scope!r}")
    ys = np.arange(ball.sphere_offsets[cap + 1])
    if xs is None:
        xs = [int(v) for v in ys]
    width = max(
        (max(len(combing.vertices(x, int(y))) for y in ys) for x in xs), default=1)
    best, where = 0, None
    for x in xs:
        k, w = _kappa_from(combing, x, ys, width)
        if k > best:
            best, where = k, w
    return BoundednessReport(best, scope, cap, True, len(xs) * len(ys) ** 2, where)


@dataclass(frozen=True)
class CombingCheck:
    ok: bool
    failure: tuple[int, int] | None = None
    pair: tuple[int, int] | None = None

    def __bool__(self):
        return self.ok


def verify_combing_qg(combing: Combing, pairs: Iterable[tuple[int, int]]) -> CombingCheck:
    """Every sampled line runs from ``x`` to ``y`` and is a declared quasi-geodesic."""
    for x, y in pairs:
        line = combing.line(x, y)
        if line.start != x or line.end != y:
            return CombingCheck(False, (x, y), None)
        got = is_quasi_geodesic(line, combing.declared)
        if not got:
            return CombingCheck(False, (x, y), got.pair)
    return CombingCheck(True)


def translate_line(ball: CayleyBall, g: int, verts: tuple[int, ...]) -> tuple[int, ...] | None:
    """Left translate of a vertex sequence by the element at ``g`` (None if it leaves the ball)."""
    out = []
    for v in verts:
        w = ball.walk(g, ball.words[v])
        if w is None:
            return None
        out.append(w)
    return tuple(out)


def check_equivariance(combing: Combing, samples: Iterable[tuple[int, int, int]]) -> bool:
    """``line(gx, gy) == g . line(x, y)`` for each ``(g, x, y)`` that stays in the ball."""
    ball = combing.ball
    for g, x, y in samples:
        moved = translate_line(ball, g, combing.vertices(x, y))
        if moved is None:
            continue
        gx, gy = moved[0], moved[-1]
        if max(ball.norms[list(moved)]) > ball.core_radius:
            continue
        if combing.vertices(gx, gy) != moved:
            return False
    return True
