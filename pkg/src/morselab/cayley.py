"""Finite balls in Cayley graphs and fixture graphs.

Vertices are integer indices into a :class:`CayleyBall`; index 0 is the
origin and indices are ordered by (distance from origin, shortlex word).
Letters are integers: generator ``i`` is letter ``2*i`` and its inverse is
letter ``2*i + 1`` (so ``letter ^ 1`` inverts).  The letter order is also the
shortlex order, e.g. ``a < a^-1 < b < b^-1``.

Distances are exact distances in the whole group (computed from normal
forms), or in the whole fixture graph.  The ball only has to contain the
vertices a computation visits; callers declare how far out they need to go
via :meth:`CayleyBall.check_fits`.
"""
from __future__ import annotations

import hashlib
import json
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BallBudgetError, MarginError, PathError, UnsupportedKind

GROUP_KINDS = ("free", "abelian", "product", "freeproduct")
ALL_KINDS = GROUP_KINDS + ("graph",)
BALL_FORMAT = "morselab-ball/v1"
DEFAULT_VERTEX_BUDGET = 3_000_000

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


# ---------------------------------------------------------------------------
# Group specifications


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    generators: tuple[str, ...] = ()
    factors: tuple["GroupSpec", ...] = ()
    cycles: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise UnsupportedKind(f"unsupported group kind {self.kind!r}")
        if self.kind in ("product", "freeproduct"):
            if not self.factors:
                raise ValueError(f"{self.kind} needs at least one factor")
            gens = tuple(g for f in self.factors for g in f.generators)
            if any(f.kind == "graph" for f in self.factors):
                raise UnsupportedKind("graph fixtures cannot be used as factors")
            if self.generators and tuple(self.generators) != gens:
                raise ValueError("generators must be the concatenation of factor generators")
            object.__setattr__(self, "generators", gens)
        if self.kind == "graph":
            if not self.cycles:
                raise ValueError("graph fixture needs at least one cycle")
            if any(c < 3 for c in self.cycles):
                raise ValueError("cycle lengths must be at least 3")
            if not self.generators:
                object.__setattr__(
                    self, "generators", tuple(f"x{k}" for k in range(len(self.cycles)))
                )
            if len(self.generators) != len(self.cycles):
                raise ValueError("graph fixture needs one generator per cycle")
        if not self.generators:
            raise ValueError("at least one generator is required")
        for g in self.generators:
            if not _NAME_RE.match(g):
                raise ValueError(f"bad generator name {g!r}")
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generator names must be distinct")

    # convenience constructors
    @classmethod
    def free(cls, *gens: str) -> "GroupSpec":
        return cls("free", tuple(gens))

    @classmethod
    def abelian(cls, *gens: str) -> "GroupSpec":
        return cls("abelian", tuple(gens))

    @classmethod
    def product(cls, *factors: "GroupSpec") -> "GroupSpec":
        return cls("product", factors=tuple(factors))

    @classmethod
    def freeproduct(cls, *factors: "GroupSpec") -> "GroupSpec":
        return cls("freeproduct", factors=tuple(factors))

    @classmethod
    def wedge(cls, *cycles: int, generators: Sequence[str] = ()) -> "GroupSpec":
        return cls("graph", tuple(generators), cycles=tuple(int(c) for c in cycles))

    @property
    def is_group(self) -> bool:
        return self.kind != "graph"

    @property
    def n_letters(self) -> int:
        return 2 * len(self.generators)

    def letter_name(self, letter: int) -> str:
        name = self.generators[letter >> 1]
        return name + "^-1" if letter & 1 else name

    def to_expr(self) -> str:
        if self.kind in ("free", "abelian"):
            return f"{self.kind}({','.join(self.generators)})"
        if self.kind == "graph":
            return f"graph({','.join(map(str, self.cycles))})"
        return f"{self.kind}({','.join(f.to_expr() for f in self.factors)})"

    def to_text(self) -> str:
        """Canonical group-spec file contents."""
        lines = [f"kind={self.kind}", f"generators={','.join(self.generators)}"]
        if self.factors:
            lines.append(f"factors=[{','.join(f.to_expr() for f in self.factors)}]")
        if self.cycles:
            lines.append(f"cycles=[{','.join(map(str, self.cycles))}]")
        return "\n".join(lines) + "\n"


def parse_group_expr(text: str) -> GroupSpec:
    """Parse ``free(a,b)``, ``product(free(a,b),abelian(c))``, ``graph(6,8)``."""
    tokens = re.findall(r"[A-Za-z_][A-Za-z0-9_]*|\d+|[(),]", text)
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise ValueError(f"cannot parse group expression {text!r}")
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            raise ValueError(f"expected {tok!r} in group expression {text!r}")
        pos += 1

    def node() -> GroupSpec:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"truncated group expression {text!r}")
        kind = tokens[pos]
        pos += 1
        if kind == "wedge":
            kind = "graph"
        if kind not in ALL_KINDS:
            raise UnsupportedKind(f"unsupported group kind {kind!r}")
        expect("(")
        args = []
        while True:
            if kind in ("product", "freeproduct"):
                args.append(node())
            else:
                args.append(tokens[pos])
                pos += 1
            if tokens[pos] == ",":
                pos += 1
                continue
            expect(")")
            break
        if kind in ("product", "freeproduct"):
            return GroupSpec(kind, factors=tuple(args))
        if kind == "graph":
            return GroupSpec.wedge(*(int(a) for a in args))
        return GroupSpec(kind, tuple(args))

    spec = node()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in group expression {text!r}")
    return spec


def parse_group_spec(text: str) -> GroupSpec:
    """Parse the line-oriented group-spec file format (see README)."""
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed group spec line {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in fields:
            raise ValueError(f"duplicate key {key!r} in group spec")
        fields[key] = value
    unknown = set(fields) - {"kind", "generators", "factors", "cycles"}
    if unknown:
        raise ValueError(f"unknown group spec keys: {sorted(unknown)}")
    if "kind" not in fields:
        raise ValueError("group spec needs kind=")
    kind = fields["kind"]
    gens = tuple(g.strip() for g in fields.get("generators", "").split(",") if g.strip())
    if kind in ("product", "freeproduct"):
        body = fields.get("factors", "").strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError("factors must be a bracketed list")
        inner = parse_group_expr(f"{kind}({body[1:-1]})")
        return GroupSpec(kind, gens, factors=inner.factors)
    if kind == "graph":
        body = fields.get("cycles", "").strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError("graph fixture needs cycles=[...]")
        cycles = tuple(int(c) for c in body[1:-1].split(",") if c.strip())
        return GroupSpec("graph", gens, cycles=cycles)
    return GroupSpec(kind, gens)


# ---------------------------------------------------------------------------
# Normal forms


class _Free:
    is_tree = True

    def __init__(self, rank):
        self.n_letters = 2 * rank
        self.identity = ()

    def mul_letter(self, x, letter):
        if x and x[-1] == letter ^ 1:
            return x[:-1]
        return x + (letter,)

    def inverse(self, x):
        return tuple(l ^ 1 for l in reversed(x))

    def mul(self, x, y):
        k = 0
        while k < len(x) and k < len(y) and x[-1 - k] == y[k] ^ 1:
            k += 1
        return x[: len(x) - k] + y[k:]

    def length(self, x):
        return len(x)

    def distance(self, x, y):
        k = 0
        for a, b in zip(x, y):
            if a != b:
                break
            k += 1
        return len(x) + len(y) - 2 * k


class _Abelian:
    def __init__(self, rank):
        self.rank = rank
        self.n_letters = 2 * rank
        self.identity = (0,) * rank
        self.is_tree = rank == 1

    def mul_letter(self, x, letter):
        i = letter >> 1
        return x[:i] + (x[i] + (-1 if letter & 1 else 1),) + x[i + 1 :]

    def inverse(self, x):
        return tuple(-c for c in x)

    def mul(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def length(self, x):
        return sum(abs(c) for c in x)

    def distance(self, x, y):
        return sum(abs(a - b) for a, b in zip(x, y))


class _Product:
    is_tree = False

    def __init__(self, factors):
        self.factors = factors
        self.n_letters = sum(f.n_letters for f in factors)
        self.identity = tuple(f.identity for f in factors)
        self._route = []
        for i, f in enumerate(factors):
            self._route.extend((i, l) for l in range(f.n_letters))

    def mul_letter(self, x, letter):
        i, l = self._route[letter]
        return x[:i] + (self.factors[i].mul_letter(x[i], l),) + x[i + 1 :]

    def inverse(self, x):
        return tuple(f.inverse(c) for f, c in zip(self.factors, x))

    def mul(self, x, y):
        return tuple(f.mul(a, b) for f, a, b in zip(self.factors, x, y))

    def length(self, x):
        return sum(f.length(c) for f, c in zip(self.factors, x))

    def distance(self, x, y):
        return sum(f.distance(a, b) for f, a, b in zip(self.factors, x, y))


class _FreeProduct:
    """Elements are tuples of syllables ``(factor, non-trivial factor element)``."""

    def __init__(self, factors):
        self.factors = factors
        self.n_letters = sum(f.n_letters for f in factors)
        self.identity = ()
        self.is_tree = all(f.is_tree for f in factors)
        self._route = []
        for i, f in enumerate(factors):
            self._route.extend((i, l) for l in range(f.n_letters))

    def _push(self, syllables, i, e):
        f = self.factors[i]
        if syllables and syllables[-1][0] == i:
            merged = f.mul(syllables[-1][1], e)
            syllables.pop()
            if merged != f.identity:
                syllables.append((i, merged))
        elif e != f.identity:
            syllables.append((i, e))

    def mul_letter(self, x, letter):
        i, l = self._route[letter]
        out = list(x)
        self._push(out, i, self.factors[i].mul_letter(self.factors[i].identity, l))
        return tuple(out)

    def inverse(self, x):
        return tuple((i, self.factors[i].inverse(e)) for i, e in reversed(x))

    def mul(self, x, y):
        out = list(x)
        for i, e in y:
            self._push(out, i, e)
        return tuple(out)

    def length(self, x):
        return sum(self.factors[i].length(e) for i, e in x)

    def distance(self, x, y):
        return self.length(self.mul(self.inverse(x), y))


def _make_group(spec: GroupSpec):
    if spec.kind == "free":
        return _Free(len(spec.generators))
    if spec.kind == "abelian":
        return _Abelian(len(spec.generators))
    if spec.kind == "product":
        return _Product([_make_group(f) for f in spec.factors])
    if spec.kind == "freeproduct":
        return _FreeProduct([_make_group(f) for f in spec.factors])
    raise UnsupportedKind(f"{spec.kind!r} is not a group kind")


class _WedgeGraph:
    """Full wedge-of-cycles graph; vertex 0 is the wedge point."""

    def __init__(self, cycles):
        ids = ["o"]
        for k, n in enumerate(cycles):
            ids.extend(f"c{k}.{j}" for j in range(1, n))
        self.ids = ids
        pos = {v: i for i, v in enumerate(ids)}
        self.nbr = np.full((len(ids), 2 * len(cycles)), -1, dtype=np.int64)
        for k, n in enumerate(cycles):
            ring = [0] + [pos[f"c{k}.{j}"] for j in range(1, n)]
            for j in range(n):
                u, v = ring[j], ring[(j + 1) % n]
                self.nbr[u, 2 * k] = v
                self.nbr[v, 2 * k + 1] = u
        n = len(ids)
        dist = np.full((n, n), -1, dtype=np.int32)
        for s in range(n):
            dist[s, s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self.nbr[u]:
                    if v >= 0 and dist[s, v] < 0:
                        dist[s, v] = dist[s, u] + 1
                        queue.append(v)
        if (dist < 0).any():
            raise ValueError("fixture graph is not connected")
        self.dist = dist


# ---------------------------------------------------------------------------
# Balls


@dataclass(frozen=True, eq=False)
class CayleyBall:
    """Radius-``radius`` ball around the identity (or fixture wedge point)."""

    spec: GroupSpec
    radius: int
    margin: int
    words: tuple[tuple[int, ...], ...]
    nbr: np.ndarray
    norms: np.ndarray
    elements: tuple | None = None
    ids: tuple[str, ...] | None = None
    _group: object = field(default=None, repr=False)
    _fixture: object = field(default=None, repr=False)
    complete: bool = False

    # -- basic accessors ---------------------------------------------------
    def __len__(self):
        return len(self.words)

    def __repr__(self):
        return (f"CayleyBall({self.spec.to_expr()}, radius={self.radius}, margin={self.margin}, "
                f"vertices={len(self)})")

    @property
    def origin(self) -> int:
        return 0

    @property
    def is_group(self) -> bool:
        return self.spec.is_group

    @property
    def is_tree(self) -> bool:
        return self._group is not None and self._group.is_tree

    @property
    def n_letters(self) -> int:
        return self.nbr.shape[1]

    def label(self, v: int) -> str:
        if self.ids is not None:
            return self.ids[v]
        word = self.words[v]
        return " ".join(self.spec.letter_name(l) for l in word) if word else "e"

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {self.label(v): v for v in range(len(self))}

    @cached_property
    def _element_index(self) -> dict:
        return {e: v for v, e in enumerate(self.elements)} if self.elements else {}

    def vertex(self, label: str) -> int:
        """Index of the vertex with the given canonical label (or word literal)."""
        label = " ".join(label.split())
        if label in self._label_index:
            return self._label_index[label]
        if self.is_group:
            try:
                letters = parse_letters(self.spec, label)
            except PathError:
                letters = None
            if letters is not None:
                v = self.walk(self.origin, letters)
                if v is not None:
                    return v
        raise KeyError(f"no vertex {label!r} in ball of radius {self.radius}")

    def element_vertex(self, element) -> int | None:
        return self._element_index.get(element)

    def step(self, v: int, letter: int) -> int:
        return int(self.nbr[v, letter])

    def walk(self, v: int, letters: Sequence[int]) -> int | None:
        for l in letters:
            v = int(self.nbr[v, l])
            if v < 0:
                return None
        return v

    def letter_between(self, u: int, v: int) -> int:
        hits = np.nonzero(self.nbr[u] == v)[0]
        if len(hits) == 0:
            raise PathError(f"{self.label(u)!r} and {self.label(v)!r} are not adjacent")
        return int(hits[0])

    # -- margins -------------------------------------------------------------
    @property
    def core_radius(self) -> int:
        return self.radius - self.margin

    def check_fits(self, needed_radius, what: str = "search region") -> None:
        # a fixture ball holding the whole graph contains every region
        if self.complete and self.margin == 0:
            return
        if needed_radius > self.core_radius:
            raise MarginError(
                f"{what} needs radius {needed_radius} but the ball's valid core has "
                f"radius {self.core_radius} (radius {self.radius}, margin {self.margin})"
            )

    def check_vertices(self, vertices, what: str = "vertices") -> None:
        if len(vertices) and int(self.norms[np.asarray(vertices)].max()) > self.core_radius:
            raise MarginError(f"{what} leave the valid core of the ball")

    @cached_property
    def sphere_offsets(self) -> np.ndarray:
        """``sphere_offsets[r]`` is the first index with norm ``>= r``."""
        return np.searchsorted(self.norms, np.arange(self.radius + 2), side="left")

    # -- distances -------------------------------------------------------------
    def distance(self, u: int, v: int) -> int:
        if self._fixture is not None:
            return int(self._fixture.dist[u, v])
        return self._group.distance(self.elements[u], self.elements[v])

    @cached_property
    def _coords(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(len(self), -1)

    @cached_property
    def _ancestors(self) -> np.ndarray:
        anc = np.full((len(self), self.radius + 1), -1, dtype=np.int64)
        anc[:, 0] = 0
        for v in range(1, len(self)):
            word = self.words[v]
            parent = self.nbr[v, word[-1] ^ 1]
            anc[v, : len(word)] = anc[parent, : len(word)]
            anc[v, len(word)] = v
        return anc

    def dist_matrix(self, rows, cols) -> np.ndarray:
        """Exact distances between ``rows`` and ``cols`` (int64 matrix)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if self._fixture is not None:
            return self._fixture.dist[np.ix_(rows, cols)].astype(np.int64)
        kind = self.spec.kind
        if kind == "abelian":
            c = self._coords
            return np.abs(c[rows][:, None, :] - c[cols][None, :, :]).sum(axis=2)
        if kind == "free":
            anc = self._ancestors
            ar, ac = anc[rows], anc[cols]
            common = np.zeros((len(rows), len(cols)), dtype=np.int64)
            for k in range(1, self.radius + 1):
                common += (ar[:, k][:, None] == ac[:, k][None, :]) & (ar[:, k][:, None] >= 0)
            return self.norms[rows][:, None] + self.norms[cols][None, :] - 2 * common
        out = np.empty((len(rows), len(cols)), dtype=np.int64)
        el, d = self.elements, self._group.distance
        for i, r in enumerate(rows):
            er = el[r]
            for j, c in enumerate(cols):
                out[i, j] = d(er, el[c])
        return out

    @cached_property
    def full_dist(self) -> np.ndarray:
        if len(self) > 8000:
            raise MemoryError("full distance table is limited to balls of <= 8000 vertices")
        idx = np.arange(len(self))
        return self.dist_matrix(idx, idx).astype(np.int32)

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> str:
        edges = []
        for u in range(len(self)):
            for l in range(0, self.n_letters, 2):
                v = int(self.nbr[u, l])
                if v >= 0:
                    edges.append([u, v, self.spec.generators[l >> 1]])
        doc = {
            "format": BALL_FORMAT,
            "spec": self.spec.to_text(),
            "radius": self.radius,
            "margin": self.margin,
            "vertices": [self.label(v) for v in range(len(self))],
            "edges": edges,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def build_ball(spec: GroupSpec, radius: int, margin: int = 0,
               vertex_budget: int = DEFAULT_VERTEX_BUDGET) -> CayleyBall:
    """Breadth-first construction of the metric ball of the given radius."""
    if radius < 0 or margin < 0:
        raise ValueError("radius and margin must be non-negative")
    if margin > radius:
        raise ValueError("margin cannot exceed the radius")
    if spec.kind == "graph":
        return _build_fixture_ball(spec, radius, margin, vertex_budget)
    group = _make_group(spec)
    nl = spec.n_letters
    elements = [group.identity]
    words: list[tuple[int, ...]] = [()]
    index = {group.identity: 0}
    edges: list[list[int]] = [[-1] * nl]
    layer = [0]
    for depth in range(radius):
        nxt = []
        for u in layer:
            eu, wu = elements[u], words[u]
            for l in range(nl):
                e = group.mul_letter(eu, l)
                v = index.get(e)
                if v is None:
                    v = len(elements)
                    if v >= vertex_budget:
                        raise BallBudgetError(vertex_budget, v + 1, radius)
                    index[e] = v
                    elements.append(e)
                    words.append(wu + (l,))
                    edges.append([-1] * nl)
                    nxt.append(v)
                edges[u][l] = v
                edges[v][l ^ 1] = u
        layer = nxt
    norms = np.array([len(w) for w in words], dtype=np.int64)
    return CayleyBall(spec, radius, margin, tuple(words), np.array(edges, dtype=np.int64),
                      norms, elements=tuple(elements), _group=group)


def _build_fixture_ball(spec, radius, margin, vertex_budget):
    graph = _WedgeGraph(spec.cycles)
    d0 = graph.dist[0]
    # shortlex BFS order from the wedge point
    order = [0]
    words = {0: ()}
    for u in order:
        for l in range(spec.n_letters):
            v = int(graph.nbr[u, l])
            if v >= 0 and v not in words and d0[v] <= radius:
                words[v] = words[u] + (l,)
                order.append(v)
    if len(order) > vertex_budget:
        raise BallBudgetError(vertex_budget, len(order), radius)
    if len(order) != len(graph.ids):
        # restrict the fixture to its ball; distances stay those of the full graph
        keep = np.array(order)
        remap = np.full(len(graph.ids), -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
    else:
        keep = np.array(order)
        remap = np.empty(len(graph.ids), dtype=np.int64)
        remap[keep] = np.arange(len(keep))
    nbr = graph.nbr[keep]
    nbr = np.where(nbr >= 0, remap[np.maximum(nbr, 0)], -1)

    class _Restricted:
        dist = graph.dist[np.ix_(keep, keep)]

    return CayleyBall(spec, radius, margin, tuple(words[v] for v in order), nbr,
                      d0[keep].astype(np.int64), ids=tuple(graph.ids[v] for v in order),
                      _fixture=_Restricted, complete=len(order) == len(graph.ids))


def ball_from_json(text: str) -> CayleyBall:
    doc = json.loads(text)
    if doc.get("format") != BALL_FORMAT:
        raise ValueError(f"unsupported ball format {doc.get('format')!r}")
    ball = build_ball(parse_group_spec(doc["spec"]), doc["radius"], doc["margin"])
    if ball.to_json() != text:
        raise ValueError("serialized ball does not match its rebuilt group ball")
    return ball


# ---------------------------------------------------------------------------
# Letters, geodesics, translation


def parse_letters(spec: GroupSpec, text: str) -> list[int]:
    """``"a b a^-1"`` (or ``a⁻¹``) to a list of letters."""
    names = {g: 2 * i for i, g in enumerate(spec.generators)}
    out = []
    for tok in text.split():
        inv = False
        for suffix in ("^-1", "⁻¹"):
            if tok.endswith(suffix):
                tok, inv = tok[: -len(suffix)], True
        if tok not in names:
            raise PathError(f"unknown generator {tok!r}")
        out.append(names[tok] | int(inv))
    return out


def geodesic(ball: CayleyBall, x: int, y: int) -> list[int]:
    """Shortlex-least geodesic from ``x`` to ``y`` as a vertex list.

    Greedy descent on exact distances picks the smallest letter that keeps a
    geodesic completion available, which yields the shortlex-least geodesic
    word.  Raises MarginError if that geodesic leaves the ball.
    """
    path = [x]
    d = ball.distance(x, y)
    cur = x
    while d > 0:
        row = ball.nbr[cur]
        ok = row >= 0
        cand = row[ok]
        dist = ball.dist_matrix(cand, [y])[:, 0]
        letters = np.nonzero(ok)[0]
        # a neighbour outside the ball could be the shortlex choice
        step = None
        for l, v, dv in zip(letters, cand, dist):
            if dv == d - 1:
                step = (l, int(v))
                break
        if step is None or (not ok[: step[0]].all() and ball.is_group
                            and _outside_letter_descends(ball, cur, y, step[0], d)):
            raise MarginError("shortlex geodesic leaves the ball")
        cur = step[1]
        path.append(cur)
        d -= 1
    return path


def _outside_letter_descends(ball, cur, y, upto, d):
    g = ball._group
    ec, ey = ball.elements[cur], ball.elements[y]
    for l in range(upto):
        if ball.nbr[cur, l] < 0 and g.distance(g.mul_letter(ec, l), ey) == d - 1:
            return True
    return False


def translate_letters(ball: CayleyBall, start: int, letters: Sequence[int]) -> list[int]:
    """Vertices of the edge path reading ``letters`` from ``start``."""
    out = [start]
    v = start
    for l in letters:
        v = int(ball.nbr[v, l])
        if v < 0:
            raise MarginError("path leaves the ball")
        out.append(v)
    return out
