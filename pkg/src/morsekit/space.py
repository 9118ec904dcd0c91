"""Metric spaces with exact distance oracles.

Built-in spaces are Cayley graphs of free groups, free abelian groups and
free products of those, with elements stored in syllable normal form.
Explicit graphs are given by an edge list and use cached BFS.
"""
from __future__ import annotations

import json
import math
import re
import threading
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

BALL_RADIUS_CAP = 32
EXPLICIT_VERTEX_CAP = 10**6
DEFAULT_GEODESIC_BUDGET = 10**4


class SpaceError(ValueError):
    """Invalid space description or vertex."""


# ---------------------------------------------------------------------------
# factors


class FreeFactor:
    """Free group factor; a syllable is a nonempty reduced tuple of letters
    ``+-(i+1)``."""

    kind = "free"

    def __init__(self, symbols: Sequence[str]):
        self.symbols = tuple(symbols)
        self.rank = len(self.symbols)

    def mul(self, u, v):
        k, n = 0, min(len(u), len(v))
        while k < n and u[-1 - k] == -v[k]:
            k += 1
        return u[:len(u) - k] + v[k:]

    def inv(self, u):
        return tuple(-x for x in reversed(u))

    def length(self, u) -> int:
        return len(u)

    def gen(self, i: int, sign: int):
        return (sign * (i + 1),)

    def is_valid(self, u) -> bool:
        return bool(u) and all(isinstance(x, int) and 1 <= abs(x) <= self.rank for x in u) and \
            all(a != -b for a, b in zip(u, u[1:]))

    def letters(self, u) -> list[tuple[int, int]]:
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in u]


class AbelianFactor:
    """Free abelian factor; a syllable is a nonzero integer vector."""

    kind = "free_abelian"

    def __init__(self, symbols: Sequence[str]):
        self.symbols = tuple(symbols)
        self.rank = len(self.symbols)

    def mul(self, u, v):
        w = tuple(a + b for a, b in zip(u, v))
        return w if any(w) else ()

    def inv(self, u):
        return tuple(-a for a in u)

    def length(self, u) -> int:
        return sum(abs(a) for a in u)

    def gen(self, i: int, sign: int):
        return tuple(sign if j == i else 0 for j in range(self.rank))

    def is_valid(self, u) -> bool:
        return len(u) == self.rank and any(u) and all(isinstance(x, int) for x in u)

    def letters(self, u) -> list[tuple[int, int]]:
        # canonical spelling: coordinates in alphabet order
        out = []
        for i, a in enumerate(u):
            out.extend([(i, 1 if a > 0 else -1)] * abs(a))
        return out


@dataclass(frozen=True)
class Generator:
    symbol: str
    factor: int
    index: int
    sign: int

    @property
    def name(self) -> str:
        return self.symbol if self.sign > 0 else self.symbol + "-"


# ---------------------------------------------------------------------------
# space specs


@dataclass
class SpaceSpec:
    """Description of a space: ``free``, ``free_abelian``, ``free_product``
    or ``explicit_graph``."""

    family: str
    rank: int = 0
    alphabet: tuple[str, ...] = ()
    factors: tuple["SpaceSpec", ...] = ()
    vertex_count: int = 0
    edges: tuple[tuple[int, int], ...] = ()

    @classmethod
    def free(cls, k: int, alphabet: Sequence[str] | None = None) -> "SpaceSpec":
        return cls("free", rank=k, alphabet=tuple(alphabet or _default_alphabet(k)))

    @classmethod
    def free_abelian(cls, k: int, alphabet: Sequence[str] | None = None) -> "SpaceSpec":
        return cls("free_abelian", rank=k, alphabet=tuple(alphabet or _default_alphabet(k)))

    @classmethod
    def free_product(cls, *factors: "SpaceSpec") -> "SpaceSpec":
        return cls("free_product", factors=tuple(factors))

    @classmethod
    def explicit_graph(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SpaceSpec":
        return cls("explicit_graph", vertex_count=n, edges=tuple((int(a), int(b)) for a, b in edges))

    @classmethod
    def from_dict(cls, data: dict) -> "SpaceSpec":
        fam = data.get("family")
        if fam in ("free", "free_abelian"):
            rank = int(data.get("rank", len(data.get("alphabet", ()))))
            alphabet = data.get("alphabet") or _default_alphabet(rank)
            return cls(fam, rank=rank, alphabet=tuple(alphabet))
        if fam == "free_product":
            return cls.free_product(*(cls.from_dict(f) for f in data.get("factors", ())))
        if fam == "explicit_graph":
            return cls.explicit_graph(int(data["vertex_count"]), data.get("edges", ()))
        raise SpaceError(f"unknown family {fam!r}")

    def to_dict(self) -> dict:
        if self.family in ("free", "free_abelian"):
            return {"family": self.family, "rank": self.rank, "alphabet": list(self.alphabet)}
        if self.family == "free_product":
            return {"family": "free_product", "factors": [f.to_dict() for f in self.factors]}
        return {"family": "explicit_graph", "vertex_count": self.vertex_count,
                "edges": [list(e) for e in self.edges]}

    def validate(self) -> None:
        if self.family in ("free", "free_abelian"):
            if self.rank < 1 or len(self.alphabet) != self.rank:
                raise SpaceError("alphabet size must equal rank >= 1")
            if len(set(self.alphabet)) != len(self.alphabet):
                raise SpaceError("alphabet symbols must be distinct")
            for s in self.alphabet:
                if not s or not s.isalpha():
                    raise SpaceError(f"bad symbol {s!r}")
        elif self.family == "free_product":
            if len(self.factors) < 2:
                raise SpaceError("free_product needs at least 2 factors")
            seen: set[str] = set()
            for f in self.factors:
                f.validate()
                if f.family == "explicit_graph":
                    raise SpaceError("explicit graphs cannot be free product factors")
                syms = set(_flat_alphabet(f))
                if syms & seen:
                    raise SpaceError(f"alphabet collision: {sorted(syms & seen)}")
                seen |= syms
        elif self.family == "explicit_graph":
            if not 1 <= self.vertex_count <= EXPLICIT_VERTEX_CAP:
                raise SpaceError("explicit graph vertex count out of range")
        else:
            raise SpaceError(f"unknown family {self.family!r}")


def _default_alphabet(k: int) -> list[str]:
    return [chr(ord("a") + i) for i in range(k)]


def _flat_alphabet(spec: SpaceSpec) -> list[str]:
    if spec.family == "free_product":
        return [s for f in spec.factors for s in _flat_alphabet(f)]
    return list(spec.alphabet)


def _flat_factors(spec: SpaceSpec) -> list[SpaceSpec]:
    # free products are associative; nested products share one normal form
    if spec.family == "free_product":
        return [g for f in spec.factors for g in _flat_factors(f)]
    return [spec]


BUILTIN_SPACES = {
    "f2": lambda: SpaceSpec.free(2, "ab"),
    "z2": lambda: SpaceSpec.free_abelian(2, "ab"),
    "z2-star-z": lambda: SpaceSpec.free_product(SpaceSpec.free_abelian(2, "ab"), SpaceSpec.free(1, "c")),
    "z2-star-z-star-z": lambda: SpaceSpec.free_product(
        SpaceSpec.free_product(SpaceSpec.free_abelian(2, "ab"), SpaceSpec.free(1, "c")),
        SpaceSpec.free(1, "d")),
}


def space_name(space) -> str:
    """Built-in alias of a space, else its family name."""
    for alias, make in BUILTIN_SPACES.items():
        if make() == space.spec:
            return alias
    return space.spec.family


def load_space_spec(source: str) -> SpaceSpec:
    """Load a spec from a built-in alias, a JSON string, or a JSON file path."""
    if source in BUILTIN_SPACES:
        return BUILTIN_SPACES[source]()
    text = source
    if not source.lstrip().startswith("{"):
        with open(source) as fh:
            text = fh.read()
    try:
        return SpaceSpec.from_dict(json.loads(text))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SpaceError(f"malformed space config: {exc}") from exc


# ---------------------------------------------------------------------------
# metric spaces


class MetricSpace:
    """Common interface.  Vertices are hashable; ``o`` is the basepoint."""

    spec: SpaceSpec
    o: object
    is_tree: bool = False
    radius_cap: int | None = BALL_RADIUS_CAP

    def dist(self, x, y) -> int:
        raise NotImplementedError

    def neighbors(self, x) -> list:
        raise NotImplementedError

    def check_vertex(self, x) -> None:
        raise NotImplementedError

    def norm(self, x) -> int:
        return self.dist(self.o, x)

    def ball(self, radius: int, center=None) -> list:
        """Vertices within ``radius`` of ``center``, in deterministic BFS order."""
        if self.radius_cap is not None and radius > self.radius_cap:
            raise SpaceError(f"radius {radius} exceeds ball cap {self.radius_cap}")
        center = self.o if center is None else center
        seen = {center: 0}
        order = [center]
        queue = deque([center])
        while queue:
            v = queue.popleft()
            dv = seen[v]
            if dv == radius:
                continue
            for w in self.neighbors(v):
                if w not in seen:
                    seen[w] = dv + 1
                    order.append(w)
                    queue.append(w)
        return order

    def ball_sizes(self, radius: int) -> list[int]:
        counts = [0] * (radius + 1)
        for v in self.ball(radius):
            counts[self.norm(v)] += 1
        out, acc = [], 0
        for c in counts:
            acc += c
            out.append(acc)
        return out


def _common_prefix(g: tuple, h: tuple) -> int:
    """Length of the longest common prefix, by bisection on slice equality."""
    lo, hi = 0, min(len(g), len(h))
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if g[:mid] == h[:mid]:
            lo = mid
        else:
            hi = mid - 1
    return lo


class GroupSpace(MetricSpace):
    """Cayley graph of a free product of free and free abelian factors
    (a single factor is allowed)."""

    def __init__(self, spec: SpaceSpec):
        self.spec = spec
        self.factors = []
        self.generators: list[Generator] = []
        for fi, f in enumerate(_flat_factors(spec)):
            cls = FreeFactor if f.family == "free" else AbelianFactor
            self.factors.append(cls(f.alphabet))
            for i, s in enumerate(f.alphabet):
                self.generators.append(Generator(s, fi, i, 1))
                self.generators.append(Generator(s, fi, i, -1))
        self._gen_by_name = {g.name: g for g in self.generators}
        self._gen_elem = [((g.factor, self.factors[g.factor].gen(g.index, g.sign)),) for g in self.generators]
        self._gen_index = {g.name: i for i, g in enumerate(self.generators)}
        self._step_codes = {e: (g.factor, g.sign * (g.index + 1))
                            for e, g in zip(self._gen_elem, self.generators)}
        self.o = ()
        self.is_tree = all(f.kind == "free" for f in self.factors)
        self.abelian_factors = [i for i, f in enumerate(self.factors) if f.kind == "free_abelian"]

    # -- group operations ---------------------------------------------------

    def mul(self, g: tuple, h: tuple) -> tuple:
        if not g:
            return h
        if not h:
            return g
        left = list(g)
        i = 0
        while left and i < len(h) and left[-1][0] == h[i][0]:
            f = h[i][0]
            v = self.factors[f].mul(left[-1][1], h[i][1])
            left.pop()
            i += 1
            if v:
                left.append((f, v))
                break
        return tuple(left) + tuple(h[i:])

    def step(self, g: tuple, h: tuple) -> tuple:
        """g^-1 h, computed after dropping the common syllable prefix
        (normal forms sharing a prefix P are P.g' and P.h')."""
        p = _common_prefix(g, h)
        g, h = g[p:], h[p:]
        if g and h and g[0][0] == h[0][0] and self.factors[g[0][0]].kind == "free":
            f, u, v = g[0][0], g[0][1], h[0][1]
            q = _common_prefix(u, v)
            if q:
                g = (((f, u[q:]),) if len(u) > q else ()) + g[1:]
                h = (((f, v[q:]),) if len(v) > q else ()) + h[1:]
        return self.mul(self.inv(g), h)

    def inv(self, g: tuple) -> tuple:
        return tuple((f, self.factors[f].inv(v)) for f, v in reversed(g))

    def length(self, g: tuple) -> int:
        return sum(self.factors[f].length(v) for f, v in g)

    def dist(self, x, y) -> int:
        return self.length(self.step(x, y))

    def norm(self, x) -> int:
        return self.length(x)

    def gen_element(self, gen: Generator | str) -> tuple:
        if isinstance(gen, str):
            gen = self.generator(gen)
        return self._gen_elem[self.generators.index(gen)]

    def generator(self, name: str) -> Generator:
        try:
            return self._gen_by_name[name]
        except KeyError:
            raise SpaceError(f"unknown generator {name!r}") from None

    def neighbors(self, x) -> list:
        return [self.mul(x, s) for s in self._gen_elem]

    def check_vertex(self, x) -> None:
        if not isinstance(x, tuple):
            raise SpaceError(f"unknown vertex {x!r}")
        prev = None
        for syl in x:
            if not (isinstance(syl, tuple) and len(syl) == 2 and 0 <= syl[0] < len(self.factors)):
                raise SpaceError(f"unknown vertex {x!r}")
            f, v = syl
            if f == prev or not isinstance(v, tuple) or not self.factors[f].is_valid(v):
                raise SpaceError(f"vertex {x!r} is not in normal form")
            prev = f

    # -- words --------------------------------------------------------------

    def parse_word(self, word: str) -> list[Generator]:
        """Parse ``"a^2b^3ca-"``, ``"(ca)^3"`` or ``"a'b"`` into generators."""
        return [self.generator(n) for n in _expand_word(word, self._symbols_sorted())]

    def _symbols_sorted(self) -> list[str]:
        return sorted({g.symbol for g in self.generators}, key=len, reverse=True)

    def element(self, word: str | Sequence[Generator]) -> tuple:
        gens = self.parse_word(word) if isinstance(word, str) else word
        g = ()
        for s in gens:
            g = self.mul(g, self.gen_element(s))
        return g

    def spell(self, g: tuple) -> list[Generator]:
        """Canonical geodesic spelling of a normal form."""
        out = []
        for f, v in g:
            for i, sign in self.factors[f].letters(v):
                out.append(self._gen_by_name[self.factors[f].symbols[i] + ("" if sign > 0 else "-")])
        return out

    def word_str(self, g: tuple) -> str:
        return format_word([s.name for s in self.spell(g)])

    def path_from(self, start, gens: Sequence[Generator]) -> list:
        out = [start]
        for s in gens:
            out.append(self.mul(out[-1], self.gen_element(s)))
        return out

    def syllables(self, g: tuple) -> list[tuple[int, str]]:
        """Coset-syllable itinerary (Bass-Serre shadow) of a normal form."""
        return [(f, self.word_str(((f, v),))) for f, v in g]


class GraphSpace(MetricSpace):
    """Explicit connected, locally finite graph on vertices ``0..n-1``."""

    radius_cap = None  # finite, so any ball is enumerable

    def __init__(self, spec: SpaceSpec):
        self.spec = spec
        n = spec.vertex_count
        adj: list[set[int]] = [set() for _ in range(n)]
        for a, b in spec.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise SpaceError(f"edge ({a},{b}) out of range")
            if a != b:
                adj[a].add(b)
                adj[b].add(a)
        self.adj = [sorted(s) for s in adj]
        self.o = 0
        self._lock = threading.Lock()
        self._rows: dict[int, list[int]] = {}
        row = self._bfs(0)
        if min(row) < 0:
            raise SpaceError("explicit graph is disconnected")
        self._rows[0] = row
        self.is_tree = len({tuple(sorted(e)) for e in spec.edges if e[0] != e[1]}) == n - 1

    def _bfs(self, s: int) -> list[int]:
        d = [-1] * len(self.adj)
        d[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for w in self.adj[v]:
                if d[w] < 0:
                    d[w] = d[v] + 1
                    q.append(w)
        return d

    def check_vertex(self, x) -> None:
        if not isinstance(x, int) or not 0 <= x < len(self.adj):
            raise SpaceError(f"unknown vertex {x!r}")

    def dist(self, x, y) -> int:
        self.check_vertex(x)
        self.check_vertex(y)
        row = self._rows.get(x)
        if row is None:
            row = self._bfs(x)
            with self._lock:
                self._rows.setdefault(x, row)
        return row[y]

    def neighbors(self, x) -> list:
        return list(self.adj[x])


def build_space(spec: SpaceSpec | str) -> MetricSpace:
    if isinstance(spec, str):
        spec = load_space_spec(spec)
    spec.validate()
    if spec.family == "explicit_graph":
        return GraphSpace(spec)
    return GroupSpace(spec)


def dist(space: MetricSpace, x, y) -> int:
    space.check_vertex(x)
    space.check_vertex(y)
    return space.dist(x, y)


# ---------------------------------------------------------------------------
# word syntax

_TOKEN = re.compile(r"\s*(\(|\)|\^\s*-?\d+|\^\s*inf|['\-]|[A-Za-z]+)")


def _expand_word(word: str, symbols: list[str]) -> list[str]:
    """Expand a word string to a flat list of generator names (``x`` or ``x-``).

    >>> _expand_word("a^2b-(ca)^2", ["a", "b", "c"])
    ['a', 'a', 'b-', 'c', 'a', 'c', 'a']
    >>> _expand_word("a'^-2", ["a"])
    ['a', 'a']
    """
    pos = 0
    stack: list[list[str]] = [[]]
    last: list[str] | None = None
    word = word.strip()
    while pos < len(word):
        m = _TOKEN.match(word, pos)
        if not m:
            raise SpaceError(f"cannot parse word {word!r} at {pos}")
        tok = m.group(1)
        pos = m.end()
        if tok == "(":
            stack.append([])
            last = None
        elif tok == ")":
            if len(stack) == 1:
                raise SpaceError(f"unbalanced ')' in {word!r}")
            last = stack.pop()
            stack[-1].extend(last)
        elif tok.startswith("^"):
            exp = tok[1:].strip()
            if last is None or exp == "inf":
                raise SpaceError(f"misplaced exponent in {word!r}")
            n = int(exp)
            del stack[-1][len(stack[-1]) - len(last):]
            block = last if n >= 0 else _invert_names(last)
            rep = block * abs(n)
            stack[-1].extend(rep)
            last = rep
        elif tok in ("'", "-"):
            if last is None or len(last) != 1:
                raise SpaceError(f"inverse marker must follow a symbol in {word!r}")
            stack[-1][-1] = _invert_names(last)[0]
            last = [stack[-1][-1]]
        else:
            i = 0
            while i < len(tok):
                for s in symbols:
                    if tok.startswith(s, i):
                        stack[-1].append(s)
                        last = [s]
                        i += len(s)
                        break
                else:
                    raise SpaceError(f"unknown symbol in {word!r}")
    if len(stack) != 1:
        raise SpaceError(f"unbalanced '(' in {word!r}")
    return stack[0]


def _invert_names(names: list[str]) -> list[str]:
    return [n[:-1] if n.endswith("-") else n + "-" for n in reversed(names)]


def format_word(names: Sequence[str]) -> str:
    """Compress generator names into exponent notation.

    >>> format_word(["a", "a", "b-", "c"])
    'a^2b-c'
    """
    out = []
    i = 0
    while i < len(names):
        j = i
        while j < len(names) and names[j] == names[i]:
            j += 1
        out.append(names[i] + (f"^{j - i}" if j - i > 1 else ""))
        i = j
    return "".join(out)


# ---------------------------------------------------------------------------
# paths and rays


@dataclass(frozen=True)
class PathSeg:
    """A finite path; ``params`` defaults to integer arc-length indices.

    Consecutive vertices are adjacent or (for reparameterized paths) equal.
    """

    vertices: tuple
    params: tuple | None = None

    def __post_init__(self):
        if not self.vertices:
            raise SpaceError("empty path")
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if self.params is not None:
            if len(self.params) != len(self.vertices):
                raise SpaceError("params and vertices differ in length")
            object.__setattr__(self, "params", tuple(Fraction(p) for p in self.params))

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def param(self, i: int) -> Fraction:
        return Fraction(i) if self.params is None else self.params[i]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def reversed(self) -> "PathSeg":
        return PathSeg(self.vertices[::-1])

    def sub(self, i: int, j: int) -> "PathSeg":
        return PathSeg(self.vertices[i:j + 1])

    def concat(self, other: "PathSeg") -> "PathSeg":
        if self.end != other.start:
            raise SpaceError("concatenated paths must share an endpoint")
        return PathSeg(self.vertices + other.vertices[1:])

    def is_edge_path(self, space: MetricSpace) -> bool:
        if isinstance(space, GroupSpace):
            return all(len(space.step(a, b)) <= 1 and space.length(space.step(a, b)) <= 1
                       for a, b in zip(self.vertices, self.vertices[1:]))
        return all(space.dist(a, b) <= 1 for a, b in zip(self.vertices, self.vertices[1:]))

    def is_geodesic(self, space: MetricSpace) -> bool:
        return self.is_edge_path(space) and space.dist(self.start, self.end) == self.length and \
            len(set(self.vertices)) == len(self.vertices)


@dataclass
class RaySchema:
    """Eventually periodic ray ``prefix . period^inf`` from ``basepoint``."""

    prefix: str
    period: str
    basepoint: object = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def parse(cls, text: str, basepoint=()) -> "RaySchema":
        """``"(ca)^inf"``, ``"a^3(b)^inf"``, ``"ab(ca)^inf"`` or ``"c^inf"``."""
        text = text.strip()
        if text.startswith("{"):
            d = json.loads(text)
            return cls(d.get("prefix", ""), d["period"], basepoint)
        m = re.fullmatch(r"(.*?)(\(([^()]*)\)|([A-Za-z]['\-]?))\s*\^\s*inf", text)
        if not m:
            raise SpaceError(f"cannot parse ray {text!r}")
        period = m.group(3) if m.group(3) is not None else m.group(4)
        if not period:
            raise SpaceError("ray period must be nonempty")
        return cls(m.group(1), period, basepoint)

    def describe(self) -> str:
        return f"{self.prefix}({self.period})^inf"

    def generators(self, space: GroupSpace, n: int) -> list[Generator]:
        pre = space.parse_word(self.prefix)
        per = space.parse_word(self.period)
        if not per:
            raise SpaceError("ray period must be nonempty")
        out = list(pre)
        while len(out) < n:
            out.extend(per)
        return out[:n]

    def vertex(self, space: GroupSpace, t: int):
        return self.vertices(space, t)[t]

    def vertices(self, space: GroupSpace, horizon: int) -> list:
        """Ray vertices at parameters ``0..horizon``."""
        # cached per space; the entry keeps the space alive so ids stay unique
        hit = self._cache.get(id(space))
        if hit is None or hit[0] is not space or len(hit[1]) <= horizon:
            gens = self.generators(space, horizon)
            path = space.path_from(self.basepoint, gens)
            with self._lock:
                hit = self._cache.get(id(space))
                if hit is None or hit[0] is not space or len(hit[1]) <= horizon:
                    hit = self._cache[id(space)] = (space, path)
        return hit[1][:horizon + 1]

    def truncate(self, space: GroupSpace, horizon: int) -> PathSeg:
        return PathSeg(tuple(self.vertices(space, horizon)))

    def verify_geodesic(self, space: GroupSpace, horizon: int) -> bool:
        vs = self.vertices(space, horizon)
        return all(space.dist(vs[0], v) == t for t, v in enumerate(vs))

    def canonical(self) -> "RaySchema":
        """Replace a period that is a proper power by its primitive root."""
        p = self.period
        for k in range(1, len(p)):
            if len(p) % k == 0 and p[:k] * (len(p) // k) == p:
                return RaySchema(self.prefix, p[:k], self.basepoint)
        return RaySchema(self.prefix, p, self.basepoint)


@dataclass
class LineSchema:
    """Bi-infinite periodic line through ``basepoint``, e.g. the x-axis of Z^2."""

    period: str
    basepoint: object = ()

    def vertices(self, space: GroupSpace, horizon: int) -> list:
        """Vertices at parameters ``-horizon..horizon`` (index ``t + horizon``)."""
        per = space.parse_word(self.period)
        fwd = space.path_from(self.basepoint, (per * (horizon // len(per) + 1))[:horizon])
        inv = [space.generator(g.name[:-1] if g.sign < 0 else g.name + "-") for g in reversed(per)]
        back = space.path_from(self.basepoint, (inv * (horizon // len(per) + 1))[:horizon])
        return back[::-1] + fwd[1:]

    def describe(self) -> str:
        return f"line({self.period})"


# ---------------------------------------------------------------------------
# geodesics


def geodesic(space: MetricSpace, x, y) -> PathSeg:
    """One geodesic from x to y; in group spaces the canonical spelling of
    x^-1 y, elsewhere the first one found by enumeration."""
    if isinstance(space, GroupSpace):
        return PathSeg(tuple(space.path_from(x, space.spell(space.step(x, y)))))
    paths, _ = enumerate_geodesics(space, x, y, budget=1)
    return paths[0]


def enumerate_geodesics(space: MetricSpace, x, y, budget: int = DEFAULT_GEODESIC_BUDGET):
    """Geodesics from x to y in lexicographic generator order.

    Returns ``(paths, exhaustive)``.
    """
    if budget <= 0:
        raise SpaceError("budget must be positive")
    space.check_vertex(x)
    space.check_vertex(y)
    out: list[PathSeg] = []
    path = [x]

    def rec(v, remaining) -> bool:
        if remaining == 0:
            out.append(PathSeg(tuple(path)))
            return len(out) < budget
        for w in space.neighbors(v):
            if space.dist(w, y) == remaining - 1:
                path.append(w)
                ok = rec(w, remaining - 1)
                path.pop()
                if not ok:
                    return False
        return True

    exhaustive = rec(x, space.dist(x, y))
    if not exhaustive:
        # budget hit exactly on the last geodesic still counts as exhaustive
        exhaustive = _count_geodesics(space, x, y, budget + 1) <= budget
    return out, exhaustive


def _count_geodesics(space: MetricSpace, x, y, cap: int) -> int:
    layer = {x: 1}
    for r in range(space.dist(x, y), 0, -1):
        nxt: dict = {}
        for v, c in layer.items():
            for w in space.neighbors(v):
                if space.dist(w, y) == r - 1:
                    nxt[w] = min(cap, nxt.get(w, 0) + c)
        layer = nxt
    return layer.get(y, 0)


def count_geodesics(space: MetricSpace, x, y, cap: int = 10**18) -> int:
    return _count_geodesics(space, x, y, cap)


# ---------------------------------------------------------------------------
# quasi-geodesic verification


@dataclass
class QGVerdict:
    passed: bool
    L: Fraction
    A: Fraction
    pairs_checked: int
    violation: tuple | None = None  # (i, j, d, lower, upper)
    min_slack: Fraction | None = None

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed, "L": str(self.L), "A": str(self.A),
            "pairs_checked": self.pairs_checked,
            "violation": None if self.violation is None else [
                self.violation[0], self.violation[1], self.violation[2],
                str(self.violation[3]), str(self.violation[4])],
            "min_slack": None if self.min_slack is None else str(self.min_slack),
        }


WALK_CAP = 4096


def walk_matrix(space: MetricSpace, vertices: Sequence) -> np.ndarray:
    """Pairwise distance matrix of a vertex sequence.

    Group spaces route through the walk kernel: gaps between consecutive
    vertices are filled by geodesics and the filler rows are dropped.
    """
    vs = list(vertices)
    n = len(vs)
    if not isinstance(space, GroupSpace) or n < 3:
        out = np.zeros((n, n), dtype=np.int32)
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = space.dist(vs[i], vs[j])
        return out
    from .kernels import walk_distances
    codes = space._step_codes
    sf: list[int] = []
    sc: list[int] = []
    keep = [0]
    for u, v in zip(vs, vs[1:]):
        step = space.step(u, v)
        if not step:
            sf.append(-1)
            sc.append(0)
        elif step in codes:
            f, c = codes[step]
            sf.append(f)
            sc.append(c)
        else:
            for g in space.spell(step):
                f, c = codes[space._gen_elem[space._gen_index[g.name]]]
                sf.append(f)
                sc.append(c)
        keep.append(len(sf))
    if len(sf) > WALK_CAP:
        # the filled walk would be larger than the pairs it serves
        return _pairwise(space, vs, vs)
    kinds = np.array([0 if f.kind == "free" else 1 for f in space.factors], dtype=np.int32)
    rank = max([len(f.symbols) for f in space.factors if f.kind != "free"], default=1)
    full = walk_distances(np.array(sf, dtype=np.int32), np.array(sc, dtype=np.int32), kinds, rank)
    idx = np.array(keep)
    return full[np.ix_(idx, idx)]


def _pairwise(space: MetricSpace, xs: Sequence, ys: Sequence) -> np.ndarray:
    return np.array([[space.dist(x, y) for y in ys] for x in xs], dtype=np.int64).reshape(len(xs), len(ys))


def cross_matrix(space: MetricSpace, xs: Sequence, ys: Sequence) -> np.ndarray:
    """d(xs[i], ys[j]) for all i, j.

    In group spaces with both sides of moderate size the distances come
    from one walk through xs reversed and then ys.
    """
    xs, ys = list(xs), list(ys)
    if isinstance(space, GroupSpace) and min(len(xs), len(ys)) > 4:
        seq = xs[::-1] + ys
        if sum(space.length(space.step(u, v)) for u, v in zip(seq, seq[1:])) <= WALK_CAP:
            full = walk_matrix(space, seq)
            return full[len(xs) - 1::-1, len(xs):]
    return _pairwise(space, xs, ys)


def _scaled_params(path: PathSeg):
    params = [path.param(i) for i in range(len(path))]
    q = 1
    for p in params:
        q = q * p.denominator // math.gcd(q, p.denominator)
    return np.array([int(p * q) for p in params], dtype=np.int64), q


def check_qg(space: MetricSpace, path: PathSeg, L, A, matrix: np.ndarray | None = None) -> QGVerdict:
    """Check (1/L)|s-t| - A <= d(p_s, p_t) <= L|s-t| + A over all index pairs.

    Comparisons are exact: constants become Fractions and the pair test runs
    on integers scaled by the common denominator.  A failing verdict names
    the pair with the most negative slack.
    """
    L = Fraction(L)
    A = Fraction(A)
    if L < 1 or A < 0:
        raise SpaceError("need L >= 1 and A >= 0")
    n = len(path)
    if n < 2:
        return QGVerdict(True, L, A, 0, None, None)
    D = walk_matrix(space, path.vertices) if matrix is None else matrix
    P, q = _scaled_params(path)
    Ln, Ld, An, Ad = L.numerator, L.denominator, A.numerator, A.denominator
    iu, ju = np.triu_indices(n, 1)
    lo_den = q * Ln * Ad
    up_den = q * Ld * Ad
    span = int(P.max() - P.min()) + int(D.max()) + n
    wide = span * q * Ln * Ld * Ad * (An + 1) * (lo_den + up_den) > 2 ** 60
    gap = (P[ju] - P[iu]).astype(object if wide else np.int64)
    d = D[iu, ju].astype(gap.dtype)
    # d - (gap/(qL) - A), scaled by lo_den
    lo = d * lo_den - (gap * Ld * Ad - An * q * Ln)
    # (L gap/q + A) - d, scaled by up_den
    up = gap * Ln * Ad + An * q * Ld - d * up_den
    # per-pair slack on the common scale lo_den * up_den
    slack = np.minimum(lo * up_den, up * lo_den)
    k = int(np.argmin(slack))
    worst = Fraction(int(slack[k]), lo_den * up_den)
    if worst < 0:
        # report the worst pair; ties go to the first in row-major order
        i, j = int(iu[k]), int(ju[k])
        g = Fraction(int(gap[k]), q)
        return QGVerdict(False, L, A, len(iu), (i, j, int(d[k]), g / L - A, L * g + A), worst)
    return QGVerdict(True, L, A, len(iu), None, worst)


def hausdorff(space: MetricSpace, xs: Sequence, ys: Sequence) -> int:
    D = cross_matrix(space, xs, ys)
    return int(max(D.min(axis=1).max(), D.min(axis=0).max()))


def set_distance(space: MetricSpace, xs: Iterable, ys: Sequence) -> int:
    return int(cross_matrix(space, list(xs), ys).min())


def tame(space: MetricSpace, path: PathSeg, L, A) -> PathSeg:
    """Interpolate integer samples by geodesics, keeping the sample times.

    The result is a continuous (L, 2(L+A))-quasi-geodesic with Hausdorff
    distance at most L+A from the samples; both facts are asserted.
    """
    L = Fraction(L)
    A = Fraction(A)
    vs = path.vertices
    out = [vs[0]]
    params = [path.param(0)]
    for i in range(len(vs) - 1):
        t0, t1 = path.param(i), path.param(i + 1)
        seg = geodesic(space, vs[i], vs[i + 1]).vertices
        k = len(seg) - 1
        if k == 0:
            out.append(vs[i + 1])
            params.append(t1)
            continue
        for j in range(1, k + 1):
            out.append(seg[j])
            params.append(t0 + (t1 - t0) * Fraction(j, k))
    result = PathSeg(tuple(out), tuple(params))
    verdict = check_qg(space, result, L, 2 * (L + A))
    if not verdict:
        raise AssertionError(f"tame produced a bad quasi-geodesic: {verdict.violation}")
    if hausdorff(space, vs, out) > L + A:
        raise AssertionError("tame exceeded the Hausdorff bound")
    if path.params is None and all(path.vertices[i] == out[i] for i in range(len(out))) and len(out) == len(vs):
        return path
    return result


def iter_pairs(n: int) -> Iterator[tuple[int, int]]:
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j
