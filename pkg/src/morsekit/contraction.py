"""Contraction, Morse and recurrence profiles of subsets.

A profile tabulates, for each r up to the horizon, the largest observed
diam pi(x) u pi(y) over pairs with d(x, y) <= d(x, Z) <= r and x in the
ball B(o, radius).  Finite data can refute a contraction bound but never
certify sublinearity, so verdicts only say "consistent at horizon" or give a
witness.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constants import SublinearFn
from .kernels import (ball_graph, ball_union, bfs_depths, multi_source_bfs,
                      pmap, profile_sweep)
from .projection import (ProjectionError, describe_target, is_parameterized,
                         mark_geodesic, pair_diam, project, set_diam,
                         target_points)
from .reports import CheckReport
from .space import (BALL_RADIUS_CAP, GraphSpace, GroupSpace, LineSchema,
                    MetricSpace, PathSeg, RaySchema, SpaceError, SpaceSpec,
                    check_qg, enumerate_geodesics, hausdorff)

MM_FACTORS = (1, 2, 3, 4)
TREE_UNIVERSE_CAP = 4_000_000
GENERIC_UNIVERSE_CAP = 250_000
# refuse exhaustive profiles whose working ball B(o, 2 radius) is larger
EXHAUSTIVE_LIMIT = {True: 12_000_000, False: 1_000_000}


def vertex_label(space: MetricSpace, v) -> str:
    if isinstance(space, GroupSpace):
        return space.word_str(v) or "1"
    return str(v)


@dataclass
class ContractionProfile:
    """Tabulated r -> max observed projection diameter, with verdicts."""

    space: MetricSpace = field(repr=False)
    target: str
    radius: int
    samples: list
    witnesses: list  # per r: (x, y) or None
    mode: str = "exhaustive"
    seed: int | None = None
    count: int | None = None
    pairs: int = 0
    strong_bound: int | None = None
    masur_minsky: tuple | None = None  # (A, B)
    refuted_linear: tuple | None = None  # (x, y, d(x,Z), diam)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(a > b for a, b in zip(self.samples, self.samples[1:])):
            raise AssertionError("profile samples must be non-decreasing")

    def as_table(self) -> dict:
        return dict(enumerate(self.samples))

    def rows(self) -> list:
        out = []
        for r, (m, w) in enumerate(zip(self.samples, self.witnesses)):
            wx, wy = ("", "") if w is None else (vertex_label(self.space, w[0]), vertex_label(self.space, w[1]))
            out.append((r, m, wx, wy))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "max_diam", "witness_x", "witness_y"])
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        lab = lambda v: vertex_label(self.space, v)  # noqa: E731
        ref = None
        if self.refuted_linear is not None:
            x, y, d, diam = self.refuted_linear
            ref = {"x": lab(x), "y": lab(y), "dist_to_target": d, "diam": diam}
        return {
            "target": self.target,
            "radius": self.radius,
            "mode": self.mode,
            "seed": self.seed,
            "count": self.count,
            "pairs": self.pairs,
            "samples": [{"r": r, "max_diam": m, "witness_x": wx or None, "witness_y": wy or None}
                        for r, m, wx, wy in self.rows()],
            "verdicts": {
                "strong_bound": self.strong_bound,
                "masur_minsky": None if self.masur_minsky is None else
                {"A": self.masur_minsky[0], "B": self.masur_minsky[1]},
                "refuted_linear": ref,
            },
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# target preparation


def _prepare_target(space: MetricSpace, Z):
    """Normalize Z; returns (Z, geodesic flag)."""
    if isinstance(Z, (RaySchema, LineSchema)):
        if not isinstance(space, GroupSpace):
            raise SpaceError("rays and lines need a group space")
        return Z, True
    if isinstance(Z, PathSeg):
        if getattr(Z, "_geodesic", False):
            return Z, True
        if Z.is_geodesic(space):
            return mark_geodesic(space, Z), True
        return frozenset(Z.vertices), False
    pts = frozenset(Z)
    if not pts:
        raise ProjectionError("empty target")
    return pts, False


def _universe(space: MetricSpace, G: int):
    if isinstance(space, GraphSpace):
        return ball_graph(space, max(space._rows[0]))
    return ball_graph(space, G)


def _target_sources(space, Z, U, G):
    """Ids and parameters of Z inside U, plus the Z points outside U that
    can still be nearest to some vertex of U, as (param, vertex, norm)."""
    if isinstance(Z, (RaySchema, LineSchema)):
        # a point z outside U is only relevant to y in U if |z| <= |y| + d(y, Z) <= 2G
        horizon = 2 * G + 2 * space.norm(Z.basepoint) + 1
        pts = target_points(space, Z, horizon)
    else:
        pts = target_points(space, Z, 0)
    ids, params, outside = [], [], []
    for t, v in pts:
        i = U.id_of(v)
        if i is None:
            outside.append((t, v, space.norm(v)))
        else:
            ids.append(i)
            params.append(t)
    if not ids:
        raise ProjectionError("target does not meet the working ball")
    return np.asarray(ids, dtype=np.int32), np.asarray(params, dtype=np.int32), outside


def _patch(space, U, idx, dz, lo, hi, outside, anchors=None):
    """Correct BFS data for Z points lying outside the working ball.

    Distances inside U are exact, so an outside point z can only tie or
    beat the BFS value at y if both lower bounds |z| - |y| and
    d(y, a) - d(a, z) (a an anchor of Z inside U) are <= d_U(y, Z).
    """
    if not outside or len(idx) == 0:
        return 0
    reach = U.norms[idx] + dz[idx]
    touched = set()
    for t, z, nz in outside:
        cand = reach >= nz
        if anchors is not None:
            for s, depth in anchors:
                cand &= depth[idx] - abs(t - s) <= dz[idx]
        for i in idx[cand].tolist():
            d = space.dist(U.element(i), z)
            if d < dz[i]:
                dz[i], lo[i], hi[i] = d, t, t
            elif d == dz[i]:
                lo[i], hi[i] = min(lo[i], t), max(hi[i], t)
            else:
                continue
            touched.add(i)
    return len(touched)


def _anchors(U, Z, src, par, outside):
    """BFS depths from the extreme in-ball parameters of a geodesic target,
    used to prune outside candidates."""
    if not outside or not is_parameterized(Z):
        return None
    out = []
    for k in {int(np.argmin(par)), int(np.argmax(par))}:
        out.append((int(par[k]), bfs_depths(U.indptr, U.indices, int(src[k]), -1)))
    return out


def _inner_ids(U, radius):
    cache = U.__dict__.setdefault("_inner", {})
    if radius not in cache:
        cache[radius] = np.nonzero(U.norms <= radius)[0].astype(np.int32)
    return cache[radius]


def _exhaustive_core(space, Z, radius, U=None, factors=MM_FACTORS):
    """Per-x sweep data over x in B(o, radius) with d(x, Z) <= radius.

    Returns (U, xs, dz_x, best, arg, mm) where mm[A] = best over the
    shrunken balls B(x, d(x,Z) // A).
    """
    G = 2 * radius
    if U is None:
        U = _universe(space, G)
    src, par, outside = _target_sources(space, Z, U, G)
    dz, lo, hi = multi_source_bfs(U.indptr, U.indices, src, par)
    anchors = _anchors(U, Z, src, par, outside)
    xs = _inner_ids(U, radius)
    patched = _patch(space, U, xs, dz, lo, hi, outside, anchors)
    xs = xs[(dz[xs] >= 0) & (dz[xs] <= radius)]
    radii = np.ascontiguousarray(dz[xs])
    mask = ball_union(U.indptr, U.indices, xs, radii)
    patched += _patch(space, U, np.nonzero(mask)[0], dz, lo, hi, outside, anchors)
    radii = np.ascontiguousarray(dz[xs])
    mm = {}
    for A in factors:
        r = radii if A == 1 else np.ascontiguousarray(radii // A)
        b, a, visits = profile_sweep(U.indptr, U.indices, xs, r, lo, hi)
        mm[A] = (b, a, int(visits.sum()))
    best, arg, _ = mm[1]
    return U, xs, radii, best, arg, mm, patched


def _set_core(space, Z, radius, factors=MM_FACTORS):
    """Python sweep for general vertex-set targets."""
    G = 2 * radius
    U = _universe(space, G)
    src, par, outside = _target_sources(space, Z, U, G)
    dz, lo, hi = multi_source_bfs(U.indptr, U.indices, src, par)
    xs = np.nonzero(U.norms <= radius)[0].astype(np.int32)
    _patch(space, U, xs, dz, lo, hi, outside)
    xs = xs[(dz[xs] >= 0) & (dz[xs] <= radius)]
    cache: dict = {}

    def proj(i):
        p = cache.get(i)
        if p is None:
            p = cache[i] = project(space, Z, U.element(i)).nearest
        return p

    radii = np.ascontiguousarray(dz[xs])
    mm = {A: (np.full(len(xs), -1, np.int32), np.full(len(xs), -1, np.int32), 0) for A in factors}
    ip, ix = U.indptr.tolist(), U.indices.tolist()
    pairs = 0
    for c, x in enumerate(xs.tolist()):
        px = proj(x)
        depth = {x: 0}
        order = [x]
        k = 0
        while k < len(order):
            v = order[k]
            k += 1
            if depth[v] < radii[c]:
                for w in ix[ip[v]:ip[v + 1]]:
                    if w not in depth:
                        depth[w] = depth[v] + 1
                        order.append(w)
        pairs += len(order)
        for v in order:
            d = set_diam(space, px | proj(v))
            for A in factors:
                b, a, _ = mm[A]
                if depth[v] <= radii[c] // A and d > b[c]:
                    b[c], a[c] = d, v
    mm = {A: (b, a, pairs) for A, (b, a, _) in mm.items()}
    best, arg, _ = mm[1]
    return U, xs, radii, best, arg, mm, 0


def _tables(radius, dzs, best, norms_x, order_key):
    """samples(r) and witness index per r from per-x data (cumulative in r)."""
    samples, wit = [], []
    for r in range(radius + 1):
        sel = np.nonzero(dzs <= r)[0]
        if len(sel) == 0:
            samples.append(0)
            wit.append(None)
            continue
        m = int(best[sel].max())
        top = sel[best[sel] == m]
        samples.append(max(m, 0))
        wit.append(int(top[np.lexsort((order_key[top], norms_x[top]))[0]]))
    return samples, wit


def _bounded(table: Sequence[int]) -> bool:
    """No growth over the upper half of the horizon."""
    R = len(table) - 1
    return R >= 2 and table[R] == table[R // 2]


def _verdicts(radius, dzs, mm, norms_x, ids):
    samples = _tables(radius, dzs, mm[1][0], norms_x, ids)[0]
    strong = samples[-1] if _bounded(samples) else None
    masur = None
    for A in sorted(mm):
        tab = _tables(radius, dzs, mm[A][0], norms_x, ids)[0]
        if _bounded(tab):
            masur = (A, tab[-1])
            break
    return strong, masur


def _refuted(dzs, best, norms_x, ids):
    ok = np.nonzero((dzs >= 1) & (best >= dzs))[0]
    if len(ok) == 0:
        return None
    # largest d(x, Z), then smallest norm, then first in ball order
    k = ok[np.lexsort((ids[ok], norms_x[ok], -dzs[ok]))[0]]
    return int(k)


def _profile_from_core(space, Z, radius, core, mode, details):
    U, xs, dzs, best, arg, mm, patched = core
    norms_x = U.norms[xs]
    samples, wit = _tables(radius, dzs, best, norms_x, xs)
    witnesses = [None if c is None else (U.element(int(xs[c])), U.element(int(arg[c]))) for c in wit]
    strong, masur = _verdicts(radius, dzs, mm, norms_x, xs)
    k = _refuted(dzs, best, norms_x, xs)
    ref = None
    if k is not None:
        ref = (U.element(int(xs[k])), U.element(int(arg[k])), int(dzs[k]), int(best[k]))
    details = dict(details, patched_vertices=patched)
    return ContractionProfile(space, describe_target(Z), radius, samples, witnesses, mode,
                              pairs=mm[1][2], strong_bound=strong, masur_minsky=masur,
                              refuted_linear=ref, details=details)


# ---------------------------------------------------------------------------
# sampled mode


def _random_factor_element(space: GroupSpace, f: int, length: int, rng) -> tuple:
    """Random element of factor ``f`` with word length exactly ``length``."""
    if length <= 0:
        return ()
    fac = space.factors[f]
    if fac.kind == "free":
        letters = []
        while len(letters) < length:
            x = int(rng.integers(1, fac.rank + 1)) * (1 if rng.integers(2) else -1)
            if letters and letters[-1] == -x:
                continue
            letters.append(x)
        return ((f, tuple(letters)),)
    cuts = np.sort(rng.integers(0, length + 1, size=fac.rank - 1))
    parts = np.diff(np.concatenate(([0], cuts, [length])))
    vec = tuple(int(p) * (1 if rng.integers(2) else -1) for p in parts)
    return ((f, vec),) if any(vec) else ()


def _sample_pairs(space, Z, radius, count, seed, ball):
    """Pre-generate (x, y) pairs single-threaded from the seed."""
    rng = np.random.default_rng(seed)
    sizes = space.ball_sizes(radius) if isinstance(space, GroupSpace) else None
    zpts = [v for _, v in target_points(space, Z, radius)
            if space.norm(v) <= radius] if is_parameterized(Z) else [v for v in Z if space.norm(v) <= radius]
    flat = isinstance(space, GroupSpace) and len(space.factors) > 1 and zpts
    dz_cache: dict = {}

    def dz(x):
        d = dz_cache.get(x)
        if d is None:
            d = dz_cache[x] = project(space, Z, x).distance
        return d

    pairs = []
    attempts = 0
    while len(pairs) < count and attempts < 20 * count:
        attempts += 1
        if flat and rng.integers(2):
            # adversarial: both points in one factor coset through a Z point
            z = zpts[int(rng.integers(len(zpts)))]
            f = int(rng.integers(len(space.factors)))
            x = space.mul(z, _random_factor_element(space, f, int(rng.integers(0, radius + 1)), rng))
            if space.norm(x) > radius:
                continue
            d = dz(x)
            if d > radius:
                continue
            y = space.mul(x, _random_factor_element(space, f, int(rng.integers(0, d + 1)), rng))
        else:
            x = ball[int(rng.integers(len(ball)))]
            d = dz(x)
            if d > radius:
                continue
            if sizes is not None:
                y = space.mul(x, ball[int(rng.integers(sizes[d]))])
            else:
                near = space.ball(d, x)
                y = near[int(rng.integers(len(near)))]
        pairs.append((x, y))
    return pairs


def _sampled(space, Z, radius, count, seed):
    ball = space.ball(radius)
    pairs = _sample_pairs(space, Z, radius, count, seed, ball)
    if not pairs:
        raise ProjectionError("no admissible pairs sampled")
    cache: dict = {}

    def proj(v):
        p = cache.get(v)
        if p is None:
            p = cache[v] = project(space, Z, v)
        return p

    # projections are the expensive part; evaluate them over the pool
    uniq = list(dict.fromkeys(v for p in pairs for v in p))
    for v, res in zip(uniq, pmap(lambda v: project(space, Z, v), uniq)):
        cache[v] = res
    n = len(pairs)
    dzs = np.zeros(n, dtype=np.int64)
    dxy = np.zeros(n, dtype=np.int64)
    diam = np.zeros(n, dtype=np.int64)
    for k, (x, y) in enumerate(pairs):
        px, py = proj(x), proj(y)
        dzs[k] = px.distance
        dxy[k] = space.dist(x, y)
        diam[k] = pair_diam(space, Z, px, py)
    norms = np.array([space.norm(x) for x, _ in pairs], dtype=np.int64)
    order = np.arange(n)
    mm = {}
    for A in MM_FACTORS:
        ok = dxy * A <= dzs
        mm[A] = (np.where(ok, diam, -1), None, n)
    samples, wit = _tables(radius, dzs, diam, norms, order)
    strong, masur = _verdicts(radius, dzs, mm, norms, order)
    k = _refuted(dzs, diam, norms, order)
    ref = None if k is None else (pairs[k][0], pairs[k][1], int(dzs[k]), int(diam[k]))
    return ContractionProfile(space, describe_target(Z), radius, samples,
                              [None if c is None else pairs[c] for c in wit],
                              "sampled", seed=seed, count=count, pairs=n,
                              strong_bound=strong, masur_minsky=masur, refuted_linear=ref)


# ---------------------------------------------------------------------------
# public profiling API


def profile(space: MetricSpace, Z, radius: int, mode: str = "exhaustive",
            seed: int = 0, count: int = 20000) -> ContractionProfile:
    """Contraction profile of Z over x in B(o, radius).

    ``mode`` is ``"exhaustive"`` (every admissible pair, exact) or
    ``"sampled"`` (``count`` pairs from a seeded generator, half of them
    drawn inside factor cosets through Z in free products).
    """
    if radius < 0:
        raise SpaceError("radius must be non-negative")
    if space.radius_cap is not None and 2 * radius > space.radius_cap:
        raise SpaceError(f"radius {radius} exceeds ball cap {space.radius_cap // 2}")
    Z, geo = _prepare_target(space, Z)
    if mode == "sampled":
        return _sampled(space, Z, radius, count, seed)
    if mode != "exhaustive":
        raise SpaceError(f"unknown mode {mode!r}")
    limit = EXHAUSTIVE_LIMIT[bool(getattr(space, "is_tree", False))]
    if _universe_size(space, 2 * radius) > limit:
        raise SpaceError(f"exhaustive profile at radius {radius} needs about "
                         f"{_universe_size(space, 2 * radius):.3g} vertices; use mode='sampled' "
                         f"or radius <= {_exhaustive_radius(space, radius)}")
    core = _exhaustive_core(space, Z, radius) if geo else _set_core(space, Z, radius)
    return _profile_from_core(space, Z, radius, core, "exhaustive", {})


def check_contracting(prof: ContractionProfile, rho: SublinearFn) -> CheckReport:
    """Pass iff samples(r) <= rho(r) at every tabulated r."""
    rep = CheckReport("contracting", "contracting set definition",
                      {"target": prof.target, "rho": rho.describe(), "radius": prof.radius,
                       "mode": prof.mode})
    for r, m in enumerate(prof.samples):
        w = prof.witnesses[r]
        wd = {} if w is None else {"r": r, "x": vertex_label(prof.space, w[0]),
                                   "y": vertex_label(prof.space, w[1])}
        rep.record(r, rho(r), m, wd)
    rep.extra["consistent_at_horizon"] = not rep.violations
    return rep


# ---------------------------------------------------------------------------
# detour candidates for recurrence and Morse estimates


def greedy_geodesic(space: MetricSpace, x, y, style: str = "first", rng=None) -> list:
    """A geodesic from x to y choosing, at each step, among the neighbors
    that reduce the distance: the first or last in generator order, a
    rotating choice (staircases in flats) or a random one."""
    path = [x]
    v = x
    d = space.dist(x, y)
    step = 0
    while d > 0:
        good = [w for w in space.neighbors(v) if space.dist(w, y) == d - 1]
        if style == "first":
            w = good[0]
        elif style == "last":
            w = good[-1]
        elif style == "alternate":
            w = good[step % len(good)]
        else:
            w = good[int(rng.integers(len(good)))]
        path.append(w)
        v, d, step = w, d - 1, step + 1
    return path


LEG_STYLES = ("first", "last", "alternate")


@dataclass
class Candidate:
    i: int
    j: int
    path: PathSeg
    shape: str


def _target_list(space, Z, horizon):
    Z, geo = _prepare_target(space, Z)
    if not geo:
        raise SpaceError("target must be a geodesic segment or ray")
    if isinstance(Z, LineSchema):
        pts = [v for _, v in target_points(space, Z, horizon)]
    elif isinstance(Z, RaySchema):
        pts = Z.vertices(space, horizon)
    else:
        pts = list(Z.vertices)
    return Z, pts


def detour_candidates(space: MetricSpace, zpts: list, budget: int, seed: int,
                      max_ratio=None) -> list:
    """Structured then random waypoint detours with endpoints on ``zpts``.

    Structured candidates go through the midpoint pushed off by a generator
    power, legs in every style combination; random ones use random pushes
    (generator powers, factor elements) and random leg styles.  When
    ``max_ratio`` is given, candidates longer than max_ratio * d(x, y) are
    dropped before counting against the budget.
    """
    rng = np.random.default_rng(seed)
    n = len(zpts)
    gens = list(range(len(space.neighbors(space.o)))) if isinstance(space, GroupSpace) else []
    out: list[Candidate] = []
    seen = set()

    def leg(a, b, style):
        return greedy_geodesic(space, a, b, style, rng)

    def push(v, h):
        if isinstance(space, GroupSpace):
            return space.mul(v, h)
        # explicit graphs: walk h as a list of neighbor indices
        for k in h:
            nb = space.neighbors(v)
            v = nb[k % len(nb)]
        return v

    def add(i, j, waypoints, styles, shape):
        x, y = zpts[i], zpts[j]
        pts = [x] + waypoints + [y]
        verts = [x]
        for (a, b), st in zip(zip(pts, pts[1:]), styles):
            verts.extend(leg(a, b, st)[1:])
        d = space.dist(x, y)
        if d == 0:
            return
        if max_ratio is not None and len(verts) - 1 > max_ratio * d:
            return
        key = tuple(verts)
        if key in seen:
            return
        seen.add(key)
        out.append(Candidate(i, j, PathSeg(key), shape))

    gen_elems = [space._gen_elem[g] for g in gens] if isinstance(space, GroupSpace) else []

    def power(g, q):
        if isinstance(space, GroupSpace):
            h = ()
            for _ in range(q):
                h = space.mul(h, gen_elems[g])
            return h
        return [g] * q

    # structured: (0, j) pairs, midpoint pushes by generator powers
    for j in range(1, n):
        if len(out) >= budget:
            break
        m = j // 2
        for g in (gens or [0, 1]):
            for q in sorted({max(1, (j + 1) // 2), j}):
                w = push(zpts[m], power(g, q))
                for s1 in LEG_STYLES:
                    for s2 in LEG_STYLES:
                        add(0, j, [w], (s1, s2), f"mid-push g{g}^{q}")
                # box: push both ends
                w1, w2 = push(zpts[0], power(g, q)), push(zpts[j], power(g, q))
                add(0, j, [w1, w2], ("first", "alternate", "first"), f"box g{g}^{q}")
                if len(out) >= budget:
                    break
    # random
    tries = 0
    while len(out) < budget and tries < 50 * budget and n >= 2:
        tries += 1
        i = int(rng.integers(n - 1))
        j = int(rng.integers(i + 1, n))
        d = j - i
        k = int(rng.integers(i, j + 1))
        kind = int(rng.integers(3))
        if isinstance(space, GroupSpace) and kind == 0 and len(space.factors) > 1:
            h = _random_factor_element(space, int(rng.integers(len(space.factors))),
                                       int(rng.integers(1, d + 1)), rng)
        elif gens:
            h = power(int(rng.integers(len(gens))), int(rng.integers(1, d + 1)))
        else:
            h = [int(rng.integers(8)) for _ in range(int(rng.integers(1, d + 1)))]
        styles = [LEG_STYLES[int(rng.integers(3))] if rng.integers(4) else "random" for _ in range(3)]
        if kind == 2:
            k2 = int(rng.integers(k, j + 1))
            add(i, j, [push(zpts[k], h), push(zpts[k2], h)], styles, "random-box")
        else:
            add(i, j, [push(zpts[k], h)], styles[:2], "random-push")
    return out[:budget]


def _dist_to_points(space, path, pts) -> int:
    return min(space.dist(v, z) for v in path for z in pts)


@dataclass
class RecurrenceEstimate:
    estimate: int
    by_separation: dict
    used: int
    rejected: int
    witness: Candidate | None

    def to_dict(self, space=None) -> dict:
        w = None
        if self.witness is not None:
            w = {"i": self.witness.i, "j": self.witness.j, "shape": self.witness.shape,
                 "length": self.witness.path.length}
        return {"estimate": self.estimate, "by_separation": self.by_separation,
                "used": self.used, "rejected": self.rejected, "witness": w}


def recurrence(space: MetricSpace, Z, C, t, budget: int = 500, seed: int = 0,
               horizon: int = 12) -> RecurrenceEstimate:
    """Estimate the recurrence function D(C, t) from detour paths.

    For each path p from x to y (both on Z) of length <= C d(x, y), the
    contribution is the least d(p, z) over z in Z with
    min(d(z, x), d(z, y)) >= t d(x, y); the estimate is the largest
    contribution.  Pairs so close that no vertex between them qualifies
    are skipped and counted as rejected.
    """
    C, t = Fraction(C), Fraction(t)
    if C < 1 or not 0 < t < Fraction(1, 2):
        raise SpaceError("need C >= 1 and 0 < t < 1/2")
    Zn, zpts = _target_list(space, Z, horizon)
    cands = detour_candidates(space, zpts, budget, seed, max_ratio=C)
    ext = _extended_points(space, Zn, zpts, horizon, cands)

    def score(c: Candidate):
        x, y = zpts[c.i], zpts[c.j]
        d = space.dist(x, y)
        if 2 * math.ceil(t * d) > d:
            # no vertex of [x, y] is t-far from both ends; nothing to recur to
            return None
        qual = [z for z in ext if min(space.dist(z, x), space.dist(z, y)) >= t * d]
        if not qual:
            return None
        return d, _dist_to_points(space, c.path.vertices, qual)

    scores = pmap(score, cands)
    table: dict = {}
    best, wit, used = -1, None, 0
    for c, s in zip(cands, scores):
        if s is None:
            continue
        used += 1
        d, val = s
        table[d] = max(table.get(d, 0), val)
        if val > best:
            best, wit = val, c
    if used == 0:
        raise SpaceError("no valid sample paths generated within budget")
    return RecurrenceEstimate(best, dict(sorted(table.items())), used, budget - used, wit)


def _extended_points(space, Z, zpts, horizon, cands):
    """Target points far enough out that no qualifying point beyond them
    can be nearer to any candidate path."""
    if not isinstance(Z, (RaySchema, LineSchema)) or not cands:
        return zpts
    span = max(c.j + 2 * c.path.length + (c.j - c.i) + 1 for c in cands)
    if isinstance(Z, RaySchema):
        return Z.vertices(space, max(span, horizon))
    return [v for _, v in target_points(space, Z, max(span, horizon))]


@dataclass
class MorseEntry:
    L: Fraction
    A: Fraction
    estimate: int | None
    passed: int
    candidates: int
    by_separation: dict
    witness: Candidate | None

    def to_dict(self) -> dict:
        return {"L": self.L, "A": self.A, "estimate": self.estimate, "passed": self.passed,
                "candidates": self.candidates, "by_separation": self.by_separation,
                "witness": None if self.witness is None else
                {"i": self.witness.i, "j": self.witness.j, "shape": self.witness.shape}}


def morse_profile(space: MetricSpace, Z, grid: Sequence, budget: int = 500, seed: int = 0,
                  horizon: int = 12) -> list:
    """Per (L, A): the farthest any detour (L, A)-quasi-geodesic with
    endpoints on Z strays from Z."""
    if not grid:
        raise SpaceError("empty constant grid")
    Zn, zpts = _target_list(space, Z, horizon)
    cands = detour_candidates(space, zpts, budget, seed)
    far_cache: dict = {}

    def far(c: Candidate) -> int:
        key = c.path.vertices
        if key not in far_cache:
            far_cache[key] = max(project(space, Zn, v).distance for v in c.path.vertices)
        return far_cache[key]

    out = []
    for L, A in grid:
        L, A = Fraction(L), Fraction(A)
        ok = pmap(lambda c: bool(check_qg(space, c.path, L, A)), cands)
        est, wit, table = None, None, {}
        for c, good in zip(cands, ok):
            if not good:
                continue
            v = far(c)
            d = space.dist(zpts[c.i], zpts[c.j])
            table[d] = max(table.get(d, 0), v)
            if est is None or v > est:
                est, wit = v, c
        out.append(MorseEntry(L, A, est, sum(ok), len(cands), dict(sorted(table.items())), wit))
    return out


# ---------------------------------------------------------------------------
# uniformity over segments


def _universe_size(space: MetricSpace, G: int) -> float:
    if isinstance(space, GraphSpace):
        return len(space.adj)
    k = len(space.generators)
    if space.is_tree:
        return 1 + k * sum((k - 1) ** j for j in range(G))
    if len(space.factors) == 1:
        n = space.factors[0].rank
        # lattice points with l1 norm <= G
        return sum(math.comb(n, i) * math.comb(G, i) * 2 ** i for i in range(n + 1))
    sizes = space.ball_sizes(min(G, 4))
    if G <= 4:
        return sizes[G]
    growth = (sizes[4] - sizes[3]) / max(1, sizes[3] - sizes[2])
    return sizes[4] + (sizes[4] - sizes[3]) * sum(growth ** j for j in range(1, G - 3))


def _feasible_radius(space, radius):
    cap = TREE_UNIVERSE_CAP if getattr(space, "is_tree", False) else GENERIC_UNIVERSE_CAP
    r = radius
    while r > 0 and _universe_size(space, 2 * r) > cap:
        r -= 1
    return r


def _exhaustive_radius(space, radius):
    limit = EXHAUSTIVE_LIMIT[bool(getattr(space, "is_tree", False))]
    while radius > 0 and _universe_size(space, 2 * radius) > limit:
        radius -= 1
    return radius


def _generator_symmetries(space: GroupSpace) -> list:
    """Signed permutations of the generators within each factor, as maps on
    generator names.  Each one induces a graph automorphism fixing o."""
    per_factor = []
    for f, fac in enumerate(space.factors):
        k = len(fac.symbols)
        opts = []
        for perm in itertools.permutations(range(k)):
            for signs in itertools.product((1, -1), repeat=k):
                opts.append({(i, s): (perm[i], s * signs[i]) for i in range(k) for s in (1, -1)})
        per_factor.append(opts)
    out = []
    for choice in itertools.product(*per_factor):
        m = {}
        for g in space.generators:
            i, s = choice[g.factor][(g.index, g.sign)]
            m[g.name] = space.factors[g.factor].symbols[i] + ("" if s > 0 else "-")
        out.append(m)
    return out


def _orbit_representatives(space, pts: list) -> list:
    """First member, in the given order, of each orbit of ``pts`` under the
    generator symmetries."""
    if not isinstance(space, GroupSpace):
        return pts
    syms = _generator_symmetries(space)
    seen: set = set()
    reps = []
    for g in pts:
        if g in seen:
            continue
        reps.append(g)
        word = [s.name for s in space.spell(g)]
        for m in syms:
            seen.add(space.element([space.generator(m[n]) for n in word]))
    return reps


def _segments(space, radius, geodesic_budget):
    # isometries fixing o carry profiles to profiles, so one endpoint per
    # orbit suffices; the first in ball order keeps witness selection intact
    segs = []
    for g in _orbit_representatives(space, space.ball(radius)[1:]):
        paths, _ = enumerate_geodesics(space, space.o, g, geodesic_budget)
        segs.extend(paths)
    return segs


def _merge(space, radius, parts, mode, details):
    samples = [0] * (radius + 1)
    wit = [None] * (radius + 1)
    ref = None
    pairs = 0
    for p, seg in parts:
        pairs += p.pairs
        for r in range(min(radius, p.radius) + 1):
            if p.samples[r] > samples[r] or (wit[r] is None and p.witnesses[r] is not None):
                samples[r], wit[r] = p.samples[r], p.witnesses[r]
        if p.refuted_linear is not None and (ref is None or p.refuted_linear[2] > ref[2]):
            ref = p.refuted_linear
    for r in range(1, radius + 1):
        if samples[r] < samples[r - 1]:
            samples[r], wit[r] = samples[r - 1], wit[r - 1]
    strong = samples[-1] if _bounded(samples) else None
    return ContractionProfile(space, "geodesic segments", radius, samples, wit, mode, pairs=pairs,
                              strong_bound=strong, refuted_linear=ref, details=details)


def _embed_factor(space: GroupSpace, f: int):
    sub = GroupSpace(SpaceSpec(space.factors[f].kind, rank=space.factors[f].rank,
                               alphabet=space.factors[f].symbols))
    return sub, (lambda v: tuple((f, val) for _, val in v))


def uniformity_profile(space: MetricSpace, radius: int, geodesic_budget: int = 256,
                       radius_cap: int | None = None) -> ContractionProfile:
    """Pointwise max of exhaustive profiles of geodesic segments [o, g],
    g in B(o, radius).

    Every segment between ball vertices is a translate of one of these.
    When the working ball B(o, 2 radius) is too large, segments are swept
    exhaustively at the largest feasible radius and each free-product
    factor (an isometrically embedded convex subgroup) is swept at the full
    radius; its witnesses are genuine witnesses in the product.
    """
    if space.radius_cap is not None and 2 * radius > space.radius_cap:
        raise SpaceError(f"radius {radius} exceeds ball cap {space.radius_cap // 2}")
    r0 = _feasible_radius(space, radius) if radius_cap is None else min(radius, radius_cap)
    parts = []
    details: dict = {"exhaustive_radius": r0, "geodesic_budget": geodesic_budget}
    if r0 >= 1:
        U = _universe(space, 2 * r0)
        segs = _segments(space, r0, geodesic_budget)
        details["segments"] = len(segs)
        for seg in segs:
            Zs = mark_geodesic(space, seg)
            core = _exhaustive_core(space, Zs, r0, U=U, factors=(1,))
            parts.append((_profile_from_core(space, Zs, r0, core, "exhaustive", {}), seg))
    if r0 == radius:
        return _merge(space, radius, parts, "exhaustive", details)
    if not isinstance(space, GroupSpace) or len(space.factors) < 2:
        details["note"] = "beyond the exhaustive radius no further segments were swept"
        return _merge(space, radius, parts, "partial", details)
    embedded = []
    for f in range(len(space.factors)):
        sub, emb = _embed_factor(space, f)
        p = uniformity_profile(sub, radius, geodesic_budget)
        p.witnesses = [None if w is None else (emb(w[0]), emb(w[1])) for w in p.witnesses]
        if p.refuted_linear is not None:
            x, y, d, dm = p.refuted_linear
            p.refuted_linear = (emb(x), emb(y), d, dm)
        p.space = space
        embedded.append({"factor": f, "mode": p.mode, "samples": p.samples})
        parts.append((p, None))
    details["embedded_factors"] = embedded
    return _merge(space, radius, parts, "exhaustive+embedded", details)
