"""Property checkers for the quantitative statements about contracting sets,
and the two constructive path surgeries (escape concatenation, tail wagging).

Distances are integers and constants exact where possible, so every
comparison is exact.  Ray statements are checked up to a finite horizon.
Instances that fail a precondition are skipped and counted.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constants import SublinearFn, escape_constants, kappa, kappa_prime, lambda_
from .contraction import (_feasible_radius, _universe_size, check_contracting, profile,
                          vertex_label)
from .kernels import pmap
from .projection import describe_target, is_parameterized, target_points
from .reports import CheckReport
from .space import (GroupSpace, LineSchema, MetricSpace, PathSeg, RaySchema, SpaceError,
                    check_qg, cross_matrix, enumerate_geodesics, geodesic, space_name, tame)


class CheckerError(SpaceError):
    """A checker's precondition failed; the message names which one."""


ANCHORS = {
    "git": "geodesic image theorem",
    "qgit": "quasi-geodesic image theorem",
    "divagation": "divagation estimate",
    "hausdorff": "fellow-travelling Hausdorff bound",
    "keylemma": "key lemma on returning rays",
    "escape": "escape concatenation",
    "wag": "tail wagging",
    "qgit2": "quasi-geodesic image theorem, sublinear form",
}


def _q(x):
    """Exact Fractions where possible; floats pass through."""
    return x if isinstance(x, float) else Fraction(x)


def _floor(x) -> int:
    return math.floor(x)


# ---------------------------------------------------------------------------
# distances to a target


def as_path(space: MetricSpace, ray, horizon: int) -> PathSeg:
    """Rays are truncated at ``horizon``; paths are returned unchanged."""
    if isinstance(ray, RaySchema):
        return ray.truncate(space, horizon)
    if isinstance(ray, PathSeg):
        return ray
    raise CheckerError(f"expected a ray or path, got {type(ray).__name__}")


@dataclass
class TargetRows:
    """d(p, Z) and the parameter range of pi_Z(p) for each point p."""

    dist: np.ndarray
    pmin: np.ndarray
    pmax: np.ndarray
    nearest: list | None = None  # only for unparameterized targets

    def spread(self, idx: Sequence[int], space: MetricSpace | None = None) -> int:
        """diam of the union of projections of the given points."""
        idx = list(idx)
        if self.nearest is None:
            return int(self.pmax[idx].max() - self.pmin[idx].min())
        pts = set().union(*(self.nearest[i] for i in idx))
        D = cross_matrix(space, list(pts), list(pts))
        return int(D.max())


def target_rows(space: MetricSpace, Z, pts: Sequence) -> TargetRows:
    pts = list(pts)
    if isinstance(Z, (RaySchema, LineSchema)):
        base = cross_matrix(space, pts, [Z.basepoint])[:, 0]
        tz = target_points(space, Z, 2 * int(base.max()) + 1)
    else:
        tz = target_points(space, Z, 0)
    D = cross_matrix(space, pts, [v for _, v in tz])
    dz = D.min(axis=1)
    if not is_parameterized(Z):
        zs = [v for _, v in tz]
        near = [frozenset(zs[j] for j in np.flatnonzero(row == m)) for row, m in zip(D, dz)]
        return TargetRows(dz, dz * 0, dz * 0, near)
    params = np.array([t for t, _ in tz], dtype=np.int64)
    hit = D == dz[:, None]
    big = np.iinfo(np.int64).max
    pmin = np.where(hit, params[None, :], big).min(axis=1)
    pmax = np.where(hit, params[None, :], -big).max(axis=1)
    return TargetRows(dz, pmin, pmax)


def path_to_path(space: MetricSpace, xs: Sequence, ys: Sequence) -> np.ndarray:
    """d(xs[i], ys) for each i."""
    return cross_matrix(space, list(xs), list(ys)).min(axis=1)


def _report(kind: str, space: MetricSpace, Z, rho: SublinearFn | None, **params) -> CheckReport:
    base = {"space": space_name(space)}
    if Z is not None:
        base["Z"] = describe_target(Z)
    if rho is not None:
        base["rho"] = rho.describe()
    base.update(params)
    return CheckReport(kind, ANCHORS[kind], base)


def _label(space, v) -> str:
    return vertex_label(space, v)


def _path_label(space, path: PathSeg) -> list[str]:
    return [_label(space, v) for v in path.vertices]


# ---------------------------------------------------------------------------
# geodesic image theorem


def interval(space: MetricSpace, x, y) -> list:
    """All vertices lying on some geodesic from x to y."""
    d = space.dist(x, y)
    layer = {x}
    out = [x]
    for k in range(1, d + 1):
        nxt = set()
        for v in layer:
            for w in space.neighbors(v):
                if w not in nxt and space.dist(w, y) == d - k:
                    nxt.add(w)
        layer = nxt
        out.extend(sorted(nxt, key=repr))
    return out


GIT_BALL_LIMIT = 200_000


def _point_pool(space: MetricSpace, horizon: int, size: int, rng: random.Random) -> list:
    """The ball B(o, horizon) in (norm, repr) order when it is small;
    otherwise ``size`` distinct endpoints of random words of length at most
    ``horizon``, in the same order."""
    if not isinstance(space, GroupSpace) or _universe_size(space, horizon) <= GIT_BALL_LIMIT:
        return sorted(space.ball(horizon), key=lambda v: (space.norm(v), repr(v)))
    pool = set()
    for _ in range(size):
        word = [rng.choice(space.generators) for _ in range(rng.randint(0, horizon))]
        pool.add(space.element(word))
    return sorted(pool, key=lambda v: (space.norm(v), repr(v)))


def check_git(space: MetricSpace, Z, rho: SublinearFn, horizon: int = 10, budget: int = 2000,
              seed: int = 0, geodesic_budget: int = 16) -> CheckReport:
    """Trapping of geodesics with endpoints near Z, and a sublinearity
    estimate for the projections of geodesics far from Z.

    Endpoints come from the ball of radius ``horizon`` (sampled by random
    words when the ball is large); the precondition (Z is rho-contracting
    at the largest exhaustively profiled radius) is checked first.
    """
    cap = 4 if getattr(space, "is_tree", True) else 3
    prof = profile(space, Z, min(horizon, cap, _feasible_radius(space, horizon)))
    pre = check_contracting(prof, rho)
    if not pre.passed:
        raise CheckerError(f"precondition failed: Z is not rho-contracting at radius {prof.radius}")
    k = kappa(rho, 1, 0)
    kp = kappa_prime(rho, 1, 0)
    rep = _report("git", space, Z, rho, horizon=horizon, budget=budget, seed=seed,
                  kappa=k, kappa_prime=kp)
    rng = random.Random(seed)
    ball = _point_pool(space, horizon, 4 * budget, rng)
    rows = target_rows(space, Z, ball)
    near = [v for v, d in zip(ball, rows.dist) if d <= k]
    trap_pairs = [(rng.choice(near), rng.choice(near)) for _ in range(budget // 2)] if near else []
    # y within 2(d(x, Z) - kappa) of x keeps every geodesic [x, y] kappa-far from Z
    dz = dict(zip(ball, rows.dist))
    far = [v for v in ball if dz[v] > k]
    balls: dict = {}
    far_pairs = []
    for _ in range(budget - len(trap_pairs) if far else 0):
        x = rng.choice(far)
        # any smaller radius keeps the condition; cap it at an enumerable ball
        rad = _floor(2 * (dz[x] - k))
        while rad > 0 and isinstance(space, GroupSpace) and _universe_size(space, rad) > GIT_BALL_LIMIT:
            rad -= 1
        if isinstance(space, GroupSpace):
            # left translation by x carries B(o, rad) onto B(x, rad)
            if rad not in balls:
                balls[rad] = space.ball(rad)
            y = space.mul(x, rng.choice(balls[rad]))
        else:
            y = rng.choice(space.ball(rad, center=x))
        far_pairs.append((x, y))

    def trap(pair):
        x, y = pair
        iv = interval(space, x, y)
        r = target_rows(space, Z, iv)
        i = int(np.argmax(r.dist))
        return int(r.dist[i]), iv[i]

    for n, (pair, (obs, w)) in enumerate(zip(trap_pairs, pmap(trap, trap_pairs))):
        rep.record(n, kp, obs, {"x": _label(space, pair[0]), "y": _label(space, pair[1]),
                                "far_point": _label(space, w), "part": "trapping"})

    def sub(pair):
        x, y = pair
        paths, _ = enumerate_geodesics(space, x, y, geodesic_budget)
        out = []
        for p in paths:
            r = target_rows(space, Z, p.vertices)
            if r.dist.min() < k:
                continue
            out.append((max(int(r.dist[0]), int(r.dist[-1])), r.spread(range(len(p)), space)))
        return out

    table: dict[int, int] = {}
    used = 0
    for pair, res in zip(far_pairs, pmap(sub, far_pairs)):
        if not res:
            rep.skip("geodesic enters the kappa-neighbourhood")
            continue
        used += 1
        for r, diam in res:
            table[r] = max(table.get(r, 0), diam)
    env, best = {}, 0
    for r in sorted(table):
        best = max(best, table[r])
        env[r] = best
    ratios = [(r, Fraction(v, r)) for r, v in env.items() if r >= k and r > 0]
    first = next((i for i, (_, q) in enumerate(ratios) if q > 0), len(ratios))
    tail = ratios[first:]
    bad = next(((r1, r2) for (r1, q1), (r2, q2) in zip(tail, tail[1:]) if q2 > q1), None)
    rep.extra = {"envelope": env, "sublinear_pairs": used, "ratio_non_increasing": bad is None}
    if bad is not None:
        rep.record(len(trap_pairs), 0, 1, {"part": "sublinearity", "ratio_increases_between": list(bad)})
    return rep


# ---------------------------------------------------------------------------
# quasi-geodesic image theorem


def qgit_bound(L, A, d0, dT, rho: SublinearFn):
    L, A = _q(L), _q(A)
    return (L * L + 1) / (L * L) * (A + dT) + (L * L - 1) / (L * L) * d0 + 2 * rho(d0)


def check_qgit(space: MetricSpace, Z, rho: SublinearFn, samples: Sequence, seed: int = 0) -> CheckReport:
    """``samples`` is a list of ``(path, L, A)``; each path must be an
    (L, A)-quasi-geodesic staying at distance >= kappa(rho, L, A) from Z."""
    rep = _report("qgit", space, Z, rho, samples=len(samples), seed=seed)

    def one(item):
        path, L, A = item
        if not check_qg(space, path, L, A):
            return "not an (L,A)-quasi-geodesic", None
        r = target_rows(space, Z, path.vertices)
        if r.dist.min() < kappa(rho, L, A):
            return "path enters the kappa-neighbourhood", None
        d0, dT = int(r.dist[0]), int(r.dist[-1])
        obs = r.spread([0, len(path) - 1], space)
        return None, (qgit_bound(L, A, d0, dT, rho), obs, d0, dT)

    for n, ((path, L, A), (why, res)) in enumerate(zip(samples, pmap(one, samples))):
        if why:
            rep.skip(why)
            continue
        bound, obs, d0, dT = res
        rep.record(n, bound, obs, {"path": _path_label(space, path), "L": L, "A": A, "d0": d0, "dT": dT})
    if rep.instances == 0:
        rep.inconclusive = True
    return rep


# ---------------------------------------------------------------------------
# divagation


def divagation_time(dists: Sequence[int], k) -> int | None:
    """Last index with distance <= floor(k); None if the final point is
    still that close (the close set is unbounded at the horizon)."""
    kf = _floor(k)
    if dists[-1] <= kf:
        return None
    return max(i for i, d in enumerate(dists) if d <= kf)


def check_divagation(space: MetricSpace, Z, rho: SublinearFn, beta, L=1, A=0, horizon: int = 30,
                     instance: int = 0, report: CheckReport | None = None) -> CheckReport:
    """d(beta_t, Z) >= (t - T0)/(2L) - 2(A + kappa) for every t up to the
    horizon, or beta stays within kappa' of Z when it never leaves."""
    rep = report or _report("divagation", space, Z, rho, L=L, A=A, horizon=horizon)
    path = as_path(space, beta, horizon)
    L, A = _q(L), _q(A)
    k = kappa(rho, L, A)
    r = target_rows(space, Z, path.vertices)
    if r.dist[0] > k:
        raise CheckerError(f"precondition failed: d(beta_0, Z) = {int(r.dist[0])} > kappa = {k}")
    t0 = divagation_time(r.dist.tolist(), k)
    witness = {"beta": _path_label(space, path)}
    if t0 is None:
        kp = kappa_prime(rho, L, A)
        rep.record(instance, kp, int(r.dist.max()), dict(witness, case="stays close", T0=None))
        return rep
    T0 = path.param(t0)
    worst = None
    for i, d in enumerate(r.dist.tolist()):
        need = (path.param(i) - T0) / (2 * L) - 2 * (A + k)
        slack = d - need
        if worst is None or slack < worst[0]:
            worst = (slack, i, need, d)
    _, i, need, d = worst
    rep.record(instance, need, d, dict(witness, case="escapes", T0=T0, t=path.param(i)), lower=True)
    return rep


# ---------------------------------------------------------------------------
# Hausdorff bound for fellow-travelling initial segments


def prefix_hausdorff(D: np.ndarray) -> np.ndarray:
    """H[r, s] = Hausdorff distance between rows [0, r] and columns [0, s]
    of the distance matrix D."""
    rows = np.maximum.accumulate(np.minimum.accumulate(D, axis=1), axis=0)
    cols = np.maximum.accumulate(np.minimum.accumulate(D, axis=0), axis=1)
    return np.maximum(rows, cols)


def check_hausdorff_lemma(space: MetricSpace, alpha, beta, rho: SublinearFn, L=1, A=0,
                          horizon: int = 30, instance: int = 0,
                          report: CheckReport | None = None) -> CheckReport:
    """For every pair (r, s) with d(alpha_r, beta_s) <= kappa, the initial
    segments alpha[0, r] and beta[0, s] are kappa'-Hausdorff close."""
    rep = report or _report("hausdorff", space, None, rho, L=L, A=A, horizon=horizon)
    a = as_path(space, alpha, horizon)
    b = as_path(space, beta, horizon)
    L, A = _q(L), _q(A)
    k = kappa(rho, L, A)
    kp = kappa_prime(rho, L, A)
    D = cross_matrix(space, a.vertices, b.vertices)
    if D[0, 0] > k:
        raise CheckerError(f"precondition failed: d(alpha_0, beta_0) = {int(D[0, 0])} > kappa = {k}")
    H = prefix_hausdorff(D)
    ok = D <= _floor(k)
    vals = np.where(ok, H, -1)
    r, s = np.unravel_index(int(np.argmax(vals)), vals.shape)
    rep.record(instance, kp, int(vals[r, s]),
               {"alpha": _path_label(space, a), "beta": _path_label(space, b), "r": int(r), "s": int(s),
                "close_pairs": int(ok.sum())})
    return rep


# ---------------------------------------------------------------------------
# key lemma


def check_keylemma(space: MetricSpace, alpha, beta, rho: SublinearFn, R: int, J: int, L=1, A=0,
                   horizon: int = 30, instance: int = 0,
                   report: CheckReport | None = None) -> CheckReport:
    """Every x on alpha with |x| >= R and d(x, beta) <= J has a point y
    between o and x with d(x, y) <= 2J + lambda and |y| >= R - 2J - lambda.

    y is the last point before x within kappa of beta (x itself when x is
    that close).  All x up to the horizon are checked; the worst is kept.
    """
    rep = report or _report("keylemma", space, None, rho, R=R, J=J, L=L, A=A, horizon=horizon)
    L, A = _q(L), _q(A)
    a = as_path(space, alpha, horizon)
    k = kappa(rho, L, A)
    lam = lambda_(rho, L, A)
    # points of beta past this parameter are farther than max(J, kappa) from alpha
    hb = _floor(L * (horizon + A + J + k)) + 1
    b = as_path(space, beta, hb)
    if a.start != b.start:
        raise CheckerError("precondition failed: alpha and beta must share their basepoint")
    db = path_to_path(space, a.vertices, b.vertices)
    norms = cross_matrix(space, a.vertices, [a.start])[:, 0]
    xs = [i for i in range(len(a)) if norms[i] >= R and db[i] <= J]
    if not xs:
        raise CheckerError(f"precondition failed: no x on alpha with |x| >= {R} and d(x, beta) <= {J}")
    kf = _floor(k)
    worst = None
    for i in xs:
        j = max(t for t in range(i + 1) if db[t] <= kf) if db[i] > kf else i
        dxy = space.dist(a[i], a[j])
        slack = min(2 * J + lam - dxy, int(norms[j]) - (R - 2 * J - lam))
        if worst is None or slack < worst[0]:
            worst = (slack, i, j, dxy)
    _, i, j, dxy = worst
    w = {"x": _label(space, a[i]), "y": _label(space, a[j]), "d_xy": dxy, "norm_y": int(norms[j]),
         "candidates": len(xs)}
    rep.record(instance, 2 * J + lam, dxy, dict(w, part="distance"))
    rep.record(instance, R - 2 * J - lam, int(norms[j]), dict(w, part="depth"), lower=True, count=False)
    ratio = Fraction(dxy, J)
    if rep.extra.get("max_ratio") is None or ratio > rep.extra["max_ratio"]:
        rep.extra["max_ratio"] = ratio
    return rep


# ---------------------------------------------------------------------------
# escape concatenation


@dataclass
class Surgery:
    """A constructed path with its verification report and the cut points."""

    path: PathSeg
    report: CheckReport
    points: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"points": self.points, "length": self.path.length, "report": self.report.to_dict()}


def _glue(space, parts) -> PathSeg:
    """Concatenate (vertices, params) pieces that share endpoints."""
    vs, ps = list(parts[0][0]), list(parts[0][1])
    for v, p in parts[1:]:
        if vs[-1] != v[0]:
            raise AssertionError("pieces do not share an endpoint")
        vs.extend(v[1:])
        ps.extend(p[1:])
    return PathSeg(tuple(vs), tuple(ps))


def build_escape_qg(space: MetricSpace, alpha, beta, rho: SublinearFn, L=1, A=0,
                    horizon: int = 30, instance: int = 0,
                    report: CheckReport | None = None) -> Surgery:
    """Follow alpha backward to alpha_{s0}, cross to beta_{t0}, follow beta.

    beta_{t0} is the last point of beta within kappa of alpha and alpha_{s0}
    the last point of alpha within kappa of it.  The result is checked as a
    (4L, A')-quasi-geodesic with the escape constants.
    """
    rep = report or _report("escape", space, None, rho, L=L, A=A, horizon=horizon)
    L, A = _q(L), _q(A)
    k = kappa(rho, L, A)
    kf = _floor(k)
    b = as_path(space, beta, horizon)
    # alpha beyond max|beta_t| + kappa cannot come within kappa of beta
    reach = int(cross_matrix(space, b.vertices, [b.start])[:, 0].max()) + kf + 1
    a = as_path(space, alpha, max(horizon, reach))
    if a.start != b.start:
        raise CheckerError("precondition failed: alpha and beta must share their basepoint")
    D = cross_matrix(space, a.vertices, b.vertices)
    close = D.min(axis=0)
    if close[-1] <= kf:
        raise CheckerError("beta is asymptotic to alpha at the horizon: no escape time")
    t0 = int(max(t for t in range(len(b)) if close[t] <= kf))
    s0 = int(max(s for s in range(len(a)) if D[s, t0] <= kf))
    bridge = geodesic(space, a[s0], b[t0]).vertices
    m = len(bridge) - 1
    tail = range(s0, min(len(a), s0 + horizon + 1))
    back = ([a[s] for s in reversed(tail)], [Fraction(s0 - s) for s in reversed(tail)])
    mid = (bridge, [Fraction(i) for i in range(m + 1)])
    bp0 = b.param(t0)
    fwd = (list(b.vertices[t0:]), [m + b.param(t) - bp0 for t in range(t0, len(b))])
    out = _glue(space, [back, mid, fwd])
    Lp, Ap = escape_constants(rho, L, A)
    v = check_qg(space, out, Lp, _q(Ap))
    pts = {"t0": t0, "s0": s0, "bridge": m, "L": Lp, "A": Ap}
    # the recorded slack is the quasi-geodesic slack of the worst pair
    rep.record(instance, v.min_slack or 0, 0,
               dict(pts, alpha_s0=_label(space, a[s0]), beta_t0=_label(space, b[t0]),
                    violation=v.to_dict()["violation"]))
    return Surgery(out, rep, pts)


# ---------------------------------------------------------------------------
# tail wagging


def wag_tail(space: MetricSpace, alpha, gamma, beta, rho: SublinearFn, T: int, S: int, L=1, A=0,
             horizon: int | None = None, instance: int = 0,
             report: CheckReport | None = None) -> Surgery:
    """Replace gamma's tail by beta's: gamma[0, t0] + geodesic + beta[r0, ...].

    t0 <= T' and r0 >= S' minimize d(gamma_t0, beta_r0), ties broken by the
    smallest t0 and then the smallest r0.  The output is checked as a
    (2L+1, A)-quasi-geodesic, and gamma_t0 must lie within 11 kappa'(L, A)
    of alpha_T.
    """
    L, A = _q(L), _q(A)
    k_la, k_10 = kappa(rho, L, A), kappa(rho, 1, 0)
    kp_la, kp_10 = kappa_prime(rho, L, A), kappa_prime(rho, 1, 0)
    if horizon is None:
        horizon = _floor(S + 2 * kp_la + 2 * kp_10) + 10
    rep = report or _report("wag", space, None, rho, L=L, A=A, T=T, S=S, horizon=horizon)
    if T < 11 * kp_la:
        raise CheckerError(f"precondition failed: T = {T} < 11 kappa'(L,A) = {11 * kp_la}")
    if S < T + 6 * kp_la + 6 * kp_10:
        raise CheckerError(f"precondition failed: S = {S} < T + 6 kappa'(L,A) + 6 kappa'(1,0) "
                           f"= {T + 6 * kp_la + 6 * kp_10}")
    a = as_path(space, alpha, horizon)
    g = as_path(space, gamma, horizon)
    b = as_path(space, beta, horizon)
    if not (a.start == g.start == b.start):
        raise CheckerError("precondition failed: alpha, gamma and beta must share their basepoint")
    if len(a) <= S:
        raise CheckerError(f"horizon {horizon} does not reach alpha_S")
    Dg = cross_matrix(space, g.vertices, a.vertices)
    Db = cross_matrix(space, b.vertices, a.vertices)
    if Dg[:, T:].min() > k_la:
        raise CheckerError(f"precondition failed: gamma never comes within kappa(L,A) = {k_la} of alpha[T, ...)")
    if Db[:, S:].min() > k_10:
        raise CheckerError(f"precondition failed: beta never comes within kappa(1,0) = {k_10} of alpha[S, ...)")
    T2 = T - 3 * kp_10 - kp_la
    start = max(0, math.ceil(T2))
    T1 = int(np.flatnonzero(Dg[:, start:].min(axis=1) <= kp_la)[0])
    S1 = int(np.flatnonzero(Db[:, S:].min(axis=1) <= k_10)[0])
    C = cross_matrix(space, g.vertices[:T1 + 1], b.vertices[S1:])
    t0, j = np.unravel_index(int(np.argmin(C)), C.shape)  # row-major: smallest t0, then r0
    t0, r0 = int(t0), int(j) + S1
    bridge = geodesic(space, g[t0], b[r0]).vertices
    m = len(bridge) - 1
    gp = g.param(t0)
    head = (list(g.vertices[:t0 + 1]), [g.param(t) for t in range(t0 + 1)])
    mid = (bridge, [gp + i for i in range(m + 1)])
    bp = b.param(r0)
    tail = (list(b.vertices[r0:]), [gp + m + b.param(r) - bp for r in range(r0, len(b))])
    out = _glue(space, [head, mid, tail])
    v = check_qg(space, out, 2 * L + 1, A)
    agree = space.dist(g[t0], a[T])
    pts = {"T2": T2, "T1": T1, "S1": S1, "t0": t0, "r0": r0, "bridge": m, "agreement_distance": agree}
    rep.record(instance, v.min_slack or 0, 0,
               dict(pts, part="quasi-geodesic", violation=v.to_dict()["violation"]))
    rep.record(instance, 11 * kp_la, agree, dict(pts, part="agreement"), count=False)
    return Surgery(out, rep, pts)


# ---------------------------------------------------------------------------
# quasi-geodesic image theorem, sublinear form


def estimate_qgit2(space: MetricSpace, Z, rho: SublinearFn, L=1, A=0, budget: int = 2000,
                   seed: int = 0, length: int = 16) -> dict:
    """Tabulate diam pi(beta_0) u pi(beta_T) against d(beta_0, Z) over random
    (L, A)-quasi-geodesics that stay kappa-far from Z and end kappa-close.

    Returns the envelope table and whether envelope(r)/r is non-increasing
    past its first positive value; no symbolic bound is claimed.
    """
    L, A = _q(L), _q(A)
    k = kappa(rho, L, A)
    kf = _floor(k)
    rng = random.Random(seed)
    zpts = [v for _, v in target_points(space, Z, 4 * kf + 2 * length)] if is_parameterized(Z) \
        else list(Z)
    starts = []
    for _ in range(budget):
        z = rng.choice(zpts)
        w = random_qg_walk(space, rng, z, rng.randint(kf, kf + length), (L, A))
        starts.append(w)

    def one(walk):
        path = PathSeg(tuple(reversed(walk)))
        r = target_rows(space, Z, path.vertices)
        d = r.dist.tolist()
        end = next((i for i, x in enumerate(d) if x <= kf + 1), None)
        if end is None or end == 0:
            return "never reaches the kappa-neighbourhood", None
        if min(d[:end + 1]) < kf - 1:
            return "enters the kappa-neighbourhood", None
        seg = path.sub(0, end)
        if not check_qg(space, seg, L, A):
            return "not an (L,A)-quasi-geodesic", None
        return None, (d[0], r.spread([0, end], space))

    table: dict[int, int] = {}
    skips: dict[str, int] = {}
    for why, res in pmap(one, starts):
        if why:
            skips[why] = skips.get(why, 0) + 1
            continue
        table[res[0]] = max(table.get(res[0], 0), res[1])
    if not table:
        raise CheckerError("no qualifying samples")
    env, best = {}, 0
    for r in sorted(table):
        best = max(best, table[r])
        env[r] = best
    ratios = [(r, Fraction(v, r)) for r, v in env.items() if r > 0]
    first = next((i for i, (_, q) in enumerate(ratios) if q > 0), len(ratios))
    tail = ratios[first:]
    decays = all(q2 <= q1 for (_, q1), (_, q2) in zip(tail, tail[1:]))
    return {"anchor": ANCHORS["qgit2"], "L": L, "A": A, "kappa": k, "envelope": env,
            "samples": sum(1 for _ in table), "skipped": skips, "ratio_non_increasing": decays,
            "max_diam": max(env.values())}


# ---------------------------------------------------------------------------
# seeded instance generators


def _block(space: GroupSpace, rng: random.Random, f: int, bumps: bool) -> list[str]:
    """A short quasi-geodesic word inside factor f."""
    fac = space.factors[f]
    syms = fac.symbols
    if fac.kind == "free":
        out: list[str] = []
        for _ in range(rng.randint(1, 4)):
            while True:
                s = rng.choice(syms) + rng.choice(("", "-"))
                if not out or _inverse(out[-1]) != s:
                    break
            out.append(s)
        return out
    side = None
    if bumps and len(syms) > 1 and rng.random() < 0.4:
        side = rng.choice(syms)
    flat = [s for s in syms if s != side]
    # one sign per coordinate keeps the staircase geodesic
    sign = {s: rng.choice(("", "-")) for s in flat}
    word = [s + sign[s] for s in (rng.choice(flat) for _ in range(rng.randint(1, 3)))]
    if side is not None:
        up = side + rng.choice(("", "-"))
        word = [up] + word + [_inverse(up)]
    return word


def _inverse(name: str) -> str:
    return name[:-1] if name.endswith("-") else name + "-"


def random_qg_walk(space: GroupSpace, rng: random.Random, start, length: int, LA=(2, 2),
                   avoid: str | None = None) -> list:
    """Vertices of a random walk built from alternating factor blocks.

    Each block is a staircase (with an optional perpendicular bump when
    L > 1) or a reduced free word, so the walk is usually an (L, A)
    quasi-geodesic; callers verify.  ``avoid`` forbids that first letter.
    """
    bumps = Fraction(LA[0]) > 1
    nf = len(space.factors)
    word: list[str] = []
    last = None
    while len(word) < length:
        choices = [f for f in range(nf) if f != last] if nf > 1 else [0]
        f = rng.choice(choices)
        blk = _block(space, rng, f, bumps)
        if not word and avoid is not None and blk[0] == avoid:
            continue
        if word and nf == 1 and _inverse(word[-1]) == blk[0]:
            continue
        word.extend(blk)
        last = f
    word = word[:length]
    return space.path_from(start, [space.generator(s) for s in word])


def _ray_prefix(space: GroupSpace, ray: RaySchema, n: int) -> list:
    return ray.vertices(space, n)


def _walk_after(space: GroupSpace, rng, ray: RaySchema, m: int, length: int, LA) -> PathSeg:
    """Follow ray for m steps, then leave along a random walk whose first
    letter differs from the ray's next letter."""
    pre = _ray_prefix(space, ray, m)
    nxt = ray.generators(space, m + 1)[m].name
    back = ray.generators(space, m)[m - 1].name if m > 0 else None
    while True:
        walk = random_qg_walk(space, rng, pre[-1], length, LA, avoid=nxt)
        step = space.mul(space.inv(walk[0]), walk[1]) if len(walk) > 1 else ()
        # never backtrack onto the ray
        if back is None or step != space._gen_elem[space._gen_index[_inverse(back)]]:
            return PathSeg(tuple(pre + walk[1:]))


def _drive(rep: CheckReport, make, run, count: int, seed: int, max_draws: int | None = None) -> CheckReport:
    """Draw seeded instances until ``count`` of them pass their
    preconditions (or ``max_draws`` are used).

    ``make(rng)`` builds one input; ``run(n, item)`` returns a CheckReport
    or a skip reason.  Batches are generated serially and checked in
    parallel, so the report does not depend on the thread count.
    """
    rng = random.Random(seed)
    max_draws = 3 * count if max_draws is None else max_draws
    drawn = 0
    while rep.instances < count and drawn < max_draws:
        size = min(count - rep.instances, max_draws - drawn)
        batch = [(drawn + i, make(rng)) for i in range(size)]
        drawn += size
        for res in pmap(lambda it: run(*it), batch):
            if isinstance(res, str):
                rep.skip(res)
            else:
                rep.merge(res)
                _keep_extreme(rep, res, "max_ratio", max)
    rep.params["draws"] = drawn
    if rep.instances < count:
        rep.inconclusive = True
        rep.extra["shortfall"] = count - rep.instances
    return rep


def _keep_extreme(rep: CheckReport, part: CheckReport, key: str, pick) -> None:
    v = part.extra.get(key)
    if v is not None:
        old = rep.extra.get(key)
        rep.extra[key] = v if old is None else pick(old, v)


def _mixed_LA(rng):
    return rng.choice(((1, 0), (2, 2), (Fraction(3, 2), 2)))


def run_qgit(space, Z: RaySchema, rho, count=1000, seed=0, horizon=12) -> CheckReport:
    """Seeded quasi-geodesics that start kappa-far from Z and wander."""
    rep = _report("qgit", space, Z, rho, count=count, seed=seed, horizon=horizon)

    def make(rng):
        L, A = _mixed_LA(rng)
        kf = _floor(kappa(rho, L, A))
        t = rng.randint(0, horizon)
        lead = random_qg_walk(space, rng, Z.vertex(space, t), kf + rng.randint(1, 4), (1, 0),
                              avoid=Z.generators(space, t + 1)[t].name)
        walk = random_qg_walk(space, rng, lead[-1], rng.randint(1, horizon), (L, A))
        return PathSeg(tuple(walk)), L, A

    def run(n, item):
        sub = check_qgit(space, Z, rho, [item])
        if sub.skipped:
            return next(iter(sub.skip_reasons))
        for v in sub.violations:
            v.instance = n
        return sub

    return _drive(rep, make, run, count, seed)


def _leaving(space, Z, rng, horizon, stay=0.1):
    """A seeded (path, L, A) that follows Z and then leaves, or (with
    probability ``stay``) never leaves."""
    L, A = _mixed_LA(rng)
    if rng.random() < stay:
        return Z.truncate(space, horizon), L, A
    beta = _walk_after(space, rng, Z, rng.randint(0, horizon // 2), horizon, (L, A))
    return beta.sub(0, min(horizon, beta.length)), L, A


def run_divagation(space, Z: RaySchema, rho, count=1000, seed=0, horizon=30) -> CheckReport:
    rep = _report("divagation", space, Z, rho, count=count, seed=seed, horizon=horizon)

    def run(n, item):
        beta, L, A = item
        if not check_qg(space, beta, L, A):
            return "not an (L,A)-quasi-geodesic"
        return check_divagation(space, Z, rho, beta, L, A, horizon, n, _report("divagation", space, Z, rho))

    return _drive(rep, lambda rng: _leaving(space, Z, rng, horizon), run, count, seed)


def run_hausdorff(space, Z: RaySchema, rho, count=1000, seed=0, horizon=30) -> CheckReport:
    rep = _report("hausdorff", space, Z, rho, count=count, seed=seed, horizon=horizon)
    alpha = Z.truncate(space, horizon)

    def make(rng):
        L, A = _mixed_LA(rng)
        beta = _walk_after(space, rng, Z, rng.randint(0, horizon), horizon, (L, A))
        return beta.sub(0, min(horizon, beta.length)), L, A

    def run(n, item):
        beta, L, A = item
        if not check_qg(space, beta, L, A):
            return "not an (L,A)-quasi-geodesic"
        return check_hausdorff_lemma(space, alpha, beta, rho, L, A, horizon, n,
                                     _report("hausdorff", space, Z, rho))

    return _drive(rep, make, run, count, seed)


def run_keylemma(space, Z: RaySchema, rho, count=1000, seed=0, horizon=30) -> CheckReport:
    rep = _report("keylemma", space, Z, rho, count=count, seed=seed, horizon=horizon)

    def make(rng):
        L, A = _mixed_LA(rng)
        m = rng.randint(1, horizon)
        beta = _walk_after(space, rng, Z, m, 3 * horizon + 60, (L, A))
        J = rng.randint(1, 8)
        return beta, L, A, rng.randint(0, m + J), J

    def run(n, item):
        beta, L, A, R, J = item
        hb = _floor(Fraction(L) * (horizon + Fraction(A) + J + kappa(rho, L, A))) + 1
        if not check_qg(space, beta.sub(0, min(hb, beta.length)), L, A):
            return "not an (L,A)-quasi-geodesic"
        try:
            return check_keylemma(space, Z, beta, rho, R, J, L, A, horizon, n,
                                  _report("keylemma", space, Z, rho))
        except CheckerError:
            return "no qualifying x"

    return _drive(rep, make, run, count, seed)


def run_escape(space, Z: RaySchema, rho, count=200, seed=0, horizon=30) -> CheckReport:
    rep = _report("escape", space, Z, rho, count=count, seed=seed, horizon=horizon)

    def run(n, item):
        beta, L, A = item
        if not check_qg(space, beta, L, A):
            return "not an (L,A)-quasi-geodesic"
        try:
            return build_escape_qg(space, Z, beta, rho, L, A, horizon, n,
                                   _report("escape", space, Z, rho)).report
        except CheckerError:
            return "asymptotic at the horizon"

    return _drive(rep, lambda rng: _leaving(space, Z, rng, horizon, stay=0), run, count, seed)


def run_wag(space, Z: RaySchema, rho, count=200, seed=0,
            LA_choices=((1, 0), (Fraction(3, 2), 2))) -> CheckReport:
    """Seeded tail-wagging instances: gamma and beta follow Z past T and S
    (gamma with bumps when L > 1) and then leave."""
    rep = _report("wag", space, Z, rho, count=count, seed=seed)
    kp_10 = kappa_prime(rho, 1, 0)

    def make(rng):
        L, A = rng.choice(LA_choices)
        kp_la = kappa_prime(rho, L, A)
        T = math.ceil(11 * kp_la) + rng.randint(0, 10)
        S = math.ceil(T + 6 * kp_la + 6 * kp_10) + rng.randint(0, 10)
        hz = S + 40
        g = _walk_after(space, rng, Z, T + rng.randint(0, 20), hz, (L, A)).sub(0, hz)
        b = _walk_after(space, rng, Z, S + rng.randint(0, 20), hz, (1, 0)).sub(0, hz)
        return g, b, L, A, T, S, hz

    def run(n, item):
        g, b, L, A, T, S, hz = item
        if not check_qg(space, g, L, A):
            return "gamma is not an (L,A)-quasi-geodesic"
        if not b.is_geodesic(space):
            return "beta is not geodesic"
        return wag_tail(space, Z, g, b, rho, T, S, L, A, hz, n, _report("wag", space, Z, rho)).report

    return _drive(rep, make, run, count, seed)


def run_tame(space, count=200, seed=0, length=40,
             LA_choices=((1, 0), (2, 2), (Fraction(3, 2), 2))) -> CheckReport:
    """Seeded coarse quasi-geodesics (strided samples of random walks, with
    occasional stalls) interpolated by geodesics; each output must be an
    (L, 2(L+A))-quasi-geodesic."""
    rep = CheckReport("tame", "geodesic interpolation",
                      {"space": space_name(space), "count": count, "seed": seed, "length": length})

    def make(rng):
        L, A = rng.choice(LA_choices)
        walk = random_qg_walk(space, rng, space.o, length, (L, A))
        stride = rng.randint(1, 3)
        idx = list(range(0, len(walk), stride))
        params = [Fraction(i) for i in idx]
        if rng.random() < 0.3 and len(idx) > 2:
            # a stall: the same vertex again half a step later
            k = rng.randrange(1, len(idx) - 1)
            idx.insert(k, idx[k])
            params.insert(k + 1, params[k] + Fraction(1, 2))
        return PathSeg(tuple(walk[i] for i in idx), tuple(params)), L, A

    def run(n, item):
        path, L, A = item
        if not check_qg(space, path, L, A):
            return "not an (L,A)-quasi-geodesic"
        sub = CheckReport("tame", "")
        try:
            out = tame(space, path, L, A)
        except AssertionError as exc:
            sub.record(n, 0, 1, {"error": str(exc), "L": L, "A": A})
            return sub
        v = check_qg(space, out, L, 2 * (L + A))
        sub.record(n, v.min_slack if v.passed else 0, 0 if v.passed else 1,
                   {"L": L, "A": A, "length": len(out)})
        return sub

    return _drive(rep, make, run, count, seed)
