"""Finite-horizon model of the contracting boundary.

Boundary points are represented by eventually periodic geodesic rays.
Membership in the fellow-travelling neighbourhoods is semi-decided: an
``Out`` verdict carries a replayable witness quasi-geodesic, while the
absence of a counterexample is reported as such and never as membership.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .constants import SublinearFn, kappa, kappa_prime, witness_bounds
from .contraction import _embed_factor, _feasible_radius, profile, vertex_label
from .space import (DEFAULT_GEODESIC_BUDGET, GroupSpace, PathSeg, RaySchema, SpaceError, check_qg, cross_matrix,
                    enumerate_geodesics, space_name)


class BoundaryError(SpaceError):
    pass


OUT = "Out"
NO_COUNTEREXAMPLE = "NoCounterexampleFound"
IN_CERTIFIED = "In_Geodesic_Certified"
INCONCLUSIVE = "Inconclusive"

BUILTIN_RAYS = {
    "f2": ("a^inf", "b^inf", "(ab)^inf", "a(b)^inf", "(ab-)^inf", "b-(a)^inf"),
    "z2-star-z": ("c^inf", "(ca)^inf", "(cab)^inf", "a(c)^inf", "(cab-)^inf", "(ca^2)^inf"),
    "z2-star-z-star-z": ("d^inf", "c^inf", "(ca)^inf", "(cd)^inf", "a^2(d)^inf", "(dab)^inf"),
}


# ---------------------------------------------------------------------------
# syllable structure of rays


def ray_syllables(space: GroupSpace, ray: RaySchema, horizon: int) -> list[tuple[int, int, int]]:
    """Maximal runs ``(factor, t0, t1)`` of same-factor generators up to the
    horizon; the ray spends parameters [t0, t1] in one factor coset."""
    gens = ray.generators(space, horizon)
    runs: list[list[int]] = []
    for t, g in enumerate(gens):
        if runs and runs[-1][0] == g.factor:
            runs[-1][2] = t + 1
        else:
            runs.append([g.factor, t, t + 1])
    return [tuple(r) for r in runs]


def cut_times(space: GroupSpace, ray: RaySchema, horizon: int) -> list[int]:
    """Parameters every path to the ray's tail must visit: all vertices
    except the interiors of abelian syllables."""
    inner = set()
    for f, t0, t1 in ray_syllables(space, ray, horizon):
        if space.factors[f].kind != "free":
            inner.update(range(t0 + 1, t1))
    return [t for t in range(horizon + 1) if t not in inner]


def coset_itinerary(space: GroupSpace, ray: RaySchema, horizon: int) -> list[tuple[int, tuple]]:
    """Bass-Serre shadow: the (factor, coset representative) sequence."""
    vs = ray.vertices(space, horizon)
    return [(f, vs[t0]) for f, t0, _ in ray_syllables(space, ray, horizon)]


def shared_prefix(xs: Sequence, ys: Sequence) -> int:
    n = 0
    for a, b in zip(xs, ys):
        if a != b:
            break
        n += 1
    return n


def fellow_travel(space: GroupSpace, ray1: RaySchema, ray2: RaySchema, horizon: int) -> int:
    """Last parameter at which the two rays still agree."""
    return shared_prefix(ray1.vertices(space, horizon), ray2.vertices(space, horizon)) - 1


# ---------------------------------------------------------------------------
# contraction of a ray


@dataclass
class RayTable:
    """Lower-bound table r -> max projection diameter for a ray."""

    table: list
    witnesses: list
    details: dict = field(default_factory=dict)


_TABLES: dict = {}


def _coset_table(space: GroupSpace, f: int, names: tuple, radius: int):
    """Exhaustive profile of one syllable segment inside its factor."""
    key = (repr(space.spec), f, names, radius)
    if key not in _TABLES:
        sub, emb = _embed_factor(space, f)
        seg = PathSeg(tuple(sub.path_from((), [sub.generator(n) for n in names])))
        _TABLES[key] = (profile(sub, seg, radius), emb)
    return _TABLES[key]


def ray_table(space: GroupSpace, ray: RaySchema, horizon: int, radius: int | None = None,
              coset_radius: int = 8) -> RayTable:
    """Profile table of a ray: an exhaustive sweep of a small ball, merged
    with exhaustive sweeps inside each abelian coset the ray crosses.

    For x and y in a factor coset, every path to the rest of the ray leaves
    through the syllable's endpoints, so their projections onto the ray are
    their projections onto the syllable.  Both parts are exact values of
    the profile, so the merged table is a lower bound for it.
    """
    if radius is None:
        radius = min(horizon, _feasible_radius(space, horizon), 4 if space.is_tree else 3)
    key = (repr(space.spec), ray.describe(), ray.basepoint, horizon, radius, coset_radius)
    if key in _TABLES:
        return _TABLES[key]
    if not ray.verify_geodesic(space, horizon):
        raise BoundaryError(f"ray {ray.describe()} is not geodesic at horizon {horizon}")
    base = profile(space, ray, radius)
    size = max(radius, coset_radius)
    table = [0] * (size + 1)
    wit: list = [None] * (size + 1)
    for r in range(radius + 1):
        table[r], wit[r] = base.samples[r], base.witnesses[r]
    gens = ray.generators(space, horizon)
    vs = ray.vertices(space, horizon)
    cosets = 0
    for f, t0, t1 in ray_syllables(space, ray, horizon):
        if space.factors[f].kind == "free" or t1 > horizon:
            continue
        cosets += 1
        names = tuple(g.name for g in gens[t0:t1])
        prof, emb = _coset_table(space, f, names, (t1 - t0) + coset_radius)
        for r in range(min(size, prof.radius) + 1):
            if prof.samples[r] > table[r]:
                x, y = prof.witnesses[r]
                table[r] = prof.samples[r]
                wit[r] = (space.mul(vs[t0], emb(x)), space.mul(vs[t0], emb(y)))
    for r in range(1, size + 1):
        if table[r] < table[r - 1]:
            table[r], wit[r] = table[r - 1], wit[r - 1]
    out = RayTable(table, wit, {"ball_radius": radius, "coset_radius": coset_radius,
                                "cosets": cosets, "horizon": horizon})
    _TABLES[key] = out
    return out


def fit_sublinear(table: Sequence[int]) -> SublinearFn:
    """Tightest dominating function among a constant, a*log(1+r) and
    a*sqrt(r).

    A table whose maximum is reached in its first half is bounded at the
    working scale and gets the constant; otherwise the variant with the
    least total gap over the table wins, ties favouring the constant.

    >>> fit_sublinear([0, 1, 1, 1]).describe()
    'const:1'
    """
    if not table:
        raise BoundaryError("empty table")
    top = max(table)
    cands = [SublinearFn.constant(top)]
    if table[0] == 0 and top > 0:
        a_log = max(v / math.log1p(r) for r, v in enumerate(table) if r >= 1) * (1 + 1e-12)
        a_pow = max(v / math.sqrt(r) for r, v in enumerate(table) if r >= 1) * (1 + 1e-12)
        cands += [SublinearFn.log(a_log), SublinearFn.power(a_pow, 0, Fraction(1, 2))]
    # a table that stopped growing in its first half is read as bounded
    if table.index(top) <= (len(table) - 1) // 2:
        return cands[0]
    best, gap = None, None
    for fn in cands:
        if not fn.dominates(dict(enumerate(table))):
            continue
        g = sum(float(fn(r)) - v for r, v in enumerate(table))
        if gap is None or g < gap - 1e-9:
            best, gap = fn, g
    if best is None:
        raise BoundaryError("no dominating variant")
    return best


def rho_zeta(space: GroupSpace, ray: RaySchema, horizon: int = 40, **kw) -> SublinearFn:
    """Sublinear bound fitted to the ray's profile table."""
    return fit_sublinear(ray_table(space, ray, horizon, **kw).table)


@dataclass
class BoundaryPoint:
    """A boundary point given by a geodesic representative and a validated
    contraction bound."""

    space: GroupSpace = field(repr=False)
    representative: RaySchema
    rho_bound: SublinearFn
    label: str
    table: list
    horizon: int

    @classmethod
    def build(cls, space: GroupSpace, ray: RaySchema | str, horizon: int = 40,
              rho: SublinearFn | None = None, label: str | None = None, **kw) -> "BoundaryPoint":
        if isinstance(ray, str):
            ray = RaySchema.parse(ray)
        tab = ray_table(space, ray, horizon, **kw)
        if rho is None:
            rho = fit_sublinear(tab.table)
        elif not rho.dominates(dict(enumerate(tab.table))):
            bad = next(r for r, v in enumerate(tab.table) if v > rho(r))
            raise BoundaryError(f"rho {rho.describe()} fails at r={bad}: observed {tab.table[bad]}")
        return cls(space, ray, rho, label or ray.describe(), tab.table, horizon)

    def kappa(self, L=1, A=0):
        return kappa(self.rho_bound, L, A)

    def kappa_prime(self, L=1, A=0):
        return kappa_prime(self.rho_bound, L, A)

    def points(self, horizon: int) -> list:
        return self.representative.vertices(self.space, horizon)

    def to_dict(self) -> dict:
        return {"label": self.label, "ray": self.representative.describe(),
                "rho": self.rho_bound.describe(), "table": self.table, "horizon": self.horizon}


def dl_stratum(space: GroupSpace, point: BoundaryPoint, rho: SublinearFn) -> bool:
    """Whether the point's profile table is dominated by rho."""
    return rho.dominates(dict(enumerate(point.table)))


# ---------------------------------------------------------------------------
# membership


@dataclass
class Verdict:
    kind: str
    horizon: int
    budget: int
    used: int = 0
    witness: PathSeg | None = None
    L: object = None
    A: object = None
    distance: int | None = None
    kappa: object = None
    stats: dict = field(default_factory=dict)

    def to_dict(self, space=None) -> dict:
        w = None
        if self.witness is not None:
            w = [vertex_label(space, v) for v in self.witness.vertices] if space else len(self.witness)
        out = {"kind": self.kind, "horizon": self.horizon, "budget": self.budget, "used": self.used,
               "witness": w, "L": self.L, "A": self.A, "distance": self.distance, "kappa": self.kappa,
               "stats": self.stats}
        if self.kind == NO_COUNTEREXAMPLE:
            out["note"] = "absence of a counterexample under the budget; not a membership certificate"
        return out


def witness_grid(r) -> list[tuple[Fraction, Fraction]]:
    """(1, 0) and (1 + k/4, m/2), all strictly below the witness bounds.

    >>> witness_grid(4)
    [(Fraction(1, 1), Fraction(0, 1)), (Fraction(1, 1), Fraction(1, 2)), (Fraction(1, 1), Fraction(1, 1))]
    """
    r = Fraction(r)
    _, Ab = witness_bounds(r)
    grid = []
    k = 0
    while (1 + Fraction(k, 4)) ** 2 < r / 3:
        m = 0
        while Fraction(m, 2) < Ab:
            grid.append((1 + Fraction(k, 4), Fraction(m, 2)))
            m += 1
        k += 1
    return grid


def _far_side(space, zeta: BoundaryPoint, r: int, path: PathSeg, kmax) -> list:
    """Points of alpha^zeta outside the open r-ball that could lie within
    kmax of the path."""
    reach = int(cross_matrix(space, path.vertices, [space.o])[:, 0].max()) + math.floor(kmax) + 1
    return zeta.points(max(reach, r))[r:]


def min_distance_outside(space: GroupSpace, zeta: BoundaryPoint, r: int, path: PathSeg, kmax) -> int:
    """min d(beta_t, alpha_s) over s >= r, exact whenever it is <= kmax."""
    far = _far_side(space, zeta, r, path, kmax)
    return int(cross_matrix(space, path.vertices, far).min())


def verify_out(space: GroupSpace, zeta: BoundaryPoint, r: int, witness: PathSeg, L, A) -> bool:
    """Recompute an Out certificate from scratch."""
    Lb, Ab = witness_bounds(r)
    L, A = Fraction(L), Fraction(A)
    if not (L * L < Fraction(r) / 3 and A < Ab):
        return False
    k = zeta.kappa(L, A)
    if not check_qg(space, witness, L, A):
        return False
    return witness.start == space.o and min_distance_outside(space, zeta, r, witness, k) > k


def _geodesic_reps(space: GroupSpace, eta: BoundaryPoint, horizon: int, budget: int):
    """Geodesic representatives of eta up to its last cut time before the
    horizon, each continued by eta's own ray to the horizon."""
    ts = cut_times(space, eta.representative, horizon)
    tc = ts[-1]
    pts = eta.points(horizon)
    paths, exhaustive = enumerate_geodesics(space, space.o, pts[tc], budget)
    return [PathSeg(p.vertices + tuple(pts[tc + 1:])) for p in paths], exhaustive


def _detours(space: GroupSpace, eta: BoundaryPoint, horizon: int, radius: int) -> Iterator[PathSeg]:
    """eta's ray with one abelian syllable replaced by a two-leg detour
    through a waypoint of its coset."""
    ray = eta.representative
    pts = eta.points(horizon)
    for f, t0, t1 in ray_syllables(space, ray, horizon):
        fac = space.factors[f]
        if fac.kind == "free" or t1 > horizon:
            continue
        p, q = pts[t0], pts[t1]
        for vec in _lattice_ball(fac.rank, radius):
            w = space.mul(p, ((f, vec),))
            leg1 = space.path_from(p, space.spell(space.step(p, w)))
            leg2 = space.path_from(w, space.spell(space.step(w, q)))
            mid = leg1 + leg2[1:]
            if len(mid) == t1 - t0 + 1:
                continue  # still geodesic: covered by the representatives
            yield PathSeg(tuple(pts[:t0]) + tuple(mid) + tuple(pts[t1 + 1:]))


def _lattice_ball(rank: int, radius: int) -> list[tuple]:
    out = []

    def rec(prefix, left):
        if len(prefix) == rank:
            if any(prefix):
                out.append(tuple(prefix))
            return
        for v in range(-left, left + 1):
            rec(prefix + [v], left - abs(v))

    rec([], radius)
    return sorted(out, key=lambda v: (sum(map(abs, v)), v))


def _hybrids(space: GroupSpace, zeta: BoundaryPoint, eta: BoundaryPoint, r: int,
             horizon: int) -> Iterator[PathSeg]:
    """alpha^zeta up to s < r, a geodesic to eta's ray at a cut time t, then
    eta's ray: paths in eta's class that leave zeta early."""
    az = zeta.points(horizon)
    pe = eta.points(horizon)
    for t in cut_times(space, eta.representative, horizon):
        for s in range(1, min(r, horizon)):
            if az[s] == pe[min(s, horizon)]:
                continue
            bridge = space.path_from(az[s], space.spell(space.step(az[s], pe[t])))
            yield PathSeg(tuple(az[:s]) + tuple(bridge) + tuple(pe[t + 1:]))


def min_horizon(zeta: BoundaryPoint, r: int) -> int:
    """Smallest horizon membership_U accepts for this r."""
    kmax = max((zeta.kappa(L, A) for L, A in witness_grid(r)), default=0)
    return r + math.ceil(kmax) + 1


def membership_U(space: GroupSpace, zeta: BoundaryPoint, r: int, eta: BoundaryPoint,
                 horizon: int = 40, budget: int = 100_000, detour_radius: int = 3,
                 geodesic_budget: int = DEFAULT_GEODESIC_BUDGET) -> Verdict:
    """Search for a quasi-geodesic in eta's class that stays farther than
    kappa(rho_zeta, L, A) from alpha^zeta outside the open r-ball.

    Candidates, in order: geodesic representatives, single-syllable flat
    detours, early-leaving hybrids.  Each is tested against the witness
    grid in grid order; the first certified witness is returned as Out.
    """
    if r < 1:
        raise BoundaryError("r must be >= 1")
    grid = witness_grid(r)
    kmax = max((zeta.kappa(L, A) for L, A in grid), default=0)
    if horizon < r + kmax + 1:
        raise BoundaryError(f"horizon {horizon} cannot contain N_r(o) plus kappa padding ({r} + {kmax})")
    v = Verdict(NO_COUNTEREXAMPLE, horizon, budget)
    if not grid:
        v.stats["vacuous"] = "kappa >= r for every admissible constant"
        return v
    kap = [(L, A, zeta.kappa(L, A)) for L, A in grid]
    reps, exhaustive = _geodesic_reps(space, eta, horizon, min(budget, geodesic_budget))
    families = [("geodesic", iter(reps)), ("detour", _detours(space, eta, horizon, detour_radius)),
                ("hybrid", _hybrids(space, zeta, eta, r, horizon))]
    counts = {}
    for name, it in families:
        counts[name] = 0
        for path in it:
            if v.used >= budget:
                v.stats.update(families=counts, exhausted=False, geodesics_exhaustive=exhaustive)
                return v
            v.used += 1
            counts[name] += 1
            d = min_distance_outside(space, zeta, r, path, kmax)
            for L, A, k in kap:
                if d > k and check_qg(space, path, L, A):
                    v.kind, v.witness, v.L, v.A, v.distance, v.kappa = OUT, path, L, A, d, k
                    v.stats.update(families=counts, family=name)
                    return v
    v.stats.update(families=counts, exhausted=True, geodesics_exhaustive=exhaustive)
    if eta.representative == zeta.representative or eta.points(horizon) == zeta.points(horizon):
        v.stats["representative_distance"] = 0
    return v


def _geodesic_condition(space, zeta, r, eta, horizon, budget):
    k = zeta.kappa(1, 0)
    reps, exhaustive = _geodesic_reps(space, eta, horizon, budget)
    dists = [min_distance_outside(space, zeta, r, p, k) for p in reps]
    return reps, dists, exhaustive, k


def membership_V(space: GroupSpace, zeta: BoundaryPoint, r: int, eta: BoundaryPoint,
                 horizon: int = 40, budget: int = DEFAULT_GEODESIC_BUDGET) -> Verdict:
    """Every geodesic representative must come within kappa(rho_zeta, 1, 0)."""
    early = _check_r(zeta, r, horizon, budget)
    if early is not None:
        return early
    reps, dists, exhaustive, k = _geodesic_condition(space, zeta, r, eta, horizon, budget)
    v = Verdict(NO_COUNTEREXAMPLE, horizon, budget, len(reps), kappa=k,
                stats={"geodesics": len(reps), "exhaustive": exhaustive})
    for p, d in zip(reps, dists):
        if d > k:
            v.kind, v.witness, v.L, v.A, v.distance = OUT, p, 1, 0, d
            return v
    v.kind = IN_CERTIFIED if exhaustive else INCONCLUSIVE
    return v


def membership_V_prime(space: GroupSpace, zeta: BoundaryPoint, r: int, eta: BoundaryPoint,
                       horizon: int = 40, budget: int = DEFAULT_GEODESIC_BUDGET) -> Verdict:
    """Some geodesic representative comes within kappa(rho_zeta, 1, 0)."""
    early = _check_r(zeta, r, horizon, budget)
    if early is not None:
        return early
    reps, dists, exhaustive, k = _geodesic_condition(space, zeta, r, eta, horizon, budget)
    v = Verdict(NO_COUNTEREXAMPLE, horizon, budget, len(reps), kappa=k,
                stats={"geodesics": len(reps), "exhaustive": exhaustive})
    for p, d in zip(reps, dists):
        if d <= k:
            v.kind, v.witness, v.L, v.A, v.distance = IN_CERTIFIED, p, 1, 0, d
            return v
    if exhaustive:
        v.kind, v.witness, v.L, v.A, v.distance = OUT, reps[0], 1, 0, dists[0]
    else:
        v.kind = INCONCLUSIVE
    return v


def _check_r(zeta, r, horizon, budget):
    """None when the query fits the horizon, else an Inconclusive verdict."""
    if r < 1:
        raise BoundaryError("r must be >= 1")
    if r > horizon - zeta.kappa(1, 0):
        return Verdict(INCONCLUSIVE, horizon, budget,
                       stats={"reason": f"r = {r} exceeds horizon - kappa = {horizon - zeta.kappa(1, 0)}"})
    return None


# ---------------------------------------------------------------------------
# separation


@dataclass
class Separation:
    R: int | None
    threshold: object
    confirmed: bool
    checks: list
    horizon: int

    def to_dict(self) -> dict:
        return {"R": self.R, "threshold": self.threshold, "confirmed": self.confirmed,
                "checks": self.checks, "horizon": self.horizon,
                "verdict": "found" if self.R is not None else "inconclusive"}


def separation(space: GroupSpace, zeta: BoundaryPoint, eta: BoundaryPoint, horizon: int = 40,
               budget: int = 2000) -> Separation:
    """Least R such that the kappa'(1,0)-neighbourhoods of the two ray tails
    from R on are disjoint at the horizon, then a cross check that neither
    point lies in the other's neighbourhood of radius R.
    """
    if zeta.points(horizon) == eta.points(horizon):
        raise BoundaryError("points are not distinct at the horizon")
    thr = zeta.kappa_prime(1, 0) + eta.kappa_prime(1, 0)
    reach = horizon + math.floor(thr) + 1
    D = cross_matrix(space, zeta.points(reach), eta.points(reach))
    # tail minima over s, t >= R, restricted to R <= horizon
    tail = np.minimum.accumulate(np.minimum.accumulate(D[::-1, ::-1], axis=0), axis=1)[::-1, ::-1]
    R = next((R for R in range(horizon + 1) if tail[R, R] > thr), None)
    if R is None:
        return Separation(None, thr, False, [], horizon)
    checks = []
    for a, b in ((zeta, eta), (eta, zeta)):
        try:
            v = membership_U(space, a, R, b, max(horizon, min_horizon(a, R)), budget)
            checks.append({"zeta": a.label, "eta": b.label, "verdict": v.kind})
        except BoundaryError as exc:
            checks.append({"zeta": a.label, "eta": b.label, "verdict": INCONCLUSIVE, "error": str(exc)})
    confirmed = all(c["verdict"] == OUT for c in checks)
    return Separation(R, thr, confirmed, checks, horizon)


# ---------------------------------------------------------------------------
# worked examples


def flat_excursion_ray(n: int) -> RaySchema:
    """(ca)^n a^n (ca)^inf."""
    return RaySchema("ca" * n + "a" * n, "ca")


def experiment_flat_excursions(space: GroupSpace, n_max: int = 6, r: int = 9, horizon: int = 40,
                               budget: int = 100_000) -> dict:
    """zeta = (ca)^inf against zeta_n = (ca)^n a^n (ca)^inf.

    Per n: agreement length with zeta, membership of zeta_n in U(zeta, r),
    shared Bass-Serre itinerary, and the smallest constant bound on the
    profile of zeta_n (so zeta_n leaves every fixed constant stratum).
    """
    if space_name(space) != "z2-star-z":
        raise BoundaryError("the flat excursion experiment runs in z2-star-z")
    if horizon < 4 * n_max + r:
        raise BoundaryError(f"horizon must be at least 4 n_max + r = {4 * n_max + r}")
    zeta = BoundaryPoint.build(space, RaySchema("", "ca"), horizon, label="zeta")
    it_z = coset_itinerary(space, zeta.representative, horizon)
    rows = []
    for n in range(n_max + 1):
        pt = BoundaryPoint.build(space, flat_excursion_ray(n), horizon, label=f"zeta_{n}",
                                 coset_radius=max(8, n + 2))
        v = membership_U(space, zeta, r, pt, horizon, budget)
        it_n = coset_itinerary(space, pt.representative, horizon)
        top = max(pt.table)
        rows.append({
            "n": n,
            "fellow_travel": fellow_travel(space, zeta.representative, pt.representative, horizon),
            "membership": v.kind,
            "candidates": v.used,
            "bass_serre_shared": shared_prefix(it_z, it_n) if n else len(it_z),
            "profile_max": top,
            "dl_threshold": top,
            "rho": pt.rho_bound.describe(),
        })
    return {"zeta": zeta.to_dict(), "r": r, "horizon": horizon, "budget": budget, "rows": rows,
            "fq_converges": all(row["membership"] != OUT for row in rows if 2 * row["n"] >= r - 3),
            "dl_escapes": all(row["dl_threshold"] >= row["n"] for row in rows)}


def c_edge_crossings(space: GroupSpace, path: Sequence, coset_factor: int, edge_factor: int) -> int:
    """Edges of the path labelled by ``edge_factor`` with an endpoint in the
    identity coset of ``coset_factor``."""
    def in_coset(v):
        return all(f == coset_factor for f, _ in v)

    n = 0
    for u, w in zip(path, path[1:]):
        step = space.step(u, w)
        if step and step[0][0] == edge_factor and (in_coset(u) or in_coset(w)):
            n += 1
    return n


def experiment_clopen(space: GroupSpace, n_max: int = 6, horizon: int = 20,
                      budget: int = 4096) -> dict:
    """Crossings of c-edges at the identity's <a,b>-coset by geodesic
    representatives of a^n d^inf, against (ca)^inf."""
    if space_name(space) != "z2-star-z-star-z":
        raise BoundaryError("the clopen experiment runs in z2-star-z-star-z")
    ab = space.generator("a").factor
    cf = space.generator("c").factor

    def crossings(ray):
        vs = ray.vertices(space, horizon)
        ts = cut_times(space, ray, horizon)
        paths, exhaustive = enumerate_geodesics(space, space.o, vs[ts[-1]], budget)
        counts = [c_edge_crossings(space, list(p.vertices) + vs[ts[-1] + 1:], ab, cf) for p in paths]
        return max(counts), min(counts), len(paths), exhaustive

    rows = []
    for n in range(n_max + 1):
        hi, lo, k, ex = crossings(RaySchema("a" * n, "d"))
        rows.append({"n": n, "ray": f"a^{n}(d)^inf", "max_crossings": hi, "min_crossings": lo,
                     "representatives": k, "exhaustive": ex, "in_U_e": hi > 0})
    hi, lo, k, ex = crossings(RaySchema("", "ca"))
    ref = {"ray": "(ca)^inf", "max_crossings": hi, "min_crossings": lo, "representatives": k,
           "exhaustive": ex, "in_U_e": lo > 0}
    return {"horizon": horizon, "rows": rows, "reference": ref,
            "clopen_obstruction": all(row["max_crossings"] == 0 for row in rows) and ref["min_crossings"] >= 1}


def topology_gap(space: GroupSpace, zeta: BoundaryPoint, r: int, eta: BoundaryPoint,
                 horizon: int = 40, budget: int = DEFAULT_GEODESIC_BUDGET) -> dict:
    """Run both geodesic memberships; some geodesic in and another out is
    an instance separating the two neighbourhood systems."""
    v = membership_V(space, zeta, r, eta, horizon, budget)
    vp = membership_V_prime(space, zeta, r, eta, horizon, budget)
    if v.kind == IN_CERTIFIED and vp.kind == OUT:
        raise AssertionError("V certified but V' found an excluded geodesic")
    return {"V": v.kind, "V_prime": vp.kind, "gap": v.kind == OUT and vp.kind == IN_CERTIFIED}
