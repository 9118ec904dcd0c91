"""Closest-point projection onto vertex sets, paths, rays and lines."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .space import LineSchema, MetricSpace, PathSeg, RaySchema, SpaceError


class ProjectionError(SpaceError):
    pass


@dataclass(frozen=True)
class ProjectionResult:
    source: object
    nearest: frozenset
    distance: int
    params: tuple = ()  # parameters of the nearest points, for parameterized targets

    @property
    def param_range(self) -> tuple[int, int]:
        return (min(self.params), max(self.params))


def describe_target(Z) -> str:
    if isinstance(Z, (RaySchema, LineSchema)):
        return Z.describe()
    if isinstance(Z, PathSeg):
        return f"path[{len(Z.vertices)}]"
    return f"set[{len(Z)}]"


def is_parameterized(Z) -> bool:
    return isinstance(Z, (PathSeg, RaySchema, LineSchema))


def target_points(space: MetricSpace, Z, horizon: int) -> list[tuple[int, object]]:
    """(parameter, vertex) pairs of Z; rays and lines truncated at ``horizon``."""
    if isinstance(Z, RaySchema):
        return list(enumerate(Z.vertices(space, horizon)))
    if isinstance(Z, LineSchema):
        return [(t - horizon, v) for t, v in enumerate(Z.vertices(space, horizon))]
    if isinstance(Z, PathSeg):
        return list(enumerate(Z.vertices))
    pts = list(Z)
    if not pts:
        raise ProjectionError("empty target")
    return [(-1, v) for v in pts]


def certified_horizon(space: MetricSpace, Z, x) -> int:
    """Parameter bound past which no ray/line point can be nearest to x.

    For a geodesic ray, d(x, Z_t) >= t - d(x, Z_0), so parameters above
    2 d(x, Z_0) + 1 are strictly farther than Z_0 itself.
    """
    base = Z.basepoint
    return 2 * space.dist(x, base) + 1


def project(space: MetricSpace, Z, x) -> ProjectionResult:
    space.check_vertex(x)
    if isinstance(Z, (RaySchema, LineSchema)):
        pts = target_points(space, Z, certified_horizon(space, Z, x))
    else:
        pts = target_points(space, Z, 0)
    if not pts:
        raise ProjectionError("empty target")
    best = None
    near: list = []
    params: list = []
    for t, z in pts:
        d = space.dist(x, z)
        if best is None or d < best:
            best, near, params = d, [z], [t]
        elif d == best:
            near.append(z)
            params.append(t)
    return ProjectionResult(x, frozenset(near), best,
                            tuple(sorted(set(params))) if is_parameterized(Z) else ())


def set_diam(space: MetricSpace, S: Iterable) -> int:
    pts = list(dict.fromkeys(S))
    if not pts:
        raise ProjectionError("empty set")
    best = 0
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            d = space.dist(a, b)
            if d > best:
                best = d
    return best


def pair_diam(space: MetricSpace, Z, px: ProjectionResult, py: ProjectionResult) -> int:
    """diam of pi(x) u pi(y); parameter spread suffices for geodesic targets."""
    if is_parameterized(Z) and _geodesic_target(Z):
        return max(px.params[-1], py.params[-1]) - min(px.params[0], py.params[0])
    return set_diam(space, px.nearest | py.nearest)


def _geodesic_target(Z) -> bool:
    # rays/lines are validated at construction; paths carry the flag lazily
    return isinstance(Z, (RaySchema, LineSchema)) or getattr(Z, "_geodesic", False)


def mark_geodesic(space: MetricSpace, Z: PathSeg) -> PathSeg:
    if not Z.is_geodesic(space):
        raise ProjectionError("path is not geodesic")
    object.__setattr__(Z, "_geodesic", True)
    return Z


def invl(Z: PathSeg, S: Iterable) -> PathSeg:
    """Smallest subsegment of the geodesic Z containing S."""
    pos = {v: i for i, v in enumerate(Z.vertices)}
    idx = []
    for v in S:
        if v not in pos:
            raise ProjectionError(f"{v!r} is not on the segment")
        idx.append(pos[v])
    if not idx:
        raise ProjectionError("empty subset")
    return Z.sub(min(idx), max(idx))
