"""Kernel selection and CSR ball graphs.

The compiled ``_kernels`` extension is used when importable; otherwise the
pure-Python ``_kernels_py`` fallback.  Set ``MORSEKIT_PURE_PYTHON=1`` to force
the fallback.
"""
from __future__ import annotations

import os
import threading

import numpy as np

from . import _kernels_py

if os.environ.get("MORSEKIT_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
        BACKEND = "python"

multi_source_bfs = _impl.multi_source_bfs
ball_union = _impl.ball_union
profile_sweep = _impl.profile_sweep
bfs_depths = _impl.bfs_depths
walk_distances = _impl.walk_distances

BALL_GRAPH_VERTEX_CAP = 4_000_000


def as_i32(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.int32))


class BallGraph:
    """The induced subgraph on B(o, radius) as CSR arrays.

    For every built-in family each pair of ball vertices is joined by a
    geodesic inside the ball, so BFS distances here are exact.  Vertex ids
    follow BFS order from the basepoint.
    """

    def __init__(self, space, radius, norms, indptr, indices, vertices=None, tree=None):
        self.space = space
        self.radius = radius
        self.norms = norms
        self.indptr = indptr
        self.indices = indices
        self._vertices = vertices
        self._index = None if vertices is None else {v: i for i, v in enumerate(vertices)}
        self._tree = tree  # (parent, via_gen, children) for free groups

    def __len__(self) -> int:
        return len(self.norms)

    def element(self, i: int):
        if self._vertices is not None:
            return self._vertices[i]
        parent, via, _ = self._tree
        gens = []
        while i != 0:
            gens.append(int(via[i]))
            i = int(parent[i])
        sp = self.space
        return sp.element([sp.generators[g] for g in reversed(gens)])

    def id_of(self, v):
        if self._index is not None:
            return self._index.get(v)
        _, _, children = self._tree
        i = 0
        for g in self.space.spell(v):
            if i >= len(children):
                return None
            i = int(children[i, self.space.generators.index(g)])
            if i < 0:
                return None
        return i

    def ids(self, vs) -> np.ndarray:
        out = [self.id_of(v) for v in vs]
        if any(i is None for i in out):
            raise KeyError("vertex outside the ball graph")
        return as_i32(out)


_cache: dict = {}
_cache_lock = threading.Lock()


def ball_graph(space, radius: int) -> BallGraph:
    key = (id(space), radius)
    with _cache_lock:
        hit = _cache.get(key)
    # entries hold their space, so a live id cannot be reused by another one
    if hit is not None and hit[0] is space:
        return hit[1]
    if getattr(space, "generators", None) and space.is_tree:
        g = _tree_ball_graph(space, radius)
    else:
        g = _generic_ball_graph(space, radius)
    with _cache_lock:
        _cache[key] = (space, g)
        # keep the cache bounded: at most a handful of large graphs
        if len(_cache) > 8:
            _cache.pop(next(iter(_cache)))
    return g


def _tree_ball_graph(space, radius: int) -> BallGraph:
    k = len(space.generators)
    inverse = np.array([i ^ 1 for i in range(k)])  # generators come in (s, s-) pairs
    total = 1 + k * sum((k - 1) ** j for j in range(radius))
    if total > BALL_GRAPH_VERTEX_CAP:
        raise ValueError(f"ball of radius {radius} has {total} vertices, over the cap")
    parent = np.zeros(total, dtype=np.int32)
    via = np.full(total, -1, dtype=np.int32)
    norms = np.zeros(total, dtype=np.int32)
    n_internal = total - (k * (k - 1) ** (radius - 1) if radius > 0 else 1)
    children = np.full((max(n_internal, 1), k), -1, dtype=np.int32)
    level = np.array([0], dtype=np.int32)
    nxt_id = 1
    for depth in range(radius):
        # every (vertex, generator) pair except backtracking
        v = np.repeat(level, k)
        g = np.tile(np.arange(k, dtype=np.int32), len(level))
        keep = via[v] < 0 if depth == 0 else g != inverse[via[v]]
        v, g = v[keep], g[keep]
        ids = np.arange(nxt_id, nxt_id + len(v), dtype=np.int32)
        parent[ids] = v
        via[ids] = g
        norms[ids] = depth + 1
        children[v, g] = ids
        nxt_id += len(v)
        level = ids
    # CSR: parent first, then children in generator order
    deg = np.where(np.arange(total) == 0, 0, 1)
    has_children = np.zeros(total, dtype=bool)
    has_children[: len(children)] = norms[: len(children)] < radius
    nchild = np.zeros(total, dtype=np.int64)
    nchild[has_children] = (children[has_children[: len(children)]] >= 0).sum(axis=1)
    counts = deg + nchild
    indptr = np.zeros(total + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int32)
    nz = np.arange(1, total)
    indices[indptr[nz]] = parent[nz]
    # children are allocated contiguously per parent, in generator order
    first_child = np.full(total, -1, dtype=np.int64)
    kids = np.arange(1, total)
    first_child_of = np.full(total, total, dtype=np.int64)
    np.minimum.at(first_child_of, parent[kids], kids)
    for_kids = kids - first_child_of[parent[kids]]
    indices[indptr[parent[kids]] + deg[parent[kids]] + for_kids] = kids
    del first_child
    return BallGraph(space, radius, norms, as_i32(indptr), as_i32(indices), tree=(parent, via, children))


def _generic_ball_graph(space, radius: int) -> BallGraph:
    verts = space.ball(radius)
    if len(verts) > BALL_GRAPH_VERTEX_CAP:
        raise ValueError(f"ball of radius {radius} has {len(verts)} vertices, over the cap")
    index = {v: i for i, v in enumerate(verts)}
    indptr = [0]
    indices = []
    norms = []
    for v in verts:
        for w in space.neighbors(v):
            j = index.get(w)
            if j is not None:
                indices.append(j)
        indptr.append(len(indices))
        norms.append(space.norm(v))
    return BallGraph(space, radius, as_i32(norms), as_i32(indptr), as_i32(indices), vertices=verts)


def thread_count() -> int:
    """Worker threads for sweeps: ``MORSEKIT_THREADS`` if set, else the CPU count."""
    raw = os.environ.get("MORSEKIT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"MORSEKIT_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def pmap(fn, items) -> list:
    """Order-preserving map over a thread pool, so results never depend on
    the thread count."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
