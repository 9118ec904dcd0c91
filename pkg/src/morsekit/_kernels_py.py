"""Pure-Python reference versions of the BFS kernels.

Graphs are CSR arrays ``indptr``/``indices`` (int32) over vertex ids
``0..n-1``.  These functions define the semantics the compiled module
must reproduce exactly.
"""
from collections import deque

import numpy as np


def multi_source_bfs(indptr, indices, src, src_param):
    """Distance to the source set, plus the min/max source parameter over
    all nearest sources of each vertex.  Unreached vertices get -1."""
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    pmin = np.zeros(n, dtype=np.int32)
    pmax = np.zeros(n, dtype=np.int32)
    ip = indptr.tolist()
    ix = indices.tolist()
    d = dist.tolist()
    lo = pmin.tolist()
    hi = pmax.tolist()
    q = deque()
    for v, p in zip(src.tolist(), src_param.tolist()):
        if d[v] < 0:
            d[v] = 0
            lo[v] = hi[v] = p
            q.append(v)
        else:
            lo[v] = min(lo[v], p)
            hi[v] = max(hi[v], p)
    while q:
        v = q.popleft()
        dv = d[v] + 1
        for w in ix[ip[v]:ip[v + 1]]:
            if d[w] < 0:
                d[w] = dv
                lo[w] = lo[v]
                hi[w] = hi[v]
                q.append(w)
            elif d[w] == dv:
                if lo[v] < lo[w]:
                    lo[w] = lo[v]
                if hi[v] > hi[w]:
                    hi[w] = hi[v]
    return (np.asarray(d, dtype=np.int32), np.asarray(lo, dtype=np.int32),
            np.asarray(hi, dtype=np.int32))


def ball_union(indptr, indices, centers, radii):
    """Mask of vertices within ``radii[i]`` of ``centers[i]`` for some i
    (negative radius skips the center)."""
    n = len(indptr) - 1
    ip = indptr.tolist()
    ix = indices.tolist()
    mask = np.zeros(n, dtype=np.uint8)
    for c, r in zip(centers.tolist(), radii.tolist()):
        if r < 0:
            continue
        seen = {c: 0}
        q = deque([c])
        while q:
            v = q.popleft()
            if seen[v] == r:
                continue
            for w in ix[ip[v]:ip[v + 1]]:
                if w not in seen:
                    seen[w] = seen[v] + 1
                    q.append(w)
        mask[list(seen)] = 1
    return mask


def profile_sweep(indptr, indices, xs, radii, pmin, pmax):
    """For each source x = xs[c], BFS to depth radii[c] and maximise
    max(pmax[x], pmax[y]) - min(pmin[x], pmin[y]) over reached y.

    Returns (best, argbest, visited counts); the witness is the first
    maximiser in BFS order.
    """
    ip = indptr.tolist()
    ix = indices.tolist()
    rl = radii.tolist()
    lo = pmin.tolist()
    hi = pmax.tolist()
    m = len(xs)
    best = np.full(m, -1, dtype=np.int32)
    arg = np.full(m, -1, dtype=np.int32)
    visits = np.zeros(m, dtype=np.int64)
    for c, x in enumerate(xs.tolist()):
        r = rl[c]
        if r < 0:
            continue
        bx, ax = -1, -1
        hx, lx = hi[x], lo[x]
        depth = {x: 0}
        q = deque([x])
        while q:
            v = q.popleft()
            d = (hi[v] if hi[v] > hx else hx) - (lo[v] if lo[v] < lx else lx)
            if d > bx:
                bx, ax = d, v
            dv = depth[v]
            if dv == r:
                continue
            for w in ix[ip[v]:ip[v + 1]]:
                if w not in depth:
                    depth[w] = dv + 1
                    q.append(w)
        best[c] = bx
        arg[c] = ax
        visits[c] = len(depth)
    return best, arg, visits


def bfs_depths(indptr, indices, source, radius):
    """Depths from ``source`` (radius < 0 means unbounded); -1 if unreached."""
    n = len(indptr) - 1
    ip = indptr.tolist()
    ix = indices.tolist()
    depth = [-1] * n
    depth[source] = 0
    q = deque([source])
    while q:
        v = q.popleft()
        if radius >= 0 and depth[v] == radius:
            continue
        for w in ix[ip[v]:ip[v + 1]]:
            if depth[w] < 0:
                depth[w] = depth[v] + 1
                q.append(w)
    return np.asarray(depth, dtype=np.int32)


def walk_distances(step_factor, step_code, factor_kind, max_rank):
    """All-pairs distances along a walk in a free product of free and free
    abelian factors.

    Step k moves from vertex k to k+1 by one generator: ``step_factor[k]``
    is its factor (-1 for staying put) and ``step_code[k]`` is +-(i+1) for
    the i-th letter or coordinate.  The word between vertex i and vertex j
    is reduced on a stack, so each row costs O(n).
    """
    n = len(step_factor) + 1
    out = np.zeros((n, n), dtype=np.int32)
    sf = step_factor.tolist()
    sc = step_code.tolist()
    kind = factor_kind.tolist()
    for i in range(n):
        stack = []  # [factor, letter code] or [factor, vector, l1 norm]
        length = 0
        for j in range(i, n - 1):
            f = sf[j]
            if f >= 0:
                code = sc[j]
                if kind[f] == 0:
                    if stack and stack[-1][0] == f and stack[-1][1] == -code:
                        stack.pop()
                        length -= 1
                    else:
                        stack.append([f, code])
                        length += 1
                else:
                    idx = abs(code) - 1
                    if not (stack and stack[-1][0] == f):
                        stack.append([f, [0] * max_rank, 0])
                    top = stack[-1]
                    old = top[1][idx]
                    top[1][idx] = old + (1 if code > 0 else -1)
                    if abs(top[1][idx]) > abs(old):
                        top[2] += 1
                        length += 1
                    else:
                        top[2] -= 1
                        length -= 1
                    if top[2] == 0:
                        stack.pop()
            out[i, j + 1] = length
            out[j + 1, i] = length
    return out
