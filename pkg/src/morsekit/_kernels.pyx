# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BFS kernels over CSR ball graphs.

Signatures match ``morsekit._kernels_py``; see that module for semantics.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def multi_source_bfs(const int[::1] indptr, const int[::1] indices,
                     const int[::1] src, const int[::1] src_param):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[int, ndim=1] dist_a = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] pmin_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] pmax_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n, dtype=np.int32)
    cdef int[::1] dist = dist_a
    cdef int[::1] pmin = pmin_a
    cdef int[::1] pmax = pmax_a
    cdef int[::1] queue = queue_a
    cdef Py_ssize_t head = 0, tail = 0, i, k
    cdef int v, w, p
    for i in range(src.shape[0]):
        v = src[i]
        p = src_param[i]
        if dist[v] < 0:
            dist[v] = 0
            pmin[v] = p
            pmax[v] = p
            queue[tail] = v
            tail += 1
        else:
            if p < pmin[v]:
                pmin[v] = p
            if p > pmax[v]:
                pmax[v] = p
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                pmin[w] = pmin[v]
                pmax[w] = pmax[v]
                queue[tail] = w
                tail += 1
            elif dist[w] == dist[v] + 1:
                if pmin[v] < pmin[w]:
                    pmin[w] = pmin[v]
                if pmax[v] > pmax[w]:
                    pmax[w] = pmax[v]
    return dist_a, pmin_a, pmax_a


def ball_union(const int[::1] indptr, const int[::1] indices,
               const int[::1] centers, const int[::1] radii):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] mask_a = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[int, ndim=1] depth_a = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] stamp_a = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n, dtype=np.int32)
    cdef cnp.uint8_t[::1] mask = mask_a
    cdef int[::1] depth = depth_a
    cdef int[::1] stamp = stamp_a
    cdef int[::1] queue = queue_a
    cdef Py_ssize_t c, head, tail, k
    cdef int v, w, r
    for c in range(centers.shape[0]):
        r = radii[c]
        if r < 0:
            continue
        v = centers[c]
        stamp[v] = <int>c
        depth[v] = 0
        mask[v] = 1
        queue[0] = v
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            if depth[v] == r:
                continue
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if stamp[w] != c:
                    stamp[w] = <int>c
                    depth[w] = depth[v] + 1
                    mask[w] = 1
                    queue[tail] = w
                    tail += 1
    return mask_a


def profile_sweep(const int[::1] indptr, const int[::1] indices,
                  const int[::1] xs, const int[::1] radii,
                  const int[::1] pmin, const int[::1] pmax):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = xs.shape[0]
    cdef cnp.ndarray[int, ndim=1] best_a = np.full(m, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] arg_a = np.full(m, -1, dtype=np.int32)
    cdef cnp.ndarray[long long, ndim=1] visits_a = np.zeros(m, dtype=np.int64)
    cdef cnp.ndarray[int, ndim=1] depth_a = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] stamp_a = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n, dtype=np.int32)
    cdef int[::1] best = best_a
    cdef int[::1] arg = arg_a
    cdef long long[::1] visits = visits_a
    cdef int[::1] depth = depth_a
    cdef int[::1] stamp = stamp_a
    cdef int[::1] queue = queue_a
    cdef Py_ssize_t c, head, tail, k
    cdef int x, v, w, r, hi, lo, d, bx, ax
    for c in range(m):
        x = xs[c]
        r = radii[c]
        if r < 0:
            continue
        bx = -1
        ax = -1
        stamp[x] = <int>c
        depth[x] = 0
        queue[0] = x
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            hi = pmax[v] if pmax[v] > pmax[x] else pmax[x]
            lo = pmin[v] if pmin[v] < pmin[x] else pmin[x]
            d = hi - lo
            if d > bx:
                bx = d
                ax = v
            if depth[v] == r:
                continue
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if stamp[w] != c:
                    stamp[w] = <int>c
                    depth[w] = depth[v] + 1
                    queue[tail] = w
                    tail += 1
        best[c] = bx
        arg[c] = ax
        visits[c] = tail
    return best_a, arg_a, visits_a


def bfs_depths(const int[::1] indptr, const int[::1] indices, int source, int radius):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[int, ndim=1] depth_a = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] queue_a = np.empty(n, dtype=np.int32)
    cdef int[::1] depth = depth_a
    cdef int[::1] queue = queue_a
    cdef Py_ssize_t head = 0, tail = 1, k
    cdef int v, w
    depth[source] = 0
    queue[0] = source
    while head < tail:
        v = queue[head]
        head += 1
        if radius >= 0 and depth[v] == radius:
            continue
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if depth[w] < 0:
                depth[w] = depth[v] + 1
                queue[tail] = w
                tail += 1
    return depth_a


def walk_distances(const int[::1] step_factor, const int[::1] step_code,
                   const int[::1] factor_kind, int max_rank):
    cdef Py_ssize_t n = step_factor.shape[0] + 1
    cdef cnp.ndarray[int, ndim=2] out_a = np.zeros((n, n), dtype=np.int32)
    cdef int[:, ::1] out = out_a
    cdef cnp.ndarray[int, ndim=1] ent_factor_a = np.empty(n, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] ent_code_a = np.empty(n, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] ent_norm_a = np.empty(n, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=2] vecs_a = np.zeros((n, max(max_rank, 1)), dtype=np.int32)
    cdef int[::1] ent_factor = ent_factor_a
    cdef int[::1] ent_code = ent_code_a
    cdef int[::1] ent_norm = ent_norm_a
    cdef int[:, ::1] vecs = vecs_a
    cdef Py_ssize_t i, j, top, k
    cdef int f, code, length, idx, sgn, old
    for i in range(n):
        top = -1
        length = 0
        for j in range(i, n - 1):
            f = step_factor[j]
            if f >= 0:
                code = step_code[j]
                if factor_kind[f] == 0:
                    if top >= 0 and ent_factor[top] == f and ent_code[top] == -code:
                        top -= 1
                        length -= 1
                    else:
                        top += 1
                        ent_factor[top] = f
                        ent_code[top] = code
                        length += 1
                else:
                    idx = (code if code > 0 else -code) - 1
                    sgn = 1 if code > 0 else -1
                    if not (top >= 0 and ent_factor[top] == f):
                        top += 1
                        ent_factor[top] = f
                        ent_code[top] = 0
                        ent_norm[top] = 0
                        for k in range(max_rank):
                            vecs[top, k] = 0
                    old = vecs[top, idx]
                    vecs[top, idx] = old + sgn
                    if (old + sgn if old + sgn > 0 else -(old + sgn)) > (old if old > 0 else -old):
                        ent_norm[top] += 1
                        length += 1
                    else:
                        ent_norm[top] -= 1
                        length -= 1
                    if ent_norm[top] == 0:
                        top -= 1
            out[i, j + 1] = length
            out[j + 1, i] = length
    return out_a
