"""Compare the compiled kernels with the pure-Python fallback.

Runs each kernel on the same inputs with both backends, checks that the
outputs agree, and prints the median wall time of each.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import random
import statistics
import time

import numpy as np

from morsekit import _kernels_py as py
from morsekit.kernels import BACKEND, as_i32, ball_graph
from morsekit.space import RaySchema, build_space, walk_matrix

try:
    from morsekit import _kernels as cy
except ImportError:  # pragma: no cover
    cy = None


def _time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return out, statistics.median(times)


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases():
    """(name, args) per kernel, on balls of the built-in spaces."""
    out = []
    for alias, G in (("f2", 8), ("z2-star-z", 6)):
        space = build_space(alias)
        U = ball_graph(space, G)
        ray = RaySchema.parse("a^inf" if alias == "f2" else "c^inf")
        pts = ray.vertices(space, G)
        src = as_i32([U.id_of(v) for v in pts])
        par = as_i32(range(len(pts)))
        out.append((f"multi_source_bfs {alias} |U|={len(U)}", "multi_source_bfs",
                    (U.indptr, U.indices, src, par)))
        dz, lo, hi = py.multi_source_bfs(U.indptr, U.indices, src, par)
        xs = as_i32(np.nonzero((U.norms <= G // 2) & (dz <= G // 2))[0])
        out.append((f"profile_sweep {alias} |xs|={len(xs)}", "profile_sweep",
                    (U.indptr, U.indices, xs, as_i32(dz[xs]), lo, hi)))
    space = build_space("z2-star-z")
    rng = random.Random(0)
    word = "".join(rng.choice("aAbBcC") for _ in range(600)).replace("A", "a-").replace("B", "b-").replace("C", "c-")
    verts = space.path_from(space.o, space.parse_word(word))
    sf, sc = [], []
    for u, v in zip(verts, verts[1:]):
        f, c = space._step_codes[space.step(u, v)]
        sf.append(f)
        sc.append(c)
    kinds = as_i32([0 if f.kind == "free" else 1 for f in space.factors])
    out.append((f"walk_distances z2-star-z n={len(verts)}", "walk_distances",
                (as_i32(sf), as_i32(sc), kinds, 2)))
    assert np.array_equal(walk_matrix(space, verts), py.walk_distances(as_i32(sf), as_i32(sc), kinds, 2))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not built; only the fallback is available")
    print(f"default backend: {BACKEND}")
    print(f"{'kernel':44s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn, inputs in cases():
        ref, tp = _time(lambda: getattr(py, fn)(*inputs), args.repeat)
        if cy is None:
            print(f"{name:44s} {tp:10.4f} {'-':>10s} {'-':>8s}")
            continue
        got, tc = _time(lambda: getattr(cy, fn)(*inputs), args.repeat)
        if not _same(ref, got):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:44s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
