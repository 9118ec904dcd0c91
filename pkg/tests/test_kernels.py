import os
import subprocess
import sys

import numpy as np
import pytest

from morsekit import _kernels_py as py
from morsekit import kernels

cy = pytest.importorskip("morsekit._kernels")


def random_graph(rng, n, p):
    """Symmetric CSR graph with a spanning path so it is connected."""
    adj = [set() for _ in range(n)]
    for i in range(n - 1):
        adj[i].add(i + 1)
        adj[i + 1].add(i)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                adj[i].add(j)
                adj[j].add(i)
    indptr = np.zeros(n + 1, dtype=np.int32)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.asarray([w for a in adj for w in sorted(a)], dtype=np.int32)
    return indptr, indices


GRAPHS = [random_graph(np.random.default_rng(s), n, p) for s, n, p in
          [(0, 30, 0.08), (1, 80, 0.03), (2, 150, 0.015), (3, 12, 0.4)]]


@pytest.mark.parametrize("g", range(len(GRAPHS)))
def test_multi_source_bfs(g):
    ip, ix = GRAPHS[g]
    rng = np.random.default_rng(g)
    n = len(ip) - 1
    src = rng.choice(n, size=5, replace=False).astype(np.int32)
    par = rng.integers(0, 20, size=5).astype(np.int32)
    for a, b in zip(py.multi_source_bfs(ip, ix, src, par), cy.multi_source_bfs(ip, ix, src, par)):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("g", range(len(GRAPHS)))
def test_ball_union_and_depths(g):
    ip, ix = GRAPHS[g]
    rng = np.random.default_rng(10 + g)
    n = len(ip) - 1
    centers = rng.choice(n, size=4, replace=False).astype(np.int32)
    radii = np.asarray([-1, 0, 2, 3], dtype=np.int32)
    assert np.array_equal(py.ball_union(ip, ix, centers, radii), cy.ball_union(ip, ix, centers, radii))
    for r in (-1, 0, 3):
        assert np.array_equal(py.bfs_depths(ip, ix, int(centers[0]), r),
                              cy.bfs_depths(ip, ix, int(centers[0]), r))


@pytest.mark.parametrize("g", range(len(GRAPHS)))
def test_profile_sweep(g):
    ip, ix = GRAPHS[g]
    rng = np.random.default_rng(20 + g)
    n = len(ip) - 1
    lo = rng.integers(0, 10, size=n).astype(np.int32)
    hi = (lo + rng.integers(0, 3, size=n)).astype(np.int32)
    xs = np.arange(n, dtype=np.int32)
    radii = rng.integers(-1, 4, size=n).astype(np.int32)
    for a, b in zip(py.profile_sweep(ip, ix, xs, radii, lo, hi), cy.profile_sweep(ip, ix, xs, radii, lo, hi)):
        assert np.array_equal(a, b)


def test_bfs_depths_against_matrix_powers():
    ip, ix = GRAPHS[0]
    n = len(ip) - 1
    A = np.zeros((n, n), dtype=np.int64)
    for v in range(n):
        A[v, ix[ip[v]:ip[v + 1]]] = 1
    reach = np.eye(n, dtype=np.int64)[0]
    want = np.full(n, -1)
    want[0] = 0
    for d in range(1, n):
        reach = np.minimum(reach + reach @ A, 1)
        want[(reach > 0) & (want < 0)] = d
    assert np.array_equal(cy.bfs_depths(ip, ix, 0, -1), want)


def test_walk_distances():
    rng = np.random.default_rng(5)
    kinds = np.asarray([1, 0], dtype=np.int32)  # a flat factor of rank 2 and a free factor
    for _ in range(10):
        m = 25
        sf = rng.integers(-1, 2, size=m).astype(np.int32)
        sc = np.where(sf == 1, rng.choice([-1, 1], size=m), rng.choice([-2, -1, 1, 2], size=m)).astype(np.int32)
        assert np.array_equal(py.walk_distances(sf, sc, kinds, 2), cy.walk_distances(sf, sc, kinds, 2))


def test_backend_is_compiled():
    if os.environ.get("MORSEKIT_PURE_PYTHON"):
        pytest.skip("fallback forced by the environment")
    assert kernels.BACKEND == "cython"


def test_pure_python_fallback_subprocess():
    code = ("from morsekit import kernels; from morsekit.space import build_space; "
            "from morsekit.contraction import uniformity_profile; "
            "print(kernels.BACKEND, uniformity_profile(build_space('z2'), 4).samples)")
    outs = {}
    for flag in ("1", ""):
        env = dict(os.environ, MORSEKIT_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=600)
        assert res.returncode == 0, res.stderr
        outs[flag] = res.stdout.split(" ", 1)
    assert outs["1"][0] == "python" and outs[""][0] == "cython"
    assert outs["1"][1] == outs[""][1]
