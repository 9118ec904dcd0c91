from collections import deque

import pytest

from morsekit.space import build_space


@pytest.fixture(scope="session")
def f2():
    return build_space("f2")


@pytest.fixture(scope="session")
def z2():
    return build_space("z2")


@pytest.fixture(scope="session")
def zz():
    """Z^2 * Z with alphabet a, b (flat) and c."""
    return build_space("z2-star-z")


@pytest.fixture(scope="session")
def zzz():
    return build_space("z2-star-z-star-z")


def bfs_distances(space, source, radius):
    """Plain BFS over neighbours: an oracle independent of normal forms."""
    seen = {source: 0}
    q = deque([source])
    while q:
        v = q.popleft()
        if seen[v] == radius:
            continue
        for w in space.neighbors(v):
            if w not in seen:
                seen[w] = seen[v] + 1
                q.append(w)
    return seen


def count_geodesic_paths(space, x, y):
    """Count geodesics by DFS over neighbours, using BFS layers from y."""
    d = bfs_distances(space, y, space.dist(x, y) + 2)
    memo = {}

    def rec(v):
        if v == y:
            return 1
        if v not in memo:
            memo[v] = sum(rec(w) for w in space.neighbors(v) if d.get(w, 10**9) == d[v] - 1)
        return memo[v]

    return rec(x)


# acceptance criteria outcomes, printed once at the end of the session
CRITERIA: dict = {}


def pytest_runtest_makereport(item, call):
    num = getattr(item.function, "criterion", None)
    if num is not None and call.when == "call":
        CRITERIA[num] = (item.function.title, call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        title, ok = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {title}")
