import random

import pytest

from morsekit.projection import (ProjectionError, certified_horizon, invl, mark_geodesic, pair_diam,
                                 project, set_diam)
from morsekit.space import PathSeg, RaySchema, build_space, geodesic


def labels(space, pts):
    return {space.word_str(v) for v in pts}


def brute_projection(space, pts, x):
    """Nearest points by scanning every candidate."""
    d = {z: space.dist(x, z) for z in pts}
    m = min(d.values())
    return {z for z, v in d.items() if v == m}, m


class TestProject:
    def test_tree_branch_point(self, f2):
        Z = geodesic(f2, f2.o, f2.element("a^4"))
        res = project(f2, Z, f2.element("a^2b^3"))
        assert labels(f2, res.nearest) == {"a^2"} and res.distance == 3
        assert res.params == (2,)

    def test_grid_vertical_drop(self, z2):
        axis = [z2.mul(z2.element("a-^8"), z2.element(f"a^{i}")) for i in range(17)]
        res = project(z2, axis, z2.element("a^3b^4"))
        assert labels(z2, res.nearest) == {"a^3"} and res.distance == 4

    def test_free_product_ray_against_scan(self, zz):
        # exhaustive scan of c^k far beyond the certified bound
        ray = RaySchema.parse("c^inf")
        x = zz.element("a^3c^2")
        res = project(zz, ray, x)
        near, m = brute_projection(zz, ray.vertices(zz, 60), x)
        assert res.nearest == frozenset(near) and res.distance == m
        # leaving the flat costs 3, then c^2 has to be undone
        assert labels(zz, res.nearest) == {""} and res.distance == 5

    def test_ties_are_kept(self, z2):
        pts = [z2.element("a"), z2.element("b")]
        res = project(z2, pts, z2.o)
        assert len(res.nearest) == 2 and res.distance == 1

    def test_empty_target(self, f2):
        with pytest.raises(ProjectionError):
            project(f2, [], f2.o)

    def test_certified_bound(self, zz):
        x = zz.element("ab")
        assert certified_horizon(zz, RaySchema.parse("c^inf"), x) == 5


class TestSetDiam:
    def test_singleton(self, f2):
        assert set_diam(f2, [f2.element("ab")]) == 0

    @pytest.mark.parametrize("r", [1, 4, 7])
    def test_two_axis_points(self, z2, r):
        assert set_diam(z2, [z2.o, z2.element(f"a^{r}")]) == r

    @pytest.mark.parametrize("r", [2, 5])
    def test_projected_pair(self, z2, r):
        axis = [z2.mul(z2.element("a-^8"), z2.element(f"a^{i}")) for i in range(17)]
        px = project(z2, axis, z2.element(f"b^{r}"))
        py = project(z2, axis, z2.element(f"a^{r}b^{r}"))
        assert set_diam(z2, px.nearest | py.nearest) == r

    def test_pair_diam_uses_parameters_on_geodesics(self, zz):
        Z = mark_geodesic(zz, geodesic(zz, zz.o, zz.element("a^6")))
        rng = random.Random(2)
        ball = zz.ball(4)
        for _ in range(50):
            x, y = rng.sample(ball, 2)
            px, py = project(zz, Z, x), project(zz, Z, y)
            assert pair_diam(zz, Z, px, py) == set_diam(zz, px.nearest | py.nearest)

    def test_empty(self, f2):
        with pytest.raises(ProjectionError):
            set_diam(f2, [])


class TestInvl:
    @pytest.fixture
    def seg(self, f2):
        return geodesic(f2, f2.o, f2.element("a^6"))

    def test_single_vertex(self, f2, seg):
        sub = invl(seg, [f2.element("a^3")])
        assert sub.length == 0 and sub.vertices == (f2.element("a^3"),)

    def test_two_points(self, f2, seg):
        sub = invl(seg, [f2.element("a^4"), f2.element("a")])
        assert sub.vertices[0] == f2.element("a") and sub.vertices[-1] == f2.element("a^4")
        assert sub.length == 3

    def test_spread(self, f2, seg):
        sub = invl(seg, [f2.o, f2.element("a^2"), f2.element("a^5")])
        assert sub.length == 5 and sub.vertices[0] == f2.o

    def test_not_on_segment(self, f2, seg):
        with pytest.raises(ProjectionError):
            invl(seg, [f2.element("b")])

    def test_non_geodesic_rejected(self, f2):
        walk = PathSeg(tuple(f2.path_from(f2.o, f2.parse_word("aa-"))))
        with pytest.raises(ProjectionError):
            mark_geodesic(f2, walk)


@pytest.mark.parametrize("alias,ray", [("f2", "(ab)^inf"), ("z2", "a^inf"), ("z2-star-z", "(ca)^inf"),
                                       ("z2-star-z-star-z", "(cd)^inf")])
def test_idempotence(alias, ray):
    space = build_space(alias)
    R = RaySchema.parse(ray)
    for z in R.vertices(space, 12):
        res = project(space, R, z)
        assert res.nearest == frozenset([z]) and res.distance == 0


@pytest.mark.parametrize("alias,ray,radius", [("f2", "(ab-)^inf", 8), ("z2", "(ab)^inf", 8),
                                              ("z2-star-z", "(ca)^inf", 6),
                                              ("z2-star-z-star-z", "(cad)^inf", 4)])
def test_ray_truncation_is_safe(alias, ray, radius):
    """Pushing the ray search 8 steps past the certified bound never finds
    anything closer, over a whole ball."""
    space = build_space(alias)
    R = RaySchema.parse(ray)
    far = R.vertices(space, 2 * radius + 9)
    for x in space.ball(radius):
        res = project(space, R, x)
        h = certified_horizon(space, R, x)
        near, m = brute_projection(space, far[:h + 9], x)
        assert res.nearest == frozenset(near) and res.distance == m


def test_tree_dichotomy(f2):
    """Trees: projections are single points, and close points share them."""
    Z = geodesic(f2, f2.element("b-"), f2.element("a^3b"))
    ball = f2.ball(5)
    proj = {x: project(f2, Z, x) for x in ball}
    assert all(len(p.nearest) == 1 for p in proj.values())
    for x in ball:
        dx = proj[x].distance
        for y in f2.ball(dx, center=x):
            if y in proj:
                assert proj[y].nearest == proj[x].nearest
