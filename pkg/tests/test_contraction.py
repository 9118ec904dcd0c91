import random

import pytest

from morsekit.boundary import ray_table
from morsekit.constants import SublinearFn, kappa_prime
from morsekit.contraction import (ContractionProfile, check_contracting, morse_profile, profile,
                                  recurrence, uniformity_profile)
from morsekit.projection import set_diam
from morsekit.space import LineSchema, PathSeg, RaySchema, SpaceError, build_space, geodesic


def brute_profile(space, target_pts, radius):
    """samples(r) by direct scanning: nearest points by minimum over the
    listed target points, pairs by BFS balls."""
    def near(v):
        d = {z: space.dist(v, z) for z in target_pts}
        m = min(d.values())
        return m, {z for z, e in d.items() if e == m}

    best = [0] * (radius + 1)
    for x in space.ball(radius):
        dx, px = near(x)
        if dx > radius:
            continue
        for y in space.ball(dx, center=x):
            diam = set_diam(space, px | near(y)[1])
            for r in range(dx, radius + 1):
                best[r] = max(best[r], diam)
    return best


class TestProfileExamples:
    def test_tree_segment_is_zero(self, f2):
        p = profile(f2, geodesic(f2, f2.o, f2.element("ab-a^2")), 6)
        assert p.samples == [0] * 7 and p.strong_bound == 0
        assert check_contracting(p, SublinearFn.constant(0)).passed

    def test_grid_axis(self, z2):
        p = profile(z2, LineSchema("a"), 8)
        assert p.samples[2:] == list(range(2, 9))
        for r in range(2, 9):
            x, y = p.witnesses[r]
            assert (z2.word_str(x), z2.word_str(y)) == (f"b^{r}", f"a^{r}b^{r}")
        x, y, d, diam = p.refuted_linear
        assert (z2.word_str(x), z2.word_str(y), d, diam) == ("b^8", "a^8b^8", 8, 8)
        assert p.masur_minsky is None and p.strong_bound is None

    def test_grid_axis_fails_sqrt(self, z2):
        rep = check_contracting(profile(z2, LineSchema("a"), 8), SublinearFn.parse("sqrt"))
        assert not rep.passed
        at4 = [v for v in rep.violations if v.instance == 4]
        assert at4 and at4[0].observed == 4 and at4[0].witness["x"] == "b^4"

    def test_free_product_ray_bounded(self, zz):
        ray = RaySchema.parse("c^inf")
        exact = profile(zz, ray, 4)
        assert max(exact.samples) <= 2
        sampled = profile(zz, ray, 8, mode="sampled", seed=3, count=4000)
        assert max(sampled.samples) <= 2
        table = ray_table(zz, ray, 8).table
        assert len(table) == 9 and max(table) <= 2
        assert check_contracting(exact, SublinearFn.constant(2)).passed

    def test_exhaustive_budget(self, zz):
        with pytest.raises(SpaceError, match="sampled"):
            profile(zz, RaySchema.parse("c^inf"), 8)

    def test_radius_cap(self, f2):
        with pytest.raises(SpaceError):
            profile(f2, RaySchema.parse("a^inf"), 40)

    def test_sampled_is_reproducible(self, zz):
        ray = RaySchema.parse("(ca)^inf")
        a = profile(zz, ray, 5, mode="sampled", seed=9, count=800)
        b = profile(zz, ray, 5, mode="sampled", seed=9, count=800)
        assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("alias,target,radius", [
    ("z2", "line:a", 4), ("z2", "seg:a^2b^3", 3), ("z2-star-z", "ray:(ca)^inf", 3),
    ("z2-star-z", "seg:a^2cb", 3), ("f2", "ray:(ab-)^inf", 4), ("z2-star-z-star-z", "ray:(dab)^inf", 2),
])
def test_exhaustive_matches_brute_force(alias, target, radius):
    space = build_space(alias)
    kind, _, text = target.partition(":")
    if kind == "line":
        Z = LineSchema(text)
        pts = Z.vertices(space, 4 * radius + 10)
    elif kind == "ray":
        Z = RaySchema.parse(text)
        pts = Z.vertices(space, 4 * radius + 10)
    else:
        Z = geodesic(space, space.o, space.element(text))
        pts = list(Z.vertices)
    assert profile(space, Z, radius).samples == brute_profile(space, pts, radius)


def test_vertex_set_target(z2):
    pts = [z2.o, z2.element("a^3"), z2.element("b^2")]
    assert profile(z2, pts, 3).samples == brute_profile(z2, pts, 3)


def test_samples_monotone_and_validated(z2):
    with pytest.raises(AssertionError):
        ContractionProfile(z2, "t", 2, [0, 2, 1], [None] * 3)


def test_csv_rows(z2):
    text = profile(z2, LineSchema("a"), 3).to_csv().splitlines()
    assert text[0] == "r,max_diam,witness_x,witness_y"
    assert text[-1] == "3,3,b^3,a^3b^3"


class TestRecurrence:
    def test_tree_is_zero(self, f2):
        est = recurrence(f2, geodesic(f2, f2.o, f2.element("a^8")), 3, "1/3")
        assert est.estimate == 0 and est.used > 0

    def test_grid_axis_grows(self, z2):
        est = recurrence(z2, LineSchema("a"), 3, "1/3", budget=300)
        assert est.by_separation
        for d, v in est.by_separation.items():
            assert 3 * v >= d
        assert max(est.by_separation) >= 8

    def test_adjacent_points_skipped(self, z2):
        # every pair of a 1-step target is too close to have a middle third
        with pytest.raises(SpaceError):
            recurrence(z2, geodesic(z2, z2.o, z2.element("a")), 3, "1/3")

    def test_bad_parameters(self, z2):
        with pytest.raises(SpaceError):
            recurrence(z2, LineSchema("a"), "1/2", "1/3")
        with pytest.raises(SpaceError):
            recurrence(z2, LineSchema("a"), 2, "1/2")


class TestMorseProfile:
    def test_tree_geodesics(self, f2):
        (entry,) = morse_profile(f2, geodesic(f2, f2.o, f2.element("a^8")), [(1, 0)])
        assert entry.estimate == 0 and entry.passed > 0

    def test_grid_staircase(self, z2):
        (entry,) = morse_profile(z2, LineSchema("a"), [(3, 0)])
        for d, v in entry.by_separation.items():
            assert 4 * v >= d
        assert entry.estimate >= 10

    def test_free_product_ray_bounded(self, zz):
        (entry,) = morse_profile(zz, RaySchema.parse("c^inf"), [(2, 2)])
        assert entry.passed > 0 and entry.estimate <= 4

    def test_empty_grid(self, z2):
        with pytest.raises(SpaceError):
            morse_profile(z2, LineSchema("a"), [])


def test_equivalences_agree_in_sign(z2, zz):
    """Bounded contraction goes with bounded Morse and recurrence data, and
    linear contraction failure with linear growth of both."""
    axis = LineSchema("a")
    assert profile(z2, axis, 6).refuted_linear is not None
    morse = morse_profile(z2, axis, [(3, 0)])[0].by_separation
    rec = recurrence(z2, axis, 3, "1/3", budget=200).by_separation
    assert morse[max(morse)] >= max(morse) // 4 and rec[max(rec)] >= max(rec) // 3

    ray = RaySchema.parse("c^inf")
    assert profile(zz, ray, 4).strong_bound is not None
    assert morse_profile(zz, ray, [(2, 2)])[0].estimate <= 4
    assert recurrence(zz, ray, 3, "1/3", budget=200).estimate <= 4


class TestUniformity:
    def test_tree_is_uniformly_zero(self, f2):
        p = uniformity_profile(f2, 5)
        assert p.samples == [0] * 6 and p.mode == "exhaustive"

    @pytest.mark.parametrize("alias", ["z2", "z2-star-z"])
    def test_flat_gives_linear_growth(self, alias):
        space = build_space(alias)
        p = uniformity_profile(space, 8)
        assert all(p.samples[r] >= r for r in range(9))
        x, y = p.witnesses[8]
        assert (space.word_str(x), space.word_str(y)) == ("b^8", "a^8b^8")
        assert p.refuted_linear is not None

    def test_symmetry_reduction_is_exact(self, zz):
        """Sweeping every segment gives the same table as the orbit sweep."""
        from morsekit import contraction as c
        reduced = uniformity_profile(zz, 2)
        saved = c._orbit_representatives
        c._orbit_representatives = lambda space, pts: pts
        try:
            full = uniformity_profile(zz, 2)
        finally:
            c._orbit_representatives = saved
        assert reduced.samples == full.samples and reduced.witnesses == full.witnesses


class TestStability:
    def test_hausdorff_perturbation(self, z2, f2):
        """A target thickened by C is controlled by the original profile at
        r + 2C, plus 4C + 2."""
        for space, seg in ((z2, "a^6"), (f2, "ab^2a")):
            Z = geodesic(space, space.o, space.element(seg))
            C = 1
            thick = set(Z.vertices) | {w for v in Z.vertices for w in space.neighbors(v)}
            R = 3
            base = profile(space, Z, R + 2 * C).samples
            pert = profile(space, thick, R).samples
            for r in range(R + 1):
                assert pert[r] <= base[r + 2 * C] + 4 * C + 2

    @pytest.mark.parametrize("ray", ["c^inf", "(ca)^inf"])
    def test_subsegments_of_contracting_ray(self, zz, ray):
        R = RaySchema.parse(ray)
        measured = ray_table(zz, R, 12).table
        rho = SublinearFn.constant(max(measured))
        kp = kappa_prime(rho, 1, 0)
        vs = R.vertices(zz, 8)
        rng = random.Random(4)
        for _ in range(4):
            i, j = sorted(rng.sample(range(len(vs)), 2))
            sub = PathSeg(tuple(vs[i:j + 1]))
            samples = profile(zz, sub, 3).samples
            assert all(m <= 2 * (2 * kp + 2 * rho(2 * r)) for r, m in enumerate(samples))

    def test_concatenated_rays_stay_bounded(self, zz):
        """Two contracting rays glued at o form a contracting line."""
        for per, back in (("c", "c-"), ("ca", "a-c-")):
            halves = [ray_table(zz, RaySchema.parse(f"({w})^inf"), 6).table for w in (per, back)]
            line = profile(zz, LineSchema(per), 4)
            assert line.strong_bound is not None
            assert max(line.samples) <= 2 * max(max(h) for h in halves) + 2
