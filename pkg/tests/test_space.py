import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest

from morsekit.space import (PathSeg, RaySchema, SpaceError, SpaceSpec, build_space, check_qg,
                            count_geodesics, cross_matrix, enumerate_geodesics, geodesic,
                            hausdorff, load_space_spec, tame, walk_matrix)

from conftest import bfs_distances, count_geodesic_paths


def word(space, w):
    return space.element(w)


class TestConstruction:
    def test_free_group_is_four_regular(self, f2):
        for v in f2.ball(3):
            assert len(set(f2.neighbors(v))) == 4

    def test_grid_distance(self, z2):
        assert z2.dist(z2.o, word(z2, "a^3b^4")) == 7

    def test_free_product_distance(self, zz):
        assert zz.dist(zz.o, word(zz, "a^2b^3ca-")) == 7
        assert zz.dist(zz.o, word(zz, "a^3c^2b")) == 6

    def test_free_word_length(self, f2):
        assert f2.dist(f2.o, word(f2, "abab-")) == 4

    def test_diagonal_in_grid(self, z2):
        for r in range(6):
            assert z2.dist(z2.o, word(z2, f"a^{r}b^{r}")) == 2 * r

    def test_json_config(self):
        text = json.dumps({"family": "free_product", "factors": [
            {"family": "free_abelian", "rank": 2, "alphabet": ["a", "b"]},
            {"family": "free", "rank": 1, "alphabet": ["c"]}]})
        assert build_space(load_space_spec(text)).spec == build_space("z2-star-z").spec

    def test_alphabet_collision_rejected(self):
        with pytest.raises(SpaceError):
            build_space(SpaceSpec.free_product(SpaceSpec.free(1, ["a"]), SpaceSpec.free(1, ["a"])))

    def test_disconnected_graph_rejected(self):
        with pytest.raises(SpaceError):
            build_space(SpaceSpec.explicit_graph(4, [(0, 1), (2, 3)]))

    def test_explicit_graph_distances(self):
        cyc = build_space(SpaceSpec.explicit_graph(6, [(i, (i + 1) % 6) for i in range(6)]))
        assert [cyc.dist(0, i) for i in range(6)] == [0, 1, 2, 3, 2, 1]


@pytest.mark.parametrize("alias,radius,reach", [("f2", 8, 7), ("z2", 8, 16), ("z2-star-z", 5, 6),
                                                ("z2-star-z-star-z", 4, 5)])
def test_distance_matches_bfs(alias, radius, reach):
    """Normal-form distances agree with BFS (to depth ``reach``) from a
    spread of sources, for every vertex of the ball."""
    space = build_space(alias)
    ball = space.ball(radius)
    rng = random.Random(7)
    sources = space.ball(1) + rng.sample(ball, 8)
    for s in sources:
        bfs = bfs_distances(space, s, reach)
        for v in ball:
            if v in bfs:
                assert space.dist(s, v) == bfs[v]
            else:
                assert space.dist(s, v) > reach


@pytest.mark.parametrize("alias", ["f2", "z2", "z2-star-z", "z2-star-z-star-z"])
def test_metric_axioms_sampled(alias):
    space = build_space(alias)
    pts = space.ball(4)
    rng = random.Random(1)
    for _ in range(300):
        x, y, z = rng.sample(pts, 3)
        assert space.dist(x, y) == space.dist(y, x)
        assert space.dist(x, z) <= space.dist(x, y) + space.dist(y, z)
        assert (space.dist(x, y) == 0) == (x == y)


@pytest.mark.parametrize("alias", ["f2", "z2", "z2-star-z", "z2-star-z-star-z"])
def test_walk_matrix_matches_pairwise(alias):
    space = build_space(alias)
    rng = random.Random(3)
    pts = rng.sample(space.ball(4), 40)
    D = walk_matrix(space, pts)
    ref = np.array([[space.dist(x, y) for y in pts] for x in pts])
    assert np.array_equal(D, ref)
    C = cross_matrix(space, pts[:15], pts[15:])
    assert np.array_equal(C, ref[:15, 15:])


class TestGeodesics:
    def test_tree_geodesics_unique(self, f2):
        rng = random.Random(0)
        pts = f2.ball(4)
        for _ in range(30):
            x, y = rng.sample(pts, 2)
            paths, exhaustive = enumerate_geodesics(f2, x, y)
            assert exhaustive and len(paths) == 1

    def test_lattice_count(self, z2):
        paths, exhaustive = enumerate_geodesics(z2, z2.o, word(z2, "a^2b^2"))
        assert exhaustive and len(paths) == 6

    def test_flat_syllable_count(self, zz):
        paths, _ = enumerate_geodesics(zz, zz.o, word(zz, "a^2b^2c"))
        assert len(paths) == 6

    @pytest.mark.parametrize("alias", ["z2", "z2-star-z"])
    def test_counts_match_dfs_oracle(self, alias):
        space = build_space(alias)
        rng = random.Random(5)
        for y in rng.sample(space.ball(6), 25):
            paths, exhaustive = enumerate_geodesics(space, space.o, y, budget=10**4)
            assert exhaustive
            assert len(paths) == count_geodesic_paths(space, space.o, y) == count_geodesics(space, space.o, y)
            assert all(check_qg(space, p, 1, 0) for p in paths)
            assert len({p.vertices for p in paths}) == len(paths)

    def test_enumeration_is_lexicographic_and_budgeted(self, z2):
        y = word(z2, "a^3b^3")
        paths, exhaustive = enumerate_geodesics(z2, z2.o, y, budget=5)
        assert not exhaustive and len(paths) == 5
        again, _ = enumerate_geodesics(z2, z2.o, y, budget=5)
        assert [p.vertices for p in paths] == [p.vertices for p in again]

    def test_zero_budget_rejected(self, z2):
        with pytest.raises(SpaceError):
            enumerate_geodesics(z2, z2.o, z2.o, budget=0)

    def test_canonical_geodesic(self, zz):
        g = geodesic(zz, zz.o, word(zz, "a^2cb-"))
        assert g.is_geodesic(zz) and g.length == 4


class TestQuasiGeodesics:
    def test_geodesic_passes(self, zz):
        assert check_qg(zz, geodesic(zz, zz.o, word(zz, "a^3c^2b")), 1, 0)

    def test_staircase_is_geodesic(self, z2):
        p = PathSeg(tuple(z2.path_from(z2.o, z2.parse_word("ab" * 6))))
        assert check_qg(z2, p, 1, 0)

    def test_backtrack_fails_at_worst_pair(self, f2):
        p = PathSeg(tuple(f2.path_from(f2.o, f2.parse_word("aaa-a-"))))
        v = check_qg(f2, p, 1, 0)
        assert not v and v.violation[:3] == (0, 4, 0) and v.min_slack == -4

    def test_bad_constants(self, f2):
        p = PathSeg((f2.o,))
        with pytest.raises(SpaceError):
            check_qg(f2, p, Fraction(1, 2), 0)
        with pytest.raises(SpaceError):
            check_qg(f2, p, 1, -1)

    def test_exact_against_brute_force(self, zz):
        from morsekit.checkers import random_qg_walk
        rng = random.Random(11)
        for trial in range(40):
            walk = random_qg_walk(zz, rng, zz.o, 14, (2, 2))
            p = PathSeg(tuple(walk))
            L = max(Fraction(rng.choice([1, 3, 4]), rng.choice([1, 2])), Fraction(1))
            A = Fraction(rng.randint(0, 4), 2)
            ok = all(Fraction(j - i) / L - A <= zz.dist(walk[i], walk[j]) <= L * (j - i) + A
                     for i, j in itertools.combinations(range(len(walk)), 2))
            assert bool(check_qg(zz, p, L, A)) == ok


class TestTame:
    def test_geodesic_is_fixed(self, zz):
        g = geodesic(zz, zz.o, word(zz, "a^2cb"))
        assert tame(zz, g, 1, 0).vertices == g.vertices

    def test_sampled_grid_path(self, z2):
        # integer samples of a (2,1)-quasi-geodesic: steps of length 0..2
        pts = [z2.o]
        for w in ["a", "ab", "", "b", "a-b", "b", "ab"]:
            pts.append(z2.mul(pts[-1], z2.element(w)))
        p = PathSeg(tuple(pts))
        assert check_qg(z2, p, 2, 1)
        out = tame(z2, p, 2, 1)
        assert check_qg(z2, out, 2, 6)
        assert out.is_edge_path(z2) or any(out.vertices[i] == out.vertices[i + 1] for i in range(len(out) - 1))

    def test_gapped_tree_path_hausdorff(self, f2):
        walk = f2.path_from(f2.o, f2.parse_word("abab-ab-aba"))
        p = PathSeg(tuple(walk[::2]), tuple(Fraction(i) for i in range(0, len(walk), 2)))
        out = tame(f2, p, 1, 0)
        assert hausdorff(f2, p.vertices, out.vertices) <= 1
        assert check_qg(f2, out, 1, 2)


class TestRays:
    def test_parse_forms(self):
        assert RaySchema.parse("(ca)^inf") == RaySchema("", "ca")
        assert RaySchema.parse("a^3(b)^inf") == RaySchema("a^3", "b")
        assert RaySchema.parse('{"prefix":"caca","period":"ca"}') == RaySchema("caca", "ca")
        assert RaySchema.parse("c^inf") == RaySchema("", "c")

    def test_canonical_period(self):
        assert RaySchema("", "caca").canonical().period == "ca"

    def test_truncations_geodesic(self, zz):
        for text in ("(ca)^inf", "c^inf", "ab(ca)^inf", "(cab)^inf"):
            assert RaySchema.parse(text).verify_geodesic(zz, 30)

    def test_backtracking_ray_not_geodesic(self, f2):
        assert not RaySchema.parse("(aa-)^inf").verify_geodesic(f2, 6)
