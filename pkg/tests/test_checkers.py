from fractions import Fraction

import pytest

from morsekit.checkers import (CheckerError, build_escape_qg, check_divagation, check_git,
                               check_hausdorff_lemma, check_keylemma, check_qgit,
                               divagation_time, estimate_qgit2, run_divagation, run_escape,
                               run_hausdorff, run_keylemma, run_qgit, run_tame, run_wag, wag_tail)
from morsekit.constants import SublinearFn, kappa, kappa_prime, lambda_
from morsekit.space import LineSchema, PathSeg, RaySchema, check_qg, geodesic

ZERO = SublinearFn.constant(0)
ONE = SublinearFn.constant(1)
A_RAY = RaySchema.parse("a^inf")
B_RAY = RaySchema.parse("b^inf")
C_RAY = RaySchema.parse("c^inf")


def ray(text):
    return RaySchema.parse(text)


class TestGit:
    def test_tree_segment(self, f2):
        rep = check_git(f2, geodesic(f2, f2.o, f2.element("a^5")), ZERO)
        assert rep.passed and rep.instances > 0
        assert set(rep.extra["envelope"].values()) == {0}

    def test_free_product_ray(self, zz):
        rep = check_git(zz, C_RAY, SublinearFn.constant(2), horizon=10, budget=400)
        assert rep.passed and rep.extra["sublinear_pairs"] > 0
        assert max(rep.extra["envelope"].values()) <= 4

    def test_flat_axis_precondition(self, z2):
        with pytest.raises(CheckerError, match="contracting"):
            check_git(z2, LineSchema("a"), SublinearFn.constant(2))


class TestQgit:
    def test_far_geodesic_in_tree(self, f2):
        path = PathSeg(tuple(f2.path_from(f2.element("b^6"), f2.parse_word("b^5"))))
        rep = check_qgit(f2, A_RAY, ZERO, [(path, 1, 0)])
        assert rep.passed and rep.instances == 1 and rep.min_slack >= 0

    def test_close_sample_skipped(self, f2):
        path = PathSeg(tuple(f2.path_from(f2.o, f2.parse_word("b^5"))))
        rep = check_qgit(f2, A_RAY, ZERO, [(path, 1, 0)])
        assert rep.instances == 0 and rep.skipped == 1

    def test_runner(self, zz):
        rep = run_qgit(zz, C_RAY, ONE, count=60, seed=1)
        assert rep.passed and rep.instances == 60


class TestDivagation:
    def test_tree_escape(self, f2):
        rep = check_divagation(f2, A_RAY, ZERO, B_RAY)
        # d(b^t, a-ray) = t, so T0 = kappa = 3 and the slack is t/2 + 15/2
        assert rep.passed and rep.min_slack == Fraction(15, 2)

    def test_divagation_time(self):
        assert divagation_time([0, 1, 2, 3, 4, 5], 3) == 3
        assert divagation_time([0, 5, 1, 4], Fraction(7, 2)) == 2
        assert divagation_time([0, 1, 1], 3) is None

    def test_asymptotic_ray_stays_close(self, f2):
        rep = check_divagation(f2, A_RAY, ZERO, A_RAY)
        assert rep.passed and rep.max_slack == kappa_prime(ZERO, 1, 0)

    def test_free_product_escape(self, zz):
        assert check_divagation(zz, C_RAY, ONE, A_RAY, horizon=30).passed

    def test_far_basepoint(self, f2):
        far = PathSeg(tuple(f2.path_from(f2.element("b^5"), f2.parse_word("b^4"))))
        with pytest.raises(CheckerError):
            check_divagation(f2, A_RAY, ZERO, far)

    def test_runner(self, zz):
        assert run_divagation(zz, C_RAY, ONE, count=60, seed=2).passed


class TestHausdorff:
    def test_identical(self, f2):
        # pairs (r, s) with |r - s| <= kappa qualify; on the diagonal the
        # prefixes coincide, off it they differ by |r - s| <= 3
        rep = check_hausdorff_lemma(f2, A_RAY, A_RAY, ZERO)
        assert rep.passed and rep.min_slack == kappa_prime(ZERO, 1, 0) - 3

    def test_tree_branch(self, f2):
        rep = check_hausdorff_lemma(f2, A_RAY, ray("a^6(b)^inf"), ZERO)
        # worst pairs are (a^9, a^6) and (a^6, a^6b^3): Hausdorff distance 3
        assert rep.passed and rep.min_slack == kappa_prime(ZERO, 1, 0) - 3

    def test_runner(self, zz):
        assert run_hausdorff(zz, ray("(ca)^inf"), ONE, count=40, seed=3).passed


class TestKeylemma:
    def test_tree_instance(self, f2):
        m = 4
        rep = check_keylemma(f2, A_RAY, ray(f"a^{m}(b)^inf"), ZERO, R=m + 5, J=5)
        assert rep.passed and rep.instances == 1
        # x = a^(m+5), y = a^(m+3): d(x, y) = 2 against 2J + lambda = 34
        assert rep.extra["max_ratio"] == Fraction(2, 5)
        assert rep.max_slack <= 10 + lambda_(ZERO, 1, 0)

    def test_close_x_is_its_own_y(self, f2):
        rep = check_keylemma(f2, A_RAY, A_RAY, ZERO, R=5, J=1)
        assert rep.passed and rep.extra["max_ratio"] == 0

    def test_no_qualifying_point(self, f2):
        with pytest.raises(CheckerError):
            check_keylemma(f2, A_RAY, B_RAY, ZERO, R=10, J=2)

    def test_runner(self, zz):
        assert run_keylemma(zz, C_RAY, ONE, count=60, seed=4).passed


class TestEscape:
    def test_tree(self, f2):
        s = build_escape_qg(f2, A_RAY, B_RAY, ZERO)
        assert (s.points["t0"], s.points["s0"]) == (3, 0)
        assert (s.points["L"], s.points["A"]) == (4, Fraction(39, 4))
        assert s.report.passed
        assert check_qg(f2, s.path, 4, Fraction(39, 4))

    def test_free_product(self, zz):
        s = build_escape_qg(zz, C_RAY, A_RAY, ONE)
        assert s.report.passed and check_qg(zz, s.path, s.points["L"], s.points["A"])

    def test_asymptotic(self, f2):
        with pytest.raises(CheckerError, match="asymptotic"):
            build_escape_qg(f2, A_RAY, A_RAY, ZERO)

    def test_runner(self, zz):
        assert run_escape(zz, C_RAY, ONE, count=20, seed=5).passed


class TestWag:
    T = 11 * 18
    S = T + 6 * 18 + 6 * 18

    def test_degenerate(self, f2):
        s = wag_tail(f2, A_RAY, A_RAY, A_RAY, ZERO, self.T, self.S)
        assert s.report.passed
        assert s.path.vertices == tuple(A_RAY.vertices(f2, s.path.length))

    def test_tree_branching_gamma(self, f2):
        gamma = ray(f"a^{self.T + 3}(b)^inf")
        s = wag_tail(f2, A_RAY, gamma, A_RAY, ZERO, self.T, self.S)
        assert s.report.passed and check_qg(f2, s.path, 3, 0)
        assert s.points["agreement_distance"] <= 11 * kappa_prime(ZERO, 1, 0)

    def test_preconditions_named(self, f2):
        with pytest.raises(CheckerError, match="T = 40"):
            wag_tail(f2, A_RAY, A_RAY, A_RAY, ZERO, 40, 500)
        with pytest.raises(CheckerError, match="S"):
            wag_tail(f2, A_RAY, A_RAY, A_RAY, ZERO, self.T, self.T + 10)

    def test_runner(self, zz):
        assert run_wag(zz, C_RAY, ONE, count=6, seed=6).passed


class TestQgit2:
    def test_tree_envelope_zero(self, f2):
        est = estimate_qgit2(f2, A_RAY, ZERO, budget=300)
        assert est["max_diam"] == 0

    def test_free_product_bounded(self, zz):
        est = estimate_qgit2(zz, C_RAY, ONE, 2, 2, budget=400)
        assert est["samples"] > 0 and est["ratio_non_increasing"]


def test_tame_runner(zz, f2):
    assert run_tame(zz, count=50, seed=7).passed
    assert run_tame(f2, count=50, seed=8).passed


def test_reports_independent_of_threads(zz, monkeypatch):
    out = []
    for n in ("1", "4"):
        monkeypatch.setenv("MORSEKIT_THREADS", n)
        reps = [run_qgit(zz, C_RAY, ONE, count=30, seed=9), run_keylemma(zz, C_RAY, ONE, count=30, seed=9),
                run_tame(zz, count=30, seed=9)]
        out.append([r.to_dict() for r in reps])
    assert out[0] == out[1]
