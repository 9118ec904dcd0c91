import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from morsekit.constants import (ConstantBundle, ConstantsError, SublinearFn, escape_constants,
                                threshold_inequalities_hold, kappa, kappa_prime, lambda_, psi,
                                witness_bounds)

ZERO = SublinearFn.constant(0)
SQRT = SublinearFn.parse("sqrt")
F = Fraction


class TestGoldens:
    @pytest.mark.parametrize("rho,L,A,want", [(ZERO, 1, 0, 3), (ZERO, 2, 1, 12), (SQRT, 1, 0, 10)])
    def test_kappa(self, rho, L, A, want):
        assert kappa(rho, L, A) == pytest.approx(want, abs=1e-9)

    def test_kappa_exact_for_constants(self):
        assert kappa(ZERO, 1, 0) == 3 and isinstance(kappa(ZERO, 1, 0), Fraction)
        assert kappa(SublinearFn.constant(2), 1, 0) == 7

    @pytest.mark.parametrize("rho,L,A,want", [(ZERO, 1, 0, 18), (ZERO, 2, 1, 150), (SQRT, 1, 0, 60)])
    def test_kappa_prime(self, rho, L, A, want):
        assert kappa_prime(rho, L, A) == pytest.approx(want, abs=1e-9)

    @pytest.mark.parametrize("rho,p,q,want", [(ZERO, 1, 0, 24), (ZERO, 2, 1, 44), (SQRT, 1, 0, 80)])
    def test_lambda(self, rho, p, q, want):
        assert lambda_(rho, p, q) == pytest.approx(want, abs=1e-9)

    @pytest.mark.parametrize("r,want", [(3, 83), (12, 212)])
    def test_psi(self, r, want):
        assert psi(ZERO, r) == want

    def test_psi_grows(self):
        assert psi(ZERO, 12) > psi(ZERO, 3)
        for r in (1, 2, 5, 7.5, 40):
            assert psi(SQRT, r) > r

    @pytest.mark.parametrize("rho,L,A,want", [(ZERO, 1, 0, (4, F(39, 4))), (ZERO, 2, 1, (8, 20)),
                                              (SQRT, 1, 0, (4, 32.5))])
    def test_escape(self, rho, L, A, want):
        Lp, Ap = escape_constants(rho, L, A)
        assert Lp == want[0] and Ap == pytest.approx(want[1], abs=1e-9)

    @pytest.mark.parametrize("r,want", [(3, (1, 1)), (12, (2, 4)), (48, (4, 16))])
    def test_witness_bounds(self, r, want):
        assert witness_bounds(r) == want

    def test_bundle(self):
        b = ConstantBundle.compute(ZERO, 1, 0).to_dict()
        assert (b["kappa"], b["kappa_prime"], b["lambda"], b["M"]) == (3, 18, 24, 2)
        assert b["escape"] == {"L": 4, "A": "39/4"}


class TestErrors:
    def test_bad_L_A(self):
        with pytest.raises(ConstantsError):
            kappa(ZERO, F(1, 2), 0)
        with pytest.raises(ConstantsError):
            kappa(ZERO, 1, -1)

    def test_small_r(self):
        with pytest.raises(ConstantsError):
            witness_bounds(F(1, 2))
        with pytest.raises(ConstantsError):
            psi(ZERO, 0)

    def test_variants_validated(self):
        with pytest.raises(ConstantsError):
            SublinearFn.power(1, 0, 1)
        with pytest.raises(ConstantsError):
            SublinearFn.log(-1)
        with pytest.raises(ConstantsError):
            SublinearFn.tabulated([(0, 2), (1, 1)])
        with pytest.raises(ConstantsError):
            SublinearFn.parse("cube")

    def test_table_without_envelope_never_satisfied(self):
        # values outrun the abscissae at every step
        with pytest.raises(ConstantsError):
            kappa(SublinearFn.tabulated([(0, 5), (1, 10), (2, 20)]), 1, 0)
        # the same shape with a late flat stretch is fine
        assert kappa(SublinearFn.tabulated([(0, 5), (1, 10), (40, 10)]), 1, 0) == 31


def test_parse_roundtrip():
    for text in ("const:2", "pow:1,0,1/2", "log:2,1", "table:0=0;3=1;9=2|sqrt"):
        rho = SublinearFn.parse(text)
        assert SublinearFn.parse(rho.describe()) == rho


def test_tabulated_with_envelope():
    rho = SublinearFn.tabulated([(0, 0), (4, 1), (9, 2)], envelope=SQRT)
    k = kappa(rho, 1, 0)
    assert k == pytest.approx(10, abs=1e-9)
    for r in np.linspace(k, 500, 60):
        assert 3 * rho(r) <= r + 1e-9


RHOS = [ZERO, SublinearFn.constant(1), SublinearFn.constant(F(5, 2)), SQRT,
        SublinearFn.power(2, 1, F(2, 3)), SublinearFn.log(3, 1),
        SublinearFn.tabulated([(0, 0), (5, 1), (20, 3)], envelope=SublinearFn.log(1))]
LS = [1, F(3, 2), 2, 3]
AS = [0, F(1, 2), 2, 5]


@pytest.mark.parametrize("rho", RHOS, ids=lambda r: r.describe())
def test_threshold_inequalities_chain(rho):
    """The defining inequalities hold at kappa and at larger points."""
    for L, A in itertools.product(LS, AS):
        k = kappa(rho, L, A)
        for r in [k] + [k * (1 + j) + j for j in range(1, 11)]:
            assert threshold_inequalities_hold(rho, L, A, r), (L, A, r)


@pytest.mark.parametrize("rho", RHOS, ids=lambda r: r.describe())
def test_monotone_in_constants(rho):
    for fn in (kappa, kappa_prime, lambda_):
        for L1, L2 in zip(LS, LS[1:]):
            for A in AS:
                assert fn(rho, L1, A) <= fn(rho, L2, A)
        for A1, A2 in zip(AS, AS[1:]):
            for L in LS:
                assert fn(rho, L, A1) <= fn(rho, L, A2)
    vals = [psi(rho, r) for r in (1, 2, 3, 6, 12, 27, 48)]
    assert vals == sorted(vals)


def _dense_last_nonpositive(f, top=10 ** 6, step=1e-3, chunk=10 ** 7):
    """Largest grid point r = k * step in [0, top] with f(r) <= 0."""
    n = int(round(top / step))
    for hi in range(n + 1, 0, -chunk):
        r = np.arange(max(hi - chunk, 0), hi, dtype=np.float64) * step
        bad = np.nonzero(f(r) <= 0)[0]
        if len(bad):
            return r[bad[-1]]
    return 0.0


@pytest.mark.parametrize("rho,K", [(SublinearFn.power(2, 1, F(2, 3)), 3.0),
                                   (SublinearFn.log(3, 1), 12.0)], ids=["pow", "log"])
def test_root_isolation_against_dense_scan(rho, K):
    if rho.kind == "pow":
        f = lambda r: r - K * (2 * r ** (2 / 3) + 1)  # noqa: E731
    else:
        f = lambda r: r - K * (3 * np.log1p(r) + 1)  # noqa: E731
    L = math.sqrt(K / 3)
    R = kappa(rho, L, 0) - 1
    g = _dense_last_nonpositive(f)
    assert g <= R < g + 1e-3 + 1e-9
    fine = _dense_last_nonpositive(lambda r: f(g + r), top=1e-3, step=1e-7, chunk=10 ** 5) + g
    assert abs(fine - R) <= 1e-6
