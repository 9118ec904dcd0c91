"""Sublinear functions and the closed-form constants built from them.

Constants are exact Fractions when the contraction function is constant and
the inputs are rational; otherwise floats with absolute tolerance 1e-9.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

ROOT_TOL = 1e-12
M = 2


class ConstantsError(ValueError):
    pass


def _num(x):
    """Fractions for ints, Fractions and decimal strings; floats stay floats."""
    if isinstance(x, (Rational, str)):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class SublinearFn:
    """A non-decreasing sublinear function.

    ``const``: a.  ``pow``: a * r**c + b with 0 <= c < 1.
    ``log``: a * log(1 + r) + b.  ``table``: step function through sorted
    ``(r, value)`` points, continued by ``envelope`` (or by the last value)
    beyond the last point.  Without an envelope, thresholds must be reached
    inside the table.
    """

    kind: str
    a: object = 0
    b: object = 0
    c: object = 0
    table: tuple = ()
    envelope: "SublinearFn | None" = field(default=None)

    def __post_init__(self):
        if self.kind not in ("const", "pow", "log", "table"):
            raise ConstantsError(f"unknown variant {self.kind!r}")
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _num(getattr(self, name)))
        if self.kind in ("pow", "log") and (self.a < 0 or self.b < 0):
            raise ConstantsError("coefficients must be non-negative")
        if self.kind == "pow" and not 0 <= self.c < 1:
            raise ConstantsError("power-law exponent must lie in [0, 1)")
        if self.kind == "table":
            pts = tuple((_num(r), _num(v)) for r, v in self.table)
            if not pts:
                raise ConstantsError("empty table")
            if any(p[0] >= q[0] for p, q in zip(pts, pts[1:])):
                raise ConstantsError("table abscissae must increase")
            if any(p[1] > q[1] for p, q in zip(pts, pts[1:])):
                raise ConstantsError("table values must be non-decreasing")
            object.__setattr__(self, "table", pts)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, a) -> "SublinearFn":
        return cls("const", a=a)

    @classmethod
    def power(cls, a, b, c) -> "SublinearFn":
        return cls("pow", a=a, b=b, c=c)

    @classmethod
    def log(cls, a, b=0) -> "SublinearFn":
        return cls("log", a=a, b=b)

    @classmethod
    def tabulated(cls, points: Sequence, envelope: "SublinearFn | None" = None) -> "SublinearFn":
        return cls("table", table=tuple(points), envelope=envelope)

    @classmethod
    def parse(cls, text: str) -> "SublinearFn":
        """``const:2``, ``sqrt``, ``pow:a,b,c``, ``log:a,b`` or
        ``table:r=v;r=v[|<envelope>]``."""
        text = text.strip()
        if text == "sqrt":
            return cls.power(1, 0, Fraction(1, 2))
        kind, _, rest = text.partition(":")
        try:
            if kind == "const":
                return cls.constant(rest)
            if kind == "pow":
                a, b, c = rest.split(",")
                return cls.power(a, b, c)
            if kind == "log":
                parts = rest.split(",")
                return cls.log(parts[0], parts[1] if len(parts) > 1 else 0)
            if kind == "table":
                body, _, env = rest.partition("|")
                pts = [tuple(p.split("=")) for p in body.split(";") if p]
                return cls.tabulated(pts, cls.parse(env) if env else None)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConstantsError(f"cannot parse rho {text!r}: {exc}") from exc
        raise ConstantsError(f"cannot parse rho {text!r}")

    def describe(self) -> str:
        if self.kind == "const":
            return f"const:{self.a}"
        if self.kind == "pow":
            return f"pow:{self.a},{self.b},{self.c}"
        if self.kind == "log":
            return f"log:{self.a},{self.b}"
        body = ";".join(f"{r}={v}" for r, v in self.table)
        return f"table:{body}" + (f"|{self.envelope.describe()}" if self.envelope else "")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, r):
        if self.kind == "const":
            return self.a
        if self.kind == "pow":
            r = max(float(r), 0.0)
            if self.c == 0:
                return self.a + self.b
            return float(self.a) * r ** float(self.c) + float(self.b)
        if self.kind == "log":
            return float(self.a) * math.log1p(max(float(r), 0.0)) + float(self.b)
        val = None
        for x, v in self.table:
            if x <= r:
                val = v
            else:
                break
        if val is None:
            val = self.table[0][1]
        if r > self.table[-1][0] and self.envelope is not None:
            return max(val, self.envelope(r))
        return val

    @property
    def is_exact(self) -> bool:
        if self.kind == "const":
            return isinstance(self.a, Fraction)
        if self.kind == "table":
            return self.envelope is None and all(isinstance(v, Fraction) for _, v in self.table)
        return False

    def dominates(self, values: dict) -> bool:
        return all(v <= self(r) for r, v in values.items())


# ---------------------------------------------------------------------------
# threshold R* = inf{R > 0 : for all r >= R, 3 L^2 rho(r) <= r}


def _threshold(rho: SublinearFn, K):
    """inf{R > 0 : K rho(r) <= r for all r >= R}, clamped at 0."""
    if rho.kind == "const":
        return max(K * rho.a, 0) if rho.is_exact and isinstance(K, Fraction) else max(float(K) * float(rho.a), 0.0)
    if rho.kind in ("pow", "log"):
        K = float(K)

        def f(r):
            return r - K * rho(r)

        # r - K rho(r) is convex with f(0) <= 0, so {f <= 0} is an interval [0, R*]
        if f(ROOT_TOL) > 0 and rho(0) <= 0:
            return 0.0
        hi = 1.0
        while f(hi) <= 0:
            hi *= 2
            if hi > 1e300:
                raise ConstantsError("root isolation diverged")
        lo = 0.0
        while hi - lo > ROOT_TOL * max(1.0, hi):
            mid = (lo + hi) / 2
            if f(mid) <= 0:
                lo = mid
            else:
                hi = mid
        return hi
    # tabulated: rho is a step function, constant on [r_i, r_{i+1})
    pts = rho.table
    exact = rho.is_exact and isinstance(K, Fraction)
    conv = (lambda x: x) if exact else float
    K = conv(K)
    bound = 0
    if rho.envelope is not None:
        tail = _threshold(rho.envelope, K)
        bound = max(conv(pts[-1][0]), conv(tail)) if tail > pts[-1][0] else conv(pts[-1][0])
        # at the last point the step value also applies
        if K * conv(pts[-1][1]) > conv(pts[-1][0]):
            bound = max(bound, K * conv(pts[-1][1]))
    else:
        bound = 0
    # walk backwards through the steps: the condition holds on [x_i, x_{i+1})
    # from max(x_i, K v_i) on
    ok_from = None
    for i in range(len(pts) - 1, -1, -1):
        x, v = conv(pts[i][0]), conv(pts[i][1])
        need = K * v
        right = conv(pts[i + 1][0]) if i + 1 < len(pts) else None
        if right is not None and need >= right:
            break
        ok_from = max(x, need) if i > 0 else max(need, 0)
        if need > x:
            break
    if ok_from is None:
        if rho.envelope is None:
            raise ConstantsError("tabulated rho never satisfies the threshold condition")
        return bound
    if rho.envelope is not None:
        return max(ok_from, bound) if bound > conv(pts[-1][0]) else ok_from
    if ok_from > conv(pts[-1][0]):
        # without an envelope nothing is known past the last point
        raise ConstantsError("tabulated rho never satisfies the threshold condition within its table")
    return ok_from


def _coerce(L, A):
    L = _num(L)
    A = _num(A)
    if L < 1 or A < 0:
        raise ConstantsError("need L >= 1 and A >= 0")
    return L, A


def kappa(rho: SublinearFn, L=1, A=0):
    """max{3A, 3L^2, 1 + R*}."""
    L, A = _coerce(L, A)
    K = 3 * L * L
    R = _threshold(rho, K)
    out = max(3 * A, K, 1 + R)
    if not (rho.is_exact and isinstance(L, Fraction) and isinstance(A, Fraction)):
        out = float(out)
    return out


def kappa_prime(rho: SublinearFn, L=1, A=0):
    L, A = _coerce(L, A)
    return (L * L + 2) * (2 * kappa(rho, L, A) + A)


def lambda_(phi: SublinearFn, p=1, q=0):
    p, q = _coerce(p, q)
    return 6 * kappa(phi, 1, 0) + 2 * (q + kappa(phi, p, q))


def _sqrt(x):
    if isinstance(x, Fraction) and x >= 0:
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return math.sqrt(x)


def psi(rho: SublinearFn, r):
    r = _num(r)
    if r < 1:
        raise ConstantsError("psi needs r >= 1")
    s = _sqrt(r / 3)
    # below r = 3 the multiplicative argument of lambda drops under 1; lambda
    # is non-decreasing in it, so clamping keeps psi an upper bound
    out = r + M * kappa(rho, 2 * s + 1, r / 3) + lambda_(rho, max(s, 1), r / 3)
    if not out > r:
        raise AssertionError("psi must exceed r")
    return out


def escape_constants(rho: SublinearFn, L=1, A=0):
    """(4L, ((4L+1) kappa + lambda) / (4L) + A)."""
    L, A = _coerce(L, A)
    k = kappa(rho, L, A)
    lam = lambda_(rho, L, A)
    return 4 * L, ((4 * L + 1) * k + lam) / (4 * L) + A


def witness_bounds(r):
    """Open bounds (sqrt(r/3), r/3) on (L, A) of any witness against U(., r)."""
    r = _num(r)
    if r < 1:
        raise ConstantsError("witness bounds need r >= 1")
    return _sqrt(r / 3), r / 3


def threshold_inequalities_hold(rho: SublinearFn, L, A, r) -> bool:
    """r - L^2 rho(r) - A >= r/3 >= L^2 rho(r), with a 1e-9 allowance for
    floating evaluation."""
    L, A = _coerce(L, A)
    v = rho(r)
    tol = 0 if isinstance(v, Fraction) and isinstance(r, Fraction) else 1e-9
    return r - L * L * v - A >= r / 3 - tol and r / 3 >= L * L * v - tol


@dataclass(frozen=True)
class ConstantBundle:
    rho: SublinearFn
    L: object
    A: object
    kappa: object
    kappa_prime: object
    lambda_: object
    M: int = M

    @classmethod
    def compute(cls, rho: SublinearFn, L=1, A=0) -> "ConstantBundle":
        L, A = _coerce(L, A)
        return cls(rho, L, A, kappa(rho, L, A), kappa_prime(rho, L, A), lambda_(rho, L, A))

    def to_dict(self) -> dict:
        Lp, Ap = escape_constants(self.rho, self.L, self.A)
        return {
            "rho": self.rho.describe(),
            "L": num_json(self.L),
            "A": num_json(self.A),
            "kappa": num_json(self.kappa),
            "kappa_prime": num_json(self.kappa_prime),
            "lambda": num_json(self.lambda_),
            "M": self.M,
            "escape": {"L": num_json(Lp), "A": num_json(Ap)},
        }


def num_json(x):
    """JSON form: ints stay ints, other Fractions become 'p/q' strings,
    floats are rounded to 12 significant digits."""
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return float(f"{x:.12g}")
    return x
