"""Exact quadratic surds ``a + b*sqrt(s)`` with rational ``a, b, s``.

Comparisons never round: signs of expressions with up to two distinct
radicals are decided by repeated squaring over the rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._scalar import RATIONAL, to_scalar
from .errors import PreconditionError
from .unipoly import SturmChain, UniPoly, _require_rational


def _sgn(x):
    return (x > 0) - (x < 0)


def sign_surd(a, b, s):
    """Exact sign of ``a + b*sqrt(s)`` for rational ``s >= 0``."""
    if b == 0 or s == 0:
        return _sgn(a)
    sa, sb = _sgn(a), _sgn(b)
    if sa == 0 or sa == sb:
        return sb
    gap = a * a - b * b * s
    if gap > 0:
        return sa
    if gap < 0:
        return sb
    return 0


def sign_two_surds(a, b, s, c, t):
    """Exact sign of ``a + b*sqrt(s) + c*sqrt(t)``."""
    if c == 0 or t == 0:
        return sign_surd(a, b, s)
    if b == 0 or s == 0:
        return sign_surd(a, c, t)
    # sign of the radical part alone
    sx = _sgn(b) if _sgn(b) == _sgn(c) else _sgn(b * b * s - c * c * t) * _sgn(b)
    if sx == 0:
        return _sgn(a)
    sa = _sgn(a)
    if sa == 0 or sa == sx:
        return sx
    # |a| versus |b sqrt s + c sqrt t|
    cmp = sign_surd(a * a - b * b * s - c * c * t, -2 * b * c, s * t)
    if cmp > 0:
        return sa
    if cmp < 0:
        return sx
    return 0


def _square_free(n):
    """``(k, r)`` with ``n = k*k*r``; only small square factors are extracted."""
    k = 1
    p = 2
    while p * p <= n and p < 10**4:
        while n % (p * p) == 0:
            n //= p * p
            k *= p
        p += 1
    r = math.isqrt(n)
    if r * r == n:
        return k * r, 1
    return k, n


@dataclass(frozen=True, eq=False)
class QuadSurd:
    """The real number ``a + b*sqrt(s)``; ``s`` is stored as an integer with small squares removed."""

    a: Fraction
    b: Fraction = Fraction(0)
    s: int = 0

    def __post_init__(self):
        a, b, s = (to_scalar(x, RATIONAL) for x in (self.a, self.b, self.s))
        if s < 0:
            raise PreconditionError("negative radicand", radicand=str(s))
        if b == 0 or s == 0:
            b, s = Fraction(0), 0
        else:
            # sqrt(p/q) = sqrt(p*q)/q
            k, r = _square_free(s.numerator * s.denominator)
            b = b * k / s.denominator
            if r == 1:
                a, b, s = a + b, Fraction(0), 0
            else:
                s = r
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "s", int(s))

    @classmethod
    def of(cls, x):
        return x if isinstance(x, QuadSurd) else cls(to_scalar(x, RATIONAL))

    @property
    def is_rational(self):
        return self.b == 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.s)

    def __repr__(self):
        if self.is_rational:
            return f"QuadSurd({self.a})"
        return f"QuadSurd({self.a} + {self.b}*sqrt({self.s}))"

    def __str__(self):
        if self.is_rational:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.s})" if self.a else f"{self.b}*sqrt({self.s})"

    def to_json(self):
        return {"a": str(self.a), "b": str(self.b), "radicand": str(self.s), "approx": float(self)}

    # -- arithmetic (closed only over a shared radicand) ------------------
    def __add__(self, other):
        other = QuadSurd.of(other)
        if other.is_rational:
            return QuadSurd(self.a + other.a, self.b, self.s)
        if self.is_rational:
            return QuadSurd(self.a + other.a, other.b, other.s)
        if self.s != other.s:
            raise PreconditionError("sum of surds with different radicands is not a quadratic surd")
        return QuadSurd(self.a + other.a, self.b + other.b, self.s)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.s)

    def __sub__(self, other):
        return self + (-QuadSurd.of(other))

    def __rsub__(self, other):
        return QuadSurd.of(other) - self

    def __mul__(self, other):
        other = QuadSurd.of(other)
        if other.is_rational:
            return QuadSurd(self.a * other.a, self.b * other.a, self.s)
        if self.is_rational:
            return other * self
        if self.s != other.s:
            raise PreconditionError("product of surds with different radicands")
        return QuadSurd(self.a * other.a + self.b * other.b * self.s,
                        self.a * other.b + self.b * other.a, self.s)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = to_scalar(other, RATIONAL)
        return QuadSurd(self.a / other, self.b / other, self.s)

    # -- ordering ----------------------------------------------------------
    def compare(self, other):
        """Exact sign of ``self - other``."""
        other = QuadSurd.of(other)
        if self.s == other.s or other.is_rational or self.is_rational:
            d = self - other
            return sign_surd(d.a, d.b, d.s)
        return sign_two_surds(self.a - other.a, self.b, self.s, -other.b, other.s)

    def sign(self):
        return sign_surd(self.a, self.b, self.s)

    def __eq__(self, other):
        try:
            return self.compare(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.s))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # -- rational enclosures -----------------------------------------------
    def minpoly(self):
        """Monic rational minimal polynomial (degree 1 or 2)."""
        if self.is_rational:
            return UniPoly([-self.a, 1])
        return UniPoly([self.a * self.a - self.b * self.b * self.s, -2 * self.a, 1])

    def bracket(self, width):
        """Rationals ``lo < self < hi`` with ``hi - lo <= width`` (``lo == hi`` when rational)."""
        if self.is_rational:
            return self.a, self.a
        width = Fraction(width)
        x = Fraction(float(self)).limit_denominator(10**15)
        step = Fraction(1, 10**9) * (1 + abs(x))
        lo, hi = x - step, x + step
        while self.compare(lo) <= 0:
            lo -= step
            step *= 2
        while self.compare(hi) >= 0:
            hi += step
            step *= 2
        while hi - lo > width:
            mid = (lo + hi) / 2
            if self.compare(mid) > 0:
                lo = mid
            else:
                hi = mid
        return lo, hi


def compare_largest_root_to(f, value):
    """Exact sign of ``maxroot(f) - value`` for a real-rooted rational ``f``.

    ``value`` may be rational or a ``QuadSurd``; equality with an irrational
    value is certified through its minimal polynomial.
    """
    _require_rational(f)
    value = QuadSurd.of(value)
    chain = SturmChain(f)
    if value.is_rational:
        if chain.count(value.a, None) > 0:
            return 1
        return 0 if chain.is_root(value.a) else -1
    q = value.minpoly()
    g = f
    while g.degree >= 2 and g.divmod(q)[1].is_zero():
        g = g.divmod(q)[0]
    if g is not f:
        # value is a root; with b < 0 its conjugate is a larger root
        if value.b < 0:
            return 1
        if g.degree < 1:
            return 0
        chain = SturmChain(g)
    width = Fraction(1, 2**10)
    while True:
        lo, hi = value.bracket(width)
        if chain.count(hi, None) > 0:
            return 1
        if chain.count(lo, None) == 0:
            return 0 if g is not f else -1
        width /= 16
