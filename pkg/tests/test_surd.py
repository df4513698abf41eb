import math
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlace.surd import QuadSurd, compare_largest_root_to, sign_surd, sign_two_surds
from hyperlace.unipoly import UniPoly

small = st.fractions(min_value=-6, max_value=6, max_denominator=9)
radicand = st.integers(0, 40)


def test_normalization():
    assert QuadSurd(1, 1, 8) == QuadSurd(1, 2, 2)
    assert QuadSurd(0, 1, F(1, 4)).is_rational
    assert QuadSurd(0, 1, F(1, 4)) == F(1, 2)
    s = QuadSurd(F(3, 2), -1, 2)
    assert str(s) == "3/2 + -1*sqrt(2)"
    assert abs(float(s) - 0.0857864376) < 1e-9


def test_compare_largest_root_to_surd():
    f = UniPoly([1, -6, 6])  # roots (3 +- sqrt 3) / 6
    assert compare_largest_root_to(f, QuadSurd(F(1, 2), F(1, 6), 3)) == 0
    assert compare_largest_root_to(f, QuadSurd(F(1, 2), F(1, 6), 2)) == 1
    assert compare_largest_root_to(f, QuadSurd(F(1, 2), F(1, 6), 5)) == -1
    # the smaller root is also a root; the larger conjugate lies above it
    assert compare_largest_root_to(f, QuadSurd(F(1, 2), F(-1, 6), 3)) == 1
    assert compare_largest_root_to(f, F(4, 5)) == -1


@given(small, small, radicand)
@settings(max_examples=200, deadline=None)
def test_sign_surd_matches_float(a, b, s):
    value = float(a) + float(b) * math.sqrt(s)
    if abs(value) > 1e-9:
        assert sign_surd(a, b, s) == (1 if value > 0 else -1)


@given(small, small, radicand, small, radicand)
@settings(max_examples=200, deadline=None)
def test_sign_two_surds_matches_float(a, b, s, c, t):
    value = float(a) + float(b) * math.sqrt(s) + float(c) * math.sqrt(t)
    if abs(value) > 1e-9:
        assert sign_two_surds(a, b, s, c, t) == (1 if value > 0 else -1)


@given(small, small, radicand)
@settings(max_examples=100, deadline=None)
def test_bracket_contains_value(a, b, s):
    x = QuadSurd(a, b, s)
    lo, hi = x.bracket(F(1, 10**6))
    assert lo <= x <= hi and hi - lo <= F(1, 10**6)


@given(small, small, radicand)
@settings(max_examples=100, deadline=None)
def test_minpoly_vanishes(a, b, s):
    x = QuadSurd(a, b, s)
    q = x.minpoly()
    value = QuadSurd.of(0)
    power = QuadSurd.of(1)
    for c in q.coeffs:
        value = value + power * c
        power = power * x
    assert value == 0
