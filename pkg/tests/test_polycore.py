import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlace import polycore
from hyperlace.errors import BackendMismatch, CapExceeded, DimensionMismatch
from hyperlace.polycore import (MultiPoly, block_product, directional_derivative, elementary_symmetric,
                                evaluate, restrict_to_line, shift, symmetric_determinant)
from hyperlace.unipoly import UniPoly

x1, x2, x3 = (MultiPoly.variable(3, i) for i in range(3))
X1, X2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def vec(n):
    return st.lists(rationals, min_size=n, max_size=n).map(tuple)


@st.composite
def small_polys(draw, n=3, max_deg=3):
    terms = {}
    for _ in range(draw(st.integers(0, 5))):
        exp = tuple(draw(st.integers(0, max_deg)) for _ in range(n))
        if sum(exp) <= max_deg:
            terms[exp] = draw(rationals)
    return MultiPoly(n, terms)


def test_evaluate_examples():
    assert evaluate(polycore.coordinate_product(4), polycore.ones(4)) == 1
    assert evaluate(polycore.lorentz(3), (1, 0, 0)) == 1
    assert evaluate(elementary_symmetric(4, 2), polycore.ones(4)) == 6


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        evaluate(x1 * x2, (1, 2))


def test_directional_derivative_examples():
    assert directional_derivative(X1 * X2, (1, 1)) == X1 + X2
    assert directional_derivative(X1 * X2, (1, 0)) == X2
    a, b = F(2, 3), F(-5, 7)
    twice = directional_derivative(directional_derivative(X1 * X2, (a, b)), (a, b))
    assert twice == MultiPoly.constant(2, 2 * a * b)


def test_restrict_to_line_examples():
    x = (F(3), F(-1, 2))
    f = restrict_to_line(X1 * X2, tuple(-c for c in x), (1, 1))
    assert f == UniPoly([-x[0], 1]) * UniPoly([-x[1], 1])
    assert restrict_to_line(X1 ** 2 - X2 ** 2, (0, 0), (1, 0)) == UniPoly([0, 0, 1])
    e2 = elementary_symmetric(4, 2)
    assert restrict_to_line(e2, (-1, -1, 0, 0), polycore.ones(4)).coeffs == (1, -6, 6)


def test_shift_examples():
    assert shift(X1 * X2, (0, 0)) == X1 * X2
    assert shift(X1 * X2, (1, 0)) == (X1 - 1) * X2


def test_block_product_examples():
    y = [MultiPoly.variable(4, i) for i in range(4)]
    assert block_product(MultiPoly.variable(1, 0), 2) == MultiPoly.variable(2, 0) * MultiPoly.variable(2, 1)
    assert block_product(X1 * X2, 2) == y[0] * y[1] * y[2] * y[3]


def test_elementary_symmetric_examples():
    assert elementary_symmetric(2, 1) == X1 + X2
    e2 = elementary_symmetric(4, 2)
    assert len(e2) == 6 and all(c == 1 for _, c in e2.items())
    assert elementary_symmetric(3, 0) == MultiPoly.constant(3, 1)
    with pytest.raises(ValueError):
        elementary_symmetric(2, 3)


def test_symmetric_determinant_examples():
    assert symmetric_determinant(1) == MultiPoly.variable(1, 0)
    # coordinates of a 2x2 symmetric matrix: (x11, x12, x22)
    a, b, c = (MultiPoly.variable(3, i) for i in range(3))
    assert symmetric_determinant(2) == a * c - b * b
    assert evaluate(symmetric_determinant(3), polycore.identity_flat(3)) == 1


def test_backend_mixing_rejected():
    with pytest.raises(BackendMismatch):
        MultiPoly.variable(2, 0) + MultiPoly.variable(2, 0, "float")


def test_caps_enforced_and_overridable():
    with pytest.raises(CapExceeded):
        MultiPoly.variable(30, 0)
    with polycore.limits(max_nvars=40):
        assert MultiPoly.variable(30, 0).nvars == 30
    with pytest.raises(CapExceeded):
        MultiPoly.variable(1, 0) ** 17


def test_json_round_trip_and_format():
    p = x1 * x2 * F(-3, 4) + x3 ** 2
    obj = p.to_json()
    assert set(obj) == {"nvars", "backend", "terms"}
    assert {"exp": [1, 1, 0], "coef": "-3/4"} in obj["terms"]
    assert MultiPoly.from_json(json.loads(json.dumps(obj))) == p


def test_zero_coefficients_dropped():
    p = x1 - x1
    assert p.is_zero() and len(p) == 0


@given(small_polys(), small_polys(), vec(3), vec(3))
@settings(max_examples=60, deadline=None)
def test_derivative_linear_and_leibniz(p, q, u, v):
    s = tuple(a + b for a, b in zip(u, v))
    assert directional_derivative(p, s) == directional_derivative(p, u) + directional_derivative(p, v)
    assert directional_derivative(p * q, u) == (directional_derivative(p, u) * q
                                                 + p * directional_derivative(q, u))


@given(small_polys(), vec(3), vec(3), rationals)
@settings(max_examples=60, deadline=None)
def test_restriction_matches_evaluation(p, x, v, s):
    f = restrict_to_line(p, x, v)
    assert f(s) == evaluate(p, tuple(a + s * b for a, b in zip(x, v)))


@given(small_polys(), vec(3), vec(3), vec(3))
@settings(max_examples=40, deadline=None)
def test_shift_then_restrict_moves_base(p, v, x, d):
    lhs = restrict_to_line(shift(p, v), x, d)
    rhs = restrict_to_line(p, tuple(a - b for a, b in zip(x, v)), d)
    assert lhs == rhs


@given(small_polys(), vec(3), rationals)
@settings(max_examples=40, deadline=None)
def test_shift_taylor_truncation(p, v, y):
    # shift(p, y v) = sum_k (-y)^k D_v^k p / k!
    total = MultiPoly(3)
    term = p
    fact = 1
    for k in range(p.degree + 1):
        total = total + term * ((-y) ** k / fact)
        term = directional_derivative(term, v)
        fact *= k + 1
    assert shift(p, tuple(y * c for c in v)) == total


@given(small_polys(n=2), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_block_product_value_at_ones(h, k):
    g = block_product(h, k)
    assert evaluate(g, polycore.ones(2 * k)) == evaluate(h, polycore.ones(2)) ** k


@given(vec(2), vec(2))
@settings(max_examples=30, deadline=None)
def test_block_product_restriction_factors(x, y):
    h = X1 * X2 + X1 ** 2
    g = block_product(h, 2)
    e = polycore.ones(2)
    lhs = restrict_to_line(g, tuple(-c for c in x + y), e + e)
    rhs = restrict_to_line(h, tuple(-c for c in x), e) * restrict_to_line(h, tuple(-c for c in y), e)
    assert lhs == rhs
