import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlace import hyperb, polycore
from hyperlace.errors import InfeasibleParameters, PreconditionError
from hyperlace.mixedchar import (candidate_vectors, central_explore, delta_bound, delta_infimum_gap, gv_poly,
                                 mainbound_check, mixed_char_poly, mixed_operator_poly, substitution_poly,
                                 tkd_apply, xi)
from hyperlace.polycore import MultiPoly, directional_derivative, evaluate
from hyperlace.surd import QuadSurd
from hyperlace.unipoly import UniPoly, is_real_rooted, largest_root

PAIR = hyperb.builtin_context("product", 2)
x1, x2, y1, y2 = (MultiPoly.variable(4, i) for i in range(4))
CONTEXTS = [hyperb.builtin_context("product", 3), hyperb.builtin_context("elementary", 4, 2),
            hyperb.builtin_context("determinant", d=2), hyperb.builtin_context("lorentz", 3)]


def test_operator_poly_examples():
    one = mixed_operator_poly(PAIR, [(1, 0)])
    assert one.poly == MultiPoly.variable(3, 0) * MultiPoly.variable(3, 1) \
        - MultiPoly.variable(3, 2) * MultiPoly.variable(3, 1)
    two = mixed_operator_poly(PAIR, [(1, 0), (0, 1)])
    assert two.poly == x1 * x2 - y1 * x2 - y2 * x1 + y1 * y2
    assert two.rank_one == (True, True)


def test_operator_poly_rejects_vectors_outside_cone():
    with pytest.raises(PreconditionError):
        mixed_operator_poly(PAIR, [(1, -1)])


def test_mixed_char_poly_examples():
    t = UniPoly([0, 1])
    for ctx in CONTEXTS:
        d = ctx.degree
        chi = mixed_char_poly(ctx, [ctx.e])
        assert chi == (t ** d - t ** (d - 1) * d) * ctx.h_at_e
        assert largest_root(chi) == d
        zero = tuple(c * 0 for c in ctx.e)
        assert mixed_char_poly(ctx, [zero]) == t ** d * ctx.h_at_e
    for d in (2, 3):
        ctx = hyperb.builtin_context("product", d)
        chi = mixed_char_poly(ctx, [polycore.unit(d, i) for i in range(d)])
        assert chi == (t - 1) ** d


def test_delta_examples():
    assert delta_bound(F(7, 3), 1) == F(7, 3)
    assert delta_bound(F(1), 2) == QuadSurd(1, F(1, 2), 3)
    assert abs(float(delta_bound(F(1), 2)) - 1.866025) < 1e-6
    assert abs(float(delta_bound(F(1), 10**6)) - 4) < 1e-5
    with pytest.raises(PreconditionError):
        delta_bound(F(1, 10), 2)


@pytest.mark.parametrize("eps,m", [(F(1, 2), 4), (F(1), 3), (F(1, 5), 10)])
def test_delta_is_infimum_of_ratio(eps, m):
    gap = delta_infimum_gap(eps, m)
    assert -1e-9 <= gap < 1e-4


def test_mainbound_examples():
    for d in (2, 3):
        ctx = hyperb.builtin_context("product", d)
        report = mainbound_check(ctx, [polycore.unit(d, i) for i in range(d)], 1)
        assert report["passed"] and report["largest_root"] == ["1", "1"]
    ctx = hyperb.builtin_context("product", 3)
    boundary = mainbound_check(ctx, [ctx.e], 3)
    assert boundary["passed"] and boundary["margin"] == 0
    with pytest.raises(PreconditionError):
        mainbound_check(ctx, [polycore.unit(3, i) for i in range(3)], F(1, 2))
    with pytest.raises(PreconditionError):
        mainbound_check(ctx, [polycore.unit(3, 0)], 3)


def test_xi_examples():
    assert xi(PAIR, 0, (1, 1)) == 1
    ctx = CONTEXTS[1]
    rng = random.Random(2)
    for _ in range(20):
        z = hyperb.random_cone_point(ctx, rng)
        j, i = rng.sample(range(4), 2)
        assert xi(ctx, j, tuple(2 * c for c in z)) == 2 * xi(ctx, j, z)
        # differentiating h in another coordinate direction can only raise xi
        assert xi(ctx.h.partial(i), j, z) >= xi(ctx, j, z)


def test_tkd_examples():
    a, b = F(1, 5), F(3, 10)
    v = (a, b)
    assert gv_poly(PAIR, v, 1) == tkd_apply(1, 2, PAIR.charpoly(v))
    assert gv_poly(PAIR, v, 1) == UniPoly([F(19, 50), -2, 1])
    f = UniPoly([-F(1, 4), 1]) ** 3
    assert is_real_rooted(tkd_apply(2, 3, f))


@given(st.lists(st.fractions(max_denominator=9, min_value=-5, max_value=5), min_size=4, max_size=4),
       st.lists(st.fractions(max_denominator=9, min_value=-5, max_value=5), min_size=4, max_size=4),
       st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_tkd_linear(p, q, k):
    f, g = UniPoly(p), UniPoly(q)
    assert tkd_apply(k, 3, f + g) == tkd_apply(k, 3, f) + tkd_apply(k, 3, g)


@pytest.mark.parametrize("ctx", CONTEXTS)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_gv_matches_mixed_char_and_operator(ctx, k):
    v = tuple(c / (k + 2) for c in ctx.e)
    rest = tuple(a - k * b for a, b in zip(ctx.e, v))
    g = gv_poly(ctx, v, k)
    assert g == mixed_char_poly(ctx, [v] * k + [rest])
    assert g == tkd_apply(k, ctx.degree, ctx.charpoly(v))


def test_gv_reproduces_candidate():
    ctx = CONTEXTS[1]
    eps = F(3, 4)
    k = math.floor(ctx.degree / eps)
    v = tuple(c * eps / ctx.degree for c in ctx.e)
    assert gv_poly(ctx, v, k) == mixed_char_poly(ctx, candidate_vectors(ctx, eps, 5))


def test_gv_preconditions():
    with pytest.raises(PreconditionError):
        gv_poly(PAIR, (F(1, 2), F(1, 2)), 2)


def test_central_explore_single_vector():
    report = central_explore(PAIR, 2, 1, budget=10)
    assert report["best_largest_root"] == 2.0 and report["heuristic"]


def test_central_explore_stays_under_ceilings():
    report = central_explore(CONTEXTS[1], F(3, 4), 4, budget=40, seed=1)
    assert not report["exceeds_delta"]
    assert not report["exceeds_candidate"]
    assert report["best_largest_root"] <= float(delta_bound(F(3, 4), 4))


def test_central_explore_infeasible():
    with pytest.raises(InfeasibleParameters):
        central_explore(PAIR, F(1, 2), 2)


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_multi_affinity(ctx):
    rng = random.Random(4)
    for _ in range(5):
        u, v, w = (hyperb.random_cone_point(ctx, rng) for _ in range(3))
        p = F(rng.randint(0, 8), 8)
        mix = tuple((1 - p) * a + p * b for a, b in zip(v, w))
        lhs = mixed_operator_poly(ctx, [u, mix]).poly
        rhs = mixed_operator_poly(ctx, [u, v]).poly * (1 - p) + mixed_operator_poly(ctx, [u, w]).poly * p
        assert lhs == rhs


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_mixed_char_real_rooted_on_cone_inputs(ctx):
    rng = random.Random(8)
    for _ in range(10):
        vs = [hyperb.random_cone_point(ctx, rng) for _ in range(rng.randint(1, 3))]
        assert is_real_rooted(mixed_char_poly(ctx, vs))


def test_rank_one_substitution_differs_for_higher_rank():
    ctx = CONTEXTS[1]
    mixed = mixed_operator_poly(ctx, [ctx.e])
    assert mixed.rank_one == (False,)
    assert mixed.poly != substitution_poly(ctx, [ctx.e])


def test_gamma_membership_matches_xi():
    # (x, t) lies in the closed cone of h - y D_v h exactly when t <= xi(x)
    ctx = CONTEXTS[0]
    v = (F(1), F(2), F(1))
    mixed = mixed_operator_poly(ctx, [v])
    x = (F(2), F(3), F(5))
    top = xi(ctx, v, x)
    assert mixed.in_cone(x + (top,), "closed")
    assert not mixed.in_cone(x + (top + F(1, 100),), "closed")
    assert evaluate(ctx.h, x) / evaluate(directional_derivative(ctx.h, v), x) == top
