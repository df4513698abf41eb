import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlace import hyperb, polycore
from hyperlace.errors import BoundaryUndecided, NotHyperbolic, PreconditionError
from hyperlace.hyperb import (HyperbolicContext, builtin_context, certify_hyperbolic, cone_membership,
                              rank, seminorm, spectrum, trace)
from hyperlace.polycore import MultiPoly

PRODUCT = builtin_context("product", 3)
LORENTZ = builtin_context("lorentz", 3)
E2 = builtin_context("elementary", 4, 2)
DET2 = builtin_context("determinant", d=2)
CONTEXTS = [PRODUCT, LORENTZ, E2, DET2, builtin_context("determinant", d=3)]

lattice = st.integers(-6, 6).map(F)


def point(ctx):
    return st.lists(lattice, min_size=ctx.nvars, max_size=ctx.nvars).map(tuple)


def test_structural_certification():
    assert PRODUCT.certification == {"strategy": "structural", "family": "monomial"}
    ctx = certify_hyperbolic(polycore.lorentz(3), (1, 0, 0), "structural")
    assert ctx.certification["family"] == "lorentz"
    assert E2.certification["family"] == "elementary_symmetric"
    assert DET2.certification["family"] == "symmetric_determinant"


def test_sampled_counterexample_has_witness():
    x1, x2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
    with pytest.raises(NotHyperbolic) as info:
        certify_hyperbolic(x1 * x1 + x2 * x2, (1, 0), "sampled", seed=3)
    assert "witness" in info.value.details and info.value.details["seed"] == 3


def test_certification_preconditions():
    x1, x2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
    with pytest.raises(PreconditionError):
        certify_hyperbolic(x1 * x2 + x1, (1, 1))
    with pytest.raises(PreconditionError):
        certify_hyperbolic(x1 * x2, (1, 0))


def test_sampled_records_evidence():
    ctx = certify_hyperbolic(polycore.coordinate_product(3), polycore.ones(3), "sampled", samples=25, seed=9)
    assert ctx.certification == {"strategy": "sampled", "samples": 25, "seed": 9, "box": hyperb.DEFAULT_BOX}


def test_spectrum_examples():
    assert spectrum(PRODUCT, (3, 1, 2)).eigenvalues == (3, 2, 1)
    assert spectrum(LORENTZ, (1, 1, 0)).eigenvalues == (2, 0)
    for ctx in CONTEXTS:
        assert all(x == 1 for x in spectrum(ctx, ctx.e).eigenvalues)


def test_trace_examples():
    for n, d in [(4, 2), (6, 3), (5, 1)]:
        ctx = builtin_context("elementary", n, d)
        assert trace(ctx, polycore.unit(n, 0)) == F(d, n)
        assert trace(ctx, ctx.e) == d


def test_rank_examples():
    assert rank(PRODUCT, polycore.unit(3, 0)) == 1
    assert rank(LORENTZ, (1, 1, 0)) == 1
    for ctx in CONTEXTS:
        assert rank(ctx, ctx.e) == ctx.degree


def test_seminorm_examples():
    assert seminorm(PRODUCT, (3, 1, 2)) == 3
    neg = tuple(-c for c in E2.e)
    assert seminorm(E2, E2.e) == 1 and seminorm(E2, neg) == 1


def test_lineality_space():
    ctx = builtin_context("elementary", 3, 1)
    assert hyperb.in_lineality_space(ctx, (1, -1, 0))
    assert seminorm(ctx, (1, -1, 0)) == 0
    assert not hyperb.in_lineality_space(PRODUCT, (1, -1, 0))


def test_cone_membership_examples():
    assert cone_membership(PRODUCT, (1, 2, 3), "open")
    assert cone_membership(LORENTZ, (1, 1, 0), "closed")
    assert not cone_membership(LORENTZ, (1, 1, 0), "open")
    assert cone_membership(E2, E2.e, "open")


def test_float_boundary_undecided():
    ctx = builtin_context("lorentz", 3, backend="float")
    with pytest.raises(BoundaryUndecided):
        cone_membership(ctx, (1.0, 1.0, 0.0), "open")
    assert cone_membership(ctx, (2.0, 1.0, 0.0), "open")


@pytest.mark.parametrize("ctx", CONTEXTS + [hyperb.block_context(PRODUCT, 2)])
def test_context_json_round_trip(ctx):
    again = HyperbolicContext.from_json(json.loads(json.dumps(ctx.to_json())))
    assert again.h == ctx.h and again.e == ctx.e and again.certification == ctx.certification


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_spectral_consistency(ctx):
    rng = random.Random(11)
    for _ in range(10):
        x = tuple(F(rng.randint(-5, 5)) for _ in range(ctx.nvars))
        s = spectrum(ctx, x)
        if s.exact:
            assert sum(s.eigenvalues) == trace(ctx, x)
        else:
            assert abs(sum(float(v) for v in s.eigenvalues) - float(trace(ctx, x))) < 1e-9
        assert float(seminorm(ctx, x)) == pytest.approx(max(float(s.max), -float(s.min)), abs=1e-11)
        assert list(s.eigenvalues) == sorted(s.eigenvalues, reverse=True)


@given(st.data(), st.sampled_from(CONTEXTS), st.integers(-3, 3).map(F), st.integers(-3, 3).map(F))
@settings(max_examples=40, deadline=None)
def test_eigenvalue_homogeneity(data, ctx, s, t):
    x = data.draw(point(ctx))
    base = spectrum(ctx, x)
    moved = spectrum(ctx, tuple(s * a + t * b for a, b in zip(x, ctx.e)))
    if not (base.exact and moved.exact):
        return
    expected = [s * v + t for v in base.eigenvalues]
    assert list(moved.eigenvalues) == sorted(expected, reverse=True)


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_extreme_eigenvalue_convexity(ctx):
    rng = random.Random(21)
    for _ in range(200 // len(CONTEXTS)):
        x, y = hyperb.random_cone_point(ctx, rng), hyperb.random_cone_point(ctx, rng)
        mid = tuple((a + b) / 2 for a, b in zip(x, y))
        assert float(hyperb.lambda_min(ctx, mid)) >= (float(hyperb.lambda_min(ctx, x))
                                                       + float(hyperb.lambda_min(ctx, y))) / 2 - 1e-9
        assert float(hyperb.lambda_max(ctx, mid)) <= (float(hyperb.lambda_max(ctx, x))
                                                       + float(hyperb.lambda_max(ctx, y))) / 2 + 1e-9


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_cone_convexity(ctx):
    rng = random.Random(5)
    for _ in range(20):
        x, y = hyperb.random_cone_point(ctx, rng), hyperb.random_cone_point(ctx, rng)
        p = F(rng.randint(0, 10), 10)
        assert cone_membership(ctx, tuple(p * a + (1 - p) * b for a, b in zip(x, y)), "open")
