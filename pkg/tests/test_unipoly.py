import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlace import unipoly
from hyperlace.errors import NotRealRooted, PreconditionError
from hyperlace.unipoly import (UniPoly, compare_largest_roots, interleaves, is_real_rooted, jacobi_poly,
                               jacobi_shifted, largest_root, largest_root_bracket,
                               mixture_realrooted_probe, real_root_count, real_roots)

T = UniPoly([0, 1])
roots_st = st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=7), min_size=1, max_size=6)


def test_root_counts():
    assert real_root_count(UniPoly([-1, 0, 1])) == 2
    assert real_root_count(UniPoly([1, 0, 1])) == 0
    assert real_root_count(UniPoly([1, -6, 6])) == 2


def test_root_count_on_interval_is_half_open():
    f = UniPoly.from_roots([0, 1, 1, 2])
    assert real_root_count(f, 0, 1) == 2
    assert real_root_count(f, 1, 2) == 1


def test_root_count_errors():
    with pytest.raises(PreconditionError):
        real_root_count(UniPoly([0]))
    with pytest.raises(TypeError):
        real_root_count(UniPoly([1.0, 0.0, -1.0], "float"))


def test_largest_root_examples():
    assert largest_root(UniPoly([-1, 0, 1])) == 1
    value = largest_root(UniPoly([1, -6, 6]))
    assert abs(float(value) - (3 + math.sqrt(3)) / 6) < 1e-12
    for d in range(1, 6):
        assert largest_root((T - d) * T ** (d - 1)) == d


def test_largest_root_rejects():
    with pytest.raises(NotRealRooted):
        largest_root(UniPoly([1, 0, 1]))
    with pytest.raises(PreconditionError):
        largest_root(UniPoly([3]))


def test_real_roots_multiplicities():
    brackets = real_roots(UniPoly.from_roots([F(1, 2), F(1, 2), 3]))
    assert [(b.value, b.multiplicity) for b in brackets] == [(F(1, 2), 2), (3, 1)]


def test_interleaves_examples():
    assert interleaves(T, T * T - 1)
    assert not interleaves(T - 2, T * T - 1)


def test_probe_examples():
    assert mixture_realrooted_probe([T * T - 1, T * T - 4]).ok
    bad = mixture_realrooted_probe([(T - 1) * (T - 2), (T + 1) * (T + 2)])
    assert not bad.ok and not is_real_rooted(bad.mixture)
    assert mixture_realrooted_probe([T * T - 1]).ok


def test_jacobi_examples():
    assert jacobi_poly(0, F(3), F(5, 2)) == UniPoly([1])
    assert jacobi_poly(2, 0, 0) == UniPoly([F(-1, 2), 0, F(3, 2)])
    assert jacobi_shifted(2, 0, 0) == UniPoly([1, -6, 6])


@pytest.mark.parametrize("d,a,b", [(3, 1, 2), (4, F(1, 2), 0), (5, 0, 3), (2, -3, 1)])
def test_jacobi_value_at_one(d, a, b):
    # P_d^(a,b)(1) = C(d + a, d)
    expected = F(1)
    for i in range(1, d + 1):
        expected *= F(a + i, i)
    assert jacobi_poly(d, a, b)(1) == expected


def test_jacobi_recurrence_matches_series():
    for d in range(1, 7):
        for a in (0, 1, F(3, 2)):
            for b in (0, 2):
                assert unipoly._jacobi_recurrence(d, F(a), F(b)) == unipoly._jacobi_series(d, F(a), F(b))


def test_jacobi_largest_zero_matches_sturm():
    br = unipoly.jacobi_largest_zero_shifted(6, 3, 3)
    assert abs(float(br.value) - float(largest_root(jacobi_shifted(6, 3, 3)))) < 1e-11


def test_json_round_trip():
    f = UniPoly([F(1, 3), 0, -2])
    obj = json.loads(json.dumps(f.to_json()))
    assert obj == {"backend": "rational", "coeffs": ["1/3", "0", "-2"]}
    assert UniPoly.from_json(obj) == f


@given(roots_st)
@settings(max_examples=100, deadline=None)
def test_sturm_agrees_with_numeric_roots(roots):
    f = UniPoly.from_roots(roots)
    assert is_real_rooted(f)
    assert real_root_count(f) == len(roots)
    # companion-matrix roots are only trustworthy for simple roots
    f = UniPoly.from_roots(sorted(set(roots)))
    numeric = np.sort(np.roots([float(c) for c in f.coeffs[::-1]]).real)
    assert abs(numeric[-1] - float(max(roots))) < 1e-8


@given(roots_st, st.fractions(min_value=-3, max_value=3, max_denominator=5))
@settings(max_examples=60, deadline=None)
def test_largest_root_shift(roots, c):
    f = UniPoly.from_roots(roots)
    g = f.compose_linear(1, -c)  # f(t - c)
    assert largest_root_bracket(g).value - c == pytest.approx(float(largest_root_bracket(f).value), abs=1e-11)
    assert compare_largest_roots(g, f) == (c > 0) - (c < 0)


@given(roots_st)
@settings(max_examples=50, deadline=None)
def test_derivative_interleaves(roots):
    f = UniPoly.from_roots(roots)
    if f.degree >= 2:
        assert interleaves(f.derivative(), f)


@given(roots_st.filter(lambda r: len(r) >= 2), st.fractions(min_value=-5, max_value=5, max_denominator=4))
@settings(max_examples=30, deadline=None)
def test_interleaving_pairs_have_real_mixtures(roots, c):
    g = UniPoly.from_roots(roots)
    f = g.derivative()
    assert interleaves(f, g)
    # f interleaves every g + c*f, so it is a common interleaver of the pair
    assert mixture_realrooted_probe([g, g + f * c], trials=20).ok
