import itertools
import json
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from hyperlace import hyperb, partition, polycore
from hyperlace.errors import BudgetExceeded, InfeasibleParameters, MalformedPartition, PreconditionError
from hyperlace.partition import (PartitionCertificate, brute_force_expectation, exhaustive_partition,
                                 expected_charpoly, gen_instance, greedy_partition, make_instance,
                                 operator_expectation, verify_certificate)
from hyperlace.unipoly import compare_largest_roots, is_real_rooted, largest_root

TOP = (3 + math.sqrt(3)) / 6


@pytest.fixture(scope="module")
def basis42():
    return gen_instance("standard_basis", k=2, n=4, d=2)


def test_expected_charpoly_example(basis42):
    want = (6, -72, 180, -144, 36)
    assert expected_charpoly(basis42).coeffs == want
    assert brute_force_expectation(basis42).coeffs == want
    assert operator_expectation(basis42).coeffs == want


@pytest.mark.parametrize("partial", [[0], [0, 1], [0, 0], [0, 1, 1], [1, 0, 0, 1]])
def test_partial_expectations_agree(basis42, partial):
    f = expected_charpoly(basis42, partial)
    assert f == brute_force_expectation(basis42, partial)
    assert f == operator_expectation(basis42, partial)
    assert is_real_rooted(f)


def test_partial_as_dict(basis42):
    assert expected_charpoly(basis42, {0: 1, 1: 0}) == expected_charpoly(basis42, [1, 0])
    with pytest.raises(PreconditionError):
        expected_charpoly(basis42, {1: 0})
    with pytest.raises(MalformedPartition):
        expected_charpoly(basis42, [2])


def test_greedy_example(basis42):
    cert = greedy_partition(basis42)
    assert cert.assignment == (0, 1, 0, 1)
    assert abs(float(cert.max_seminorm) - TOP) < 1e-9
    assert cert.passed and cert.trivial_pass and cert.scale_bridge
    assert len(cert.greedy_trace) == 5
    assert all(a >= b for a, b in zip(cert.greedy_trace, cert.greedy_trace[1:]))


def test_exhaustive_example(basis42):
    cert = exhaustive_partition(basis42)
    assert cert.assignment == (0, 0, 1, 1)
    assert abs(float(cert.max_seminorm) - TOP) < 1e-9


def test_verify_flags_inconsistent_claims(basis42):
    report = verify_certificate(basis42, PartitionCertificate((0, 0, 0, 0), 2, "external"))
    assert report["passed"] and report["trivial_pass"] and not report["consistent"]
    assert report["max_seminorm"] == 1.0


def test_verify_rejects_malformed(basis42):
    with pytest.raises(MalformedPartition):
        verify_certificate(basis42, PartitionCertificate((0, 1, 0), 2, "external"))
    with pytest.raises(MalformedPartition):
        verify_certificate(basis42, PartitionCertificate((0, 1, 0, 2), 2, "external"))


def test_single_vector():
    ctx = hyperb.builtin_context("elementary", 2, 1)
    one = make_instance(ctx, [ctx.e], 3)
    cert = greedy_partition(one)
    assert one.m == 1 and cert.assignment == (0,)
    assert exhaustive_partition(one).assignment == (0,)


def test_product_instance_is_diagonal():
    ctx = hyperb.builtin_context("product", 3)
    inst = make_instance(ctx, [polycore.unit(3, i) for i in range(3)], 2)
    cert = greedy_partition(inst)
    assert cert.max_seminorm == 1 and cert.passed


def test_make_instance_preconditions():
    ctx = hyperb.builtin_context("elementary", 3, 2)
    with pytest.raises(PreconditionError):
        make_instance(ctx, [polycore.unit(3, 0), polycore.unit(3, 1)], 2)
    with pytest.raises(PreconditionError):
        make_instance(ctx, [ctx.e], 2)
    with pytest.raises(PreconditionError):
        make_instance(ctx, [polycore.unit(3, i) for i in range(3)], 2, eps=F(1, 2))
    with pytest.raises(InfeasibleParameters):
        make_instance(ctx, [polycore.unit(3, i) for i in range(3)], 0)
    with pytest.raises(InfeasibleParameters):
        gen_instance("standard_basis", n=2, d=3)


def test_float_determinant_instance():
    inst = gen_instance("determinant_rank1", k=2, d=2, m=4, seed=3)
    assert not inst.exact
    total = np.sum([np.array(u, dtype=float) for u in inst.us], axis=0)
    assert np.allclose(total, inst.ctx.e, atol=1e-9)
    cert = greedy_partition(inst)
    report = verify_certificate(inst, cert)
    assert report["consistent"] and not report["exact"]
    brute = brute_force_expectation(inst)
    assert np.allclose(expected_charpoly(inst).coeffs, brute.coeffs, atol=1e-8)


def test_direct_sum():
    a = gen_instance("standard_basis", k=2, n=2, d=1)
    b = gen_instance("standard_basis", k=2, n=3, d=2)
    inst = gen_instance("direct_sum", k=2, instances=[a, b])
    assert inst.ctx.nvars == 5 and inst.m == 5
    assert expected_charpoly(inst) == brute_force_expectation(inst)
    assert greedy_partition(inst).passed


def test_json_round_trip(basis42):
    again = partition.Instance.from_json(json.loads(json.dumps(basis42.to_json())))
    assert again.us == basis42.us and again.k == 2 and again.eps == basis42.eps
    cert = greedy_partition(basis42)
    obj = json.loads(json.dumps(cert.to_json()))
    assert obj["parts"] == [[0, 2], [1, 3]]
    assert PartitionCertificate.from_json(obj).assignment == cert.assignment


def test_budget_exceeded():
    inst = gen_instance("standard_basis", k=3, n=6, d=2)
    with pytest.raises(BudgetExceeded):
        exhaustive_partition(inst, budget=100)


@pytest.mark.parametrize("n,d,k", [(3, 1, 2), (4, 3, 2), (5, 2, 3), (6, 3, 2)])
def test_greedy_never_worse_than_optimum(n, d, k):
    inst = gen_instance("standard_basis", k=k, n=n, d=d)
    g, x = greedy_partition(inst), exhaustive_partition(inst)
    assert g.max_seminorm >= x.max_seminorm
    assert g.passed and x.passed


def test_exhaustive_is_optimal_by_brute_force():
    inst = gen_instance("standard_basis", k=2, n=5, d=3)
    best = exhaustive_partition(inst).max_seminorm
    values = []
    for a in itertools.product(range(2), repeat=5):
        sums = partition._part_sums(inst, a)
        values.append(max(largest_root(inst.ctx.charpoly(s)) if any(s) else 0 for s in sums))
    assert min(values) == best


def test_scale_bridge_on_random_assignments():
    inst = gen_instance("standard_basis", k=3, n=6, d=3)
    rng = random.Random(1)
    for _ in range(5):
        a = [rng.randrange(3) for _ in range(6)]
        final = partition.assignment_charpoly(inst, a)
        sums = partition._part_sums(inst, a)
        parts = [inst.ctx.charpoly(s) for s in sums]
        worst = parts[0]
        for f in parts[1:]:
            if compare_largest_roots(f, worst) > 0:
                worst = f
        assert compare_largest_roots(final, worst.compose_linear(F(1, 3), 0)) == 0
