"""The acceptance suite: ten end-to-end checks shared by ``selftest`` and the test suite."""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from . import hyperb, polycore, rayleigh, sharpness
from .mixedchar import (delta_bound, gv_poly, derivative_pair_gap, mixed_operator_poly,
                        substitution_poly, tkd_apply, xi)
from .partition import (brute_force_expectation, exhaustive_partition, expected_charpoly, gen_instance,
                        greedy_partition)
from .surd import QuadSurd, compare_largest_root_to
from .unipoly import UniPoly, compare_largest_roots, is_real_rooted, largest_root_bracket


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f} s)"

    def to_json(self):
        return {"number": self.number, "title": self.title, "passed": self.passed, "detail": self.detail}


def _timed(number, title, limit=None):
    def wrap(fn):
        def run():
            start = time.perf_counter()
            passed, detail = fn()
            seconds = time.perf_counter() - start
            if limit is not None and seconds >= limit:
                passed = False
                detail += f"; runtime {seconds:.1f} s over the {limit} s limit"
            return CriterionResult(number, title, passed, detail, seconds)
        run.number = number
        run.title = title
        return run
    return wrap


# -- 1 -------------------------------------------------------------------------------

@_timed(1, "Jacobi identity on the small grid", limit=10)
def jacobi_grid():
    grid = sharpness.identity_grid(6, 6, 3)
    bad = [g for g in grid if not sharpness.jacobi_identity_check(*g)["equal"]]
    if bad:
        return False, f"{len(bad)} of {len(grid)} triples differ, first (m,k,d)={bad[0]}"
    return True, f"{len(grid)} feasible (m,k,d) triples equal exactly"


# -- 2 -------------------------------------------------------------------------------

@_timed(2, "block restriction zero for m=k=d=2")
def block_value():
    ctx = hyperb.builtin_context("elementary", 4, 2)
    f = ctx.charpoly(polycore.fraction_vector([1, 1, 0, 0]))
    expected = QuadSurd(Fraction(1, 2), Fraction(1, 6), 3)
    br = largest_root_bracket(f, Fraction(1, 10**14))
    close = abs(float(br.value) - float(expected)) < 1e-12
    exact = compare_largest_root_to(f, expected) == 0
    bound = delta_bound(Fraction(1), 4) / 2
    below = compare_largest_root_to(f, bound) < 0
    ok = close and exact and below
    return ok, (f"largest zero {float(br.value):.15f} vs (3+sqrt3)/6 (exact match {exact}); "
                f"below delta(1,4)/2 = {bound} is {below}")


# -- 3 and 4 ---------------------------------------------------------------------------

def _desk_grid():
    return [(n, d, k) for d in range(1, 5) for n in range(d, 13) for k in (2, 3)]


def _greedy_sound(inst, cert):
    """Exact monotonicity of the chosen conditional expectations and their real-rootedness."""
    prev = None
    for r in range(inst.m + 1):
        f = expected_charpoly(inst, cert.assignment[:r])
        if not is_real_rooted(f):
            return False
        if prev is not None and compare_largest_roots(f, prev) > 0:
            return False
        prev = f
    return True


_DESK_CACHE = {}


def _desk_runs():
    if "runs" not in _DESK_CACHE:
        runs = []
        for n, d, k in _desk_grid():
            inst = gen_instance("standard_basis", k=k, n=n, d=d)
            greedy = greedy_partition(inst)
            exhaustive = exhaustive_partition(inst) if k ** n <= 10**6 else None
            runs.append((inst, greedy, exhaustive))
        _DESK_CACHE["runs"] = runs
    return _DESK_CACHE["runs"]


@_timed(3, "partition bound at desk scale", limit=300)
def desk_partitions():
    runs = _desk_runs()
    failed = [(i.m, i.ctx.degree, i.k) for i, g, _ in runs if not g.passed]
    unconfirmed = [(i.m, i.ctx.degree, i.k) for i, _, x in runs if x is not None and not x.passed]
    worse = sum(1 for _, g, x in runs if x is not None and float(g.max_seminorm) > float(x.max_seminorm) + 1e-12)
    checked = sum(1 for *_, x in runs if x is not None)
    ok = not failed and not unconfirmed
    detail = (f"{len(runs)} greedy certificates within delta(k eps, m)/k, {len(failed)} failures; "
              f"{checked} exhaustive confirmations, {len(unconfirmed)} failures; "
              f"greedy above optimum on {worse}")
    return ok, detail


@_timed(4, "greedy engine soundness")
def greedy_soundness():
    runs = _desk_runs()
    unsound = [(i.m, i.ctx.degree, i.k) for i, g, _ in runs if not _greedy_sound(i, g)]
    mismatched = []
    cases = [gen_instance("standard_basis", k=2, n=n, d=d) for n in range(1, 5) for d in range(1, n + 1)]
    cases.append(gen_instance("direct_sum", k=2, instances=[gen_instance("standard_basis", n=2, d=1),
                                                            gen_instance("standard_basis", n=2, d=2)]))
    for inst in cases:
        if expected_charpoly(inst) != brute_force_expectation(inst):
            mismatched.append((inst.m, inst.ctx.degree))
    ok = not unsound and not mismatched
    return ok, (f"{len(runs) - len(unsound)}/{len(runs)} traces monotone and real-rooted; "
                f"{len(cases) - len(mismatched)}/{len(cases)} empty-assignment expectations equal brute force")


# -- 5 -------------------------------------------------------------------------------

def _rank_one_vectors(family, ctx, rng):
    """Positive multiples of coordinate vectors, or ``z z^T`` for determinants."""
    count = rng.randint(1, 3)
    if not family.startswith("determinant"):
        n = ctx.nvars
        return [tuple(Fraction(rng.randint(1, 5), rng.randint(1, 3)) * c for c in polycore.unit(n, rng.randrange(n)))
                for _ in range(count)]
    d = polycore.sym_dim_to_size(ctx.nvars)
    out = []
    for _ in range(count):
        z = [Fraction(rng.randint(-3, 3)) for _ in range(d)]
        out.append(polycore.flatten_symmetric([[a * b for b in z] for a in z]))
    return out


def rank_one_contexts():
    return {
        "product": hyperb.builtin_context("product", 3),
        "elementary": hyperb.builtin_context("elementary", 4, 2),
        "determinant2": hyperb.builtin_context("determinant", d=2),
        "determinant3": hyperb.builtin_context("determinant", d=3),
    }


@_timed(5, "rank-one operator and substitution agree")
def rank_one_identity(cases=50, seed=5):
    ctxs = rank_one_contexts()
    names = sorted(ctxs)
    rng = random.Random(seed)
    bad = []
    for case in range(cases):
        name = names[case % len(names)]
        ctx = ctxs[name]
        vs = _rank_one_vectors(name, ctx, rng)
        mixed = mixed_operator_poly(ctx, vs)
        if not all(mixed.rank_one) or mixed.poly != substitution_poly(ctx, vs):
            bad.append((case, name))
    return not bad, f"{cases - len(bad)}/{cases} seeded cases agree exactly" + (f", first failure {bad[0]}" if bad else "")


# -- 6 -------------------------------------------------------------------------------

def builtin_contexts():
    return {
        "product": hyperb.builtin_context("product", 3),
        "elementary": hyperb.builtin_context("elementary", 4, 2),
        "determinant": hyperb.builtin_context("determinant", d=2),
        "lorentz": hyperb.builtin_context("lorentz", 3),
    }


def _midpoint(x, y):
    return tuple((a + b) / 2 for a, b in zip(x, y))


def shifted_membership_check(ctx, rng):
    """One seeded instance of the shifted-membership implication; ``None`` if the premise fails."""
    m = 2
    vs = [hyperb.random_cone_point(ctx, rng) for _ in range(m)]
    mixed = mixed_operator_poly(ctx, vs)
    x = hyperb.random_cone_point(ctx, rng)
    scale = 1 + max(1 / float(xi(ctx.h, v, x)) for v in vs) * rng.randint(2, 4)
    x = tuple(c * Fraction(scale).limit_denominator(8) for c in x)
    ts = []
    for v in vs:
        top = xi(ctx.h, v, x)
        if top <= 1:
            return None
        ts.append(1 + (top - 1) * Fraction(rng.randint(1, 8), 8))
    i, j = 0, 1
    zero = (Fraction(0),) * m

    def point(base, ys):
        return tuple(base) + tuple(ys)

    for kk in (i, j):
        ys = list(zero)
        ys[kk] = ts[kk]
        if not mixed.in_cone(point(x, ys), "closed"):
            return None
    shifted = tuple(a + ts[j] / (ts[j] - 1) * b for a, b in zip(x, vs[j]))
    ys = list(zero)
    ys[j] = Fraction(1)
    ys[i] = ts[i]
    return mixed.in_cone(point(shifted, ys), "closed")


@_timed(6, "bound machinery properties")
def bound_properties(samples=200, configs=100, seed=6):
    pair_bad, concave_bad = [], []
    for name, ctx in sorted(builtin_contexts().items()):
        rng = random.Random(seed)
        for s in range(samples):
            u, v, w = (hyperb.random_cone_point(ctx, rng) for _ in range(3))
            if derivative_pair_gap(ctx, u, v, w) < 0:
                pair_bad.append((name, s))
            x, y = hyperb.random_cone_point(ctx, rng), hyperb.random_cone_point(ctx, rng)
            if xi(ctx.h, v, _midpoint(x, y)) < (xi(ctx.h, v, x) + xi(ctx.h, v, y)) / 2:
                concave_bad.append((name, s))
    rng = random.Random(seed)
    ctxs = [c for _, c in sorted(builtin_contexts().items())]
    verdicts = []
    while len(verdicts) < configs:
        v = shifted_membership_check(ctxs[len(verdicts) % len(ctxs)], rng)
        if v is not None:
            verdicts.append(v)
    shift_bad = verdicts.count(False)
    ok = not pair_bad and not concave_bad and not shift_bad
    total = samples * len(ctxs)
    return ok, (f"pair inequality {total - len(pair_bad)}/{total}, midpoint concavity "
                f"{total - len(concave_bad)}/{total}, shifted membership {configs - shift_bad}/{configs}")


# -- 7 -------------------------------------------------------------------------------

def random_low_rooted(k, d, rng):
    roots = [Fraction(rng.randint(0, 60), 60 * k) for _ in range(d)]
    return UniPoly.from_roots(roots)


def _scaled_interior(ctx, k, rng):
    w = hyperb.random_cone_point(ctx, rng)
    top = math.ceil(float(hyperb.lambda_max(ctx, w))) + 1
    return tuple(c * Fraction(1, k * top) * Fraction(rng.randint(1, 4), 4) for c in w)


@_timed(7, "block-averaging operator preserves real roots")
def tkd_checks(cases=500, agree=50, seed=7):
    rng = random.Random(seed)
    bad = 0
    for _ in range(cases):
        k, d = rng.randint(1, 4), rng.randint(1, 8)
        if not is_real_rooted(tkd_apply(k, d, random_low_rooted(k, d, rng))):
            bad += 1
    ctxs = [c for _, c in sorted(builtin_contexts().items())]
    mismatch = 0
    for c in range(agree):
        ctx = ctxs[c % len(ctxs)]
        k = rng.randint(1, 3)
        v = _scaled_interior(ctx, k, rng)
        lhs = gv_poly(ctx, v, k)
        rhs = tkd_apply(k, ctx.degree, ctx.charpoly(v))
        if lhs != rhs:
            mismatch += 1
    ok = not bad and not mismatch
    return ok, f"{cases - bad}/{cases} images real-rooted; {agree - mismatch}/{agree} line-polynomial agreements"


# -- 8 -------------------------------------------------------------------------------

@_timed(8, "extreme-zero convergence", limit=120)
def sharpness_convergence():
    k, eps = 2, Fraction(1, 4)
    rows = {r.d: r for r in sharpness.convergence_table(k, eps, [20, 200])}
    limit = sharpness.limit_for(k, eps)
    e20, e200 = rows[20].error, rows[200].error
    lower, upper = sharpness.lower_bound(k, eps), sharpness.upper_bound(k, eps)
    params = rows[200].alpha == 200 and rows[200].beta == 200
    strict = lower < upper
    ok = e200 < e20 and e200 < 0.05 and strict and params and abs(float(limit) - 0.933013) < 1e-6
    return ok, (f"limit {float(limit):.6f}; error {e20:.4g} at d=20, {e200:.4g} at d=200; "
                f"lower {float(lower):.6f} < upper {float(upper):.6f} exactly: {strict}")


# -- 9 -------------------------------------------------------------------------------

@_timed(9, "matroid cross-oracle and packing")
def matroid_checks():
    disagree = []
    matroids = [(f"U({d},{n})", rayleigh.MatroidView.uniform(d, n)) for d in range(1, 4) for n in range(d, 13)]
    matroids.append(("M(K4)", rayleigh.MatroidView.graphic(rayleigh.complete_graph_edges(4))))
    for name, mat in matroids:
        for k in (2, 3):
            if rayleigh.edmonds_check(mat, k)["passed"] != (rayleigh.find_disjoint_bases(mat, k) is not None):
                disagree.append((name, k))
    measures = [
        rayleigh.DiscreteMeasure.uniform(24, itertools.combinations(range(24), 2)),
        rayleigh.DiscreteMeasure.uniform(4, itertools.combinations(range(4), 2)),
        rayleigh.DiscreteMeasure.uniform(6, rayleigh.MatroidView.graphic(rayleigh.complete_graph_edges(4)).bases),
    ]
    reports = []
    for mu in measures:
        ctx = rayleigh.certify_strong_rayleigh(mu, samples=20)
        reports.append(rayleigh.packing_certificate(mu, 2, ctx))
    big = reports[0]
    big_ok = big["theorem_applies"] and big["bases"] is not None and len(big["bases"]) == 2 \
        and big["max_marginal"] == "1/12"
    false_fire = [r for r in reports if r["status"] == "contradiction"]
    ok = not disagree and big_ok and not false_fire
    return ok, (f"{2 * len(matroids) - len(disagree)}/{2 * len(matroids)} Edmonds/backtracking agreements; "
                f"U(2,24) k=2 status {big['status']} with bases {big['bases']}; "
                f"{len(false_fire)} theorem firings without bases")


# -- 10 ------------------------------------------------------------------------------

@_timed(10, "determinant float smoke test", limit=60)
def determinant_smoke(seeds=20):
    worst = -math.inf
    bad = []
    for seed in range(seeds):
        inst = gen_instance("determinant_rank1", k=2, d=2, m=8, seed=seed)
        cert = greedy_partition(inst)
        gap = float(cert.max_seminorm) - float(cert.bound)
        worst = max(worst, gap)
        if gap > 1e-6:
            bad.append(seed)
    return not bad, f"{seeds - len(bad)}/{seeds} seeds within bound + 1e-6; largest excess {worst:.3g}"


CRITERIA = (jacobi_grid, block_value, desk_partitions, greedy_soundness, rank_one_identity,
            bound_properties, tkd_checks, sharpness_convergence, matroid_checks, determinant_smoke)


def run(only=None, echo=None):
    """Run the suite (or the numbered subset ``only``); ``echo`` receives each result line."""
    results = []
    for crit in CRITERIA:
        if only and crit.number not in only:
            continue
        res = crit()
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
