"""Partitioning rank-one vectors so every part has a small largest eigenvalue.

The greedy partitioner walks the vectors in order and fixes each one to
the part that minimizes the largest root of the conditional expected
characteristic polynomial of the k-fold block product.

Conditional expectations are computed without enumerating completions.
For a partial assignment with assigned sums ``a^i`` and unassigned set
``U``, block ``i`` contributes the multi-affine expansion

    h(t e - k a^i - sum_{j in U} s_j u_j) = sum_{R subset U} c_i(R)(t) s^R

and the expectation equals the sum over pairwise disjoint ``R_1..R_k`` of
``prod_i c_i(R_i)``. That disjoint sum is evaluated with ranked zeta
transforms over bitmasks of ``U``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import hyperb, polycore
from ._scalar import FLOAT, RATIONAL, fmt_scalar, fmt_vector, to_scalar
from .errors import (BudgetExceeded, InfeasibleParameters, MalformedPartition, NotRealRooted,
                     PreconditionError)
from .mixedchar import delta_bound
from .surd import QuadSurd, compare_largest_root_to
from .unipoly import (UniPoly, compare_largest_roots, float_roots, is_real_rooted, squarefree_part,
                      largest_root_bracket)

SUM_TOL = 1e-9
FLOAT_COMPARE_TOL = 1e-9
EXHAUSTIVE_BUDGET = 10**6


# -- instances --------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """Vectors ``us`` of rank at most one summing to ``e``, to be split into ``k`` parts."""

    ctx: hyperb.HyperbolicContext
    us: tuple
    k: int
    eps: object
    exact: bool

    @property
    def m(self):
        return len(self.us)

    def with_k(self, k):
        return make_instance(self.ctx, self.us, k, self.eps)

    def to_json(self):
        return {"context": self.ctx.to_json(), "vectors": [fmt_vector(u) for u in self.us],
                "k": self.k, "eps": fmt_scalar(self.eps), "exact": self.exact}

    @classmethod
    def from_json(cls, obj):
        ctx = hyperb.HyperbolicContext.from_json(obj["context"])
        eps = obj.get("eps")
        return make_instance(ctx, obj["vectors"], obj.get("k", 2),
                             None if eps is None else to_scalar(eps, ctx.backend))


def make_instance(ctx, us, k, eps=None):
    """Validate and build an ``Instance``; ``eps`` defaults to the largest trace."""
    if k < 1:
        raise InfeasibleParameters("k must be positive", k=k)
    us = tuple(ctx.vector(u) for u in us)
    if not us:
        raise InfeasibleParameters("need at least one vector")
    exact = ctx.backend == RATIONAL
    total = tuple(sum(col) for col in zip(*us))
    if exact and total != tuple(ctx.e):
        raise PreconditionError("vectors must sum to e exactly")
    if not exact and max(abs(a - b) for a, b in zip(total, ctx.e)) > SUM_TOL:
        raise PreconditionError("vectors must sum to e within 1e-9")
    traces = []
    for i, u in enumerate(us):
        if hyperb.rank(ctx, u) > 1:
            raise PreconditionError("vector has rank above one", index=i)
        traces.append(hyperb.trace(ctx, u))
    top = max(traces)
    if eps is None:
        eps = top
    eps = to_scalar(eps, ctx.backend)
    if exact and top > eps or not exact and top > eps + SUM_TOL:
        raise PreconditionError("a trace exceeds eps", max_trace=fmt_scalar(top), eps=fmt_scalar(eps))
    return Instance(ctx, us, int(k), eps, exact)


def _standard_basis(n, d, k):
    ctx = hyperb.builtin_context("elementary", n, d)
    return make_instance(ctx, [polycore.unit(n, i) for i in range(n)], k)


def _determinant_rank1(d, m, seed, k, max_tries=100):
    h = polycore.symmetric_determinant(d, FLOAT)
    ctx = hyperb.certify_hyperbolic(h, polycore.identity_flat(d, FLOAT), "structural")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        w = rng.standard_normal((m, d))
        gram = w.T @ w
        if np.linalg.cond(gram) > 1e8:
            continue
        vals, vecs = np.linalg.eigh(gram)
        whiten = vecs @ np.diag(vals ** -0.5) @ vecs.T
        z = w @ whiten.T
        us = [polycore.flatten_symmetric(np.outer(zi, zi).tolist()) for zi in z]
        return make_instance(ctx, us, k)
    raise InfeasibleParameters("whitening stayed ill-conditioned", seed=int(seed), tries=max_tries)


def _direct_sum(instances, k):
    if len({inst.ctx.backend for inst in instances}) != 1:
        raise PreconditionError("direct sum needs a common backend")
    ctx = hyperb.direct_context([inst.ctx for inst in instances])
    us = []
    offset = 0
    for inst in instances:
        zero = to_scalar(0, ctx.backend)
        for u in inst.us:
            us.append((zero,) * offset + tuple(u) + (zero,) * (ctx.nvars - offset - len(u)))
        offset += inst.ctx.nvars
    return make_instance(ctx, us, k)


def gen_instance(kind, k=2, **params):
    """``standard_basis(n, d)``, ``determinant_rank1(d, m, seed)`` or ``direct_sum(instances)``."""
    if kind == "standard_basis":
        n, d = params["n"], params["d"]
        if not 1 <= d <= n:
            raise InfeasibleParameters("standard_basis needs 1 <= d <= n", n=n, d=d)
        return _standard_basis(n, d, k)
    if kind == "determinant_rank1":
        return _determinant_rank1(params["d"], params["m"], params.get("seed", 0), k)
    if kind == "direct_sum":
        return _direct_sum(params["instances"], k)
    raise ValueError(f"unknown instance kind {kind!r}")


# -- conditional expectations ------------------------------------------------------

def _normalize_partial(inst, partial):
    if partial is None:
        return ()
    if isinstance(partial, dict):
        keys = sorted(partial)
        if keys != list(range(len(keys))):
            raise PreconditionError("partial assignment must cover a prefix 0..r-1")
        partial = [partial[i] for i in keys]
    partial = tuple(int(p) for p in partial)
    if len(partial) > inst.m:
        raise MalformedPartition("partial assignment longer than the instance")
    if any(not 0 <= p < inst.k for p in partial):
        raise MalformedPartition("part index out of range", k=inst.k)
    return partial


def _part_sums(inst, assignment):
    zero = tuple(c * 0 for c in inst.ctx.e)
    sums = [list(zero) for _ in range(inst.k)]
    for j, p in enumerate(assignment):
        for i, c in enumerate(inst.us[j]):
            sums[p][i] += c
    return [tuple(s) for s in sums]


def _expand_block(terms, d, forms):
    """Truncated product expansion; ``forms[l] = (const, slope, ((bit, value), ...))``."""
    total = {}
    for exp, c in terms:
        poly = {0: [c]}
        for l, a in enumerate(exp):
            const, slope, svals = forms[l]
            for _ in range(a):
                new = {}
                for mask, cs in poly.items():
                    acc = new.get(mask)
                    if acc is None:
                        acc = new[mask] = [0] * (len(cs) + 1)
                    for i, x in enumerate(cs):
                        if x:
                            acc[i] += x * const
                            acc[i + 1] += x * slope
                    for bit, val in svals:
                        if not mask & bit:
                            key = mask | bit
                            acc2 = new.get(key)
                            if acc2 is None:
                                acc2 = new[key] = [0] * (len(cs) + 1)
                            for i, x in enumerate(cs):
                                acc2[i] += x * val
                poly = new
        for mask, cs in poly.items():
            acc = total.get(mask)
            if acc is None:
                acc = total[mask] = [0] * (d + 1)
            for i, x in enumerate(cs):
                acc[i] += x
    return {mask: cs for mask, cs in total.items() if any(cs)}


@functools.lru_cache(maxsize=4096)
def _block_terms(ctx, us, k, shift, free):
    """Expansion of ``h(t e - k*shift - sum_b s_b u_{free[b]})`` as ``({mask: coeffs}, scale)``.

    On rationals every input is scaled to integers (homogeneity of ``h``
    turns a common denominator ``D`` into the factor ``D**d``); the true
    coefficients are the returned ones divided by ``scale``.
    """
    n, d = ctx.nvars, ctx.degree
    cols = [[(1 << b, us[j][l]) for b, j in enumerate(free) if us[j][l] != 0] for l in range(n)]
    consts = [-k * x for x in shift]
    terms = list(ctx.h.terms.items())
    if ctx.backend == FLOAT:
        forms = [(consts[l], ctx.e[l], tuple((b, -v) for b, v in cols[l])) for l in range(n)]
        return _expand_block(terms, d, forms), 1
    den = 1
    for x in itertools.chain(ctx.e, consts, (v for col in cols for _, v in col)):
        den = math.lcm(den, x.denominator)
    hden = 1
    for _, c in terms:
        hden = math.lcm(hden, c.denominator)
    forms = [(int(consts[l] * den), int(ctx.e[l] * den), tuple((b, -int(v * den)) for b, v in cols[l]))
             for l in range(n)]
    ints = [(exp, int(c * hden)) for exp, c in terms]
    return _expand_block(ints, d, forms), hden * den ** d


def _ranked_zeta(terms, nbits, width, dtype):
    size = 1 << nbits
    top = max((m.bit_count() for m in terms), default=0)
    arr = np.zeros((top + 1, size, width), dtype=dtype)
    if dtype is object:
        arr.fill(0)
    for mask, cs in terms.items():
        arr[mask.bit_count(), mask, :len(cs)] = cs
    for b in range(nbits):
        view = arr.reshape(top + 1, size >> (b + 1), 2, 1 << b, width)
        view[:, :, 1] += view[:, :, 0]
    return arr


def _disjoint_product_sum(blocks, nbits, dtype):
    """Sum over pairwise disjoint ``R_1..R_k`` of ``prod_i block_i[R_i]`` (coefficient lists in t)."""
    width = max(len(cs) for b in blocks for cs in b.values())
    acc = _ranked_zeta(blocks[0], nbits, width, dtype)
    for terms in blocks[1:]:
        z = _ranked_zeta(terms, nbits, width, dtype)
        ranks = min(acc.shape[0] + z.shape[0] - 1, nbits + 1)
        new = np.zeros((ranks, 1 << nbits, acc.shape[2] + z.shape[2] - 1), dtype=dtype)
        if dtype is object:
            new.fill(0)
        for r1 in range(acc.shape[0]):
            for r2 in range(min(z.shape[0], ranks - r1)):
                for t1 in range(acc.shape[2]):
                    a = acc[r1, :, t1]
                    for t2 in range(z.shape[2]):
                        new[r1 + r2, :, t1 + t2] += a * z[r2, :, t2]
        acc = new
    size = 1 << nbits
    pop = np.array([m.bit_count() for m in range(size)])
    out = np.zeros(acc.shape[2], dtype=dtype)
    if dtype is object:
        out.fill(0)
    for r in range(acc.shape[0]):
        gap = r - pop
        ok = gap >= 0
        if not ok.any():
            continue
        weights = np.array([(-1) ** int(g) * math.comb(nbits - int(p), int(g)) if g >= 0 else 0
                            for g, p in zip(gap, pop)], dtype=dtype)
        out = out + (weights[:, None] * acc[r]).sum(axis=0)
    return list(out)


def expected_charpoly(inst, partial=None):
    """Average of ``prod_i h(t e - k * sum_{j in S_i} u_j)`` over all completions of ``partial``."""
    partial = _normalize_partial(inst, partial)
    sums = _part_sums(inst, partial)
    free = tuple(range(len(partial), inst.m))
    ctx = inst.ctx
    if inst.exact:
        blocks, scale = [], 1
        for s in sums:
            ints, den = _block_terms(ctx, inst.us, inst.k, s, free)
            blocks.append(ints)
            scale *= den
        coeffs = _disjoint_product_sum(blocks, len(free), object)
        return UniPoly([Fraction(int(c), scale) for c in coeffs], RATIONAL)
    blocks = [_block_terms(ctx, inst.us, inst.k, s, free)[0] for s in sums]
    coeffs = _disjoint_product_sum(blocks, len(free), float)
    return UniPoly([float(c) for c in coeffs], FLOAT)


def assignment_charpoly(inst, assignment):
    """``prod_i h(t e - k * a^i)`` for a complete assignment."""
    out = UniPoly([1], inst.ctx.backend)
    for s in _part_sums(inst, assignment):
        out = out * inst.ctx.charpoly(tuple(inst.k * c for c in s))
    return out


def brute_force_expectation(inst, partial=None):
    """Oracle: explicit average over all ``k**(m - r)`` completions."""
    partial = _normalize_partial(inst, partial)
    rest = inst.m - len(partial)
    total = UniPoly([0], inst.ctx.backend)
    for tail in itertools.product(range(inst.k), repeat=rest):
        total = total + assignment_charpoly(inst, partial + tail)
    n = inst.k ** rest
    return total * (Fraction(1, n) if inst.exact else 1.0 / n)


def operator_expectation(inst, partial=None):
    """Oracle: mixed characteristic polynomial of the block product with mean vectors."""
    from .mixedchar import mixed_char_poly

    partial = _normalize_partial(inst, partial)
    block = hyperb.block_context(inst.ctx, inst.k)
    n, k = inst.ctx.nvars, inst.k
    zero = to_scalar(0, inst.ctx.backend)
    vs = []
    for j, u in enumerate(inst.us):
        if j < len(partial):
            v = [zero] * (n * k)
            v[partial[j] * n:(partial[j] + 1) * n] = [k * c for c in u]
        else:
            v = list(u) * k
        vs.append(tuple(v))
    return mixed_char_poly(block, vs, check=False)


# -- root comparison helpers ---------------------------------------------------------

def _float_top_root(f):
    r = float_roots(f)
    top = r[np.argmax(r.real)]
    scale = max(1.0, float(np.max(np.abs(r))))
    if abs(top.imag) > 1e-6 * scale:
        raise NotRealRooted("largest root of float expectation is not real", imag=float(top.imag))
    return float(top.real)


def _root_value(f):
    if f.backend == FLOAT:
        return _float_top_root(f)
    return largest_root_bracket(f).value


def _check_real_rooted(f):
    if f.backend == RATIONAL and not is_real_rooted(f):
        raise NotRealRooted("conditional expectation is not real-rooted", poly=f.to_json())


# -- certificates --------------------------------------------------------------------

@dataclass
class PartitionCertificate:
    assignment: tuple
    k: int
    method: str
    spectra: list = field(default_factory=list)
    max_seminorm: object = None
    bound: object = None
    passed: bool = False
    exact: bool = True
    greedy_trace: list = field(default_factory=list)
    trivial_pass: bool = False
    scale_bridge: bool | None = None
    worst_part: int | None = None

    @property
    def parts(self):
        out = [[] for _ in range(self.k)]
        for j, p in enumerate(self.assignment):
            out[p].append(j)
        return out

    def to_json(self):
        bound = self.bound.to_json() if isinstance(self.bound, QuadSurd) else self.bound
        return {
            "method": self.method,
            "k": self.k,
            "assignment": list(self.assignment),
            "parts": self.parts,
            "spectra": [s.to_json() for s in self.spectra],
            "max_seminorm": fmt_scalar(self.max_seminorm) if self.max_seminorm is not None else None,
            "max_seminorm_approx": float(self.max_seminorm) if self.max_seminorm is not None else None,
            "bound": bound,
            "passed": self.passed,
            "exact": self.exact,
            "trivial_pass": self.trivial_pass,
            "scale_bridge": self.scale_bridge,
            "greedy_trace": [float(x) for x in self.greedy_trace],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["assignment"]), obj["k"], obj.get("method", "external"),
                   passed=obj.get("passed", False))


def part_bound(inst):
    """``delta(k*eps, m) / k``: exact surd on exact instances."""
    alpha = inst.k * inst.eps
    b = delta_bound(alpha, inst.m)
    return b / inst.k


def _evaluate_assignment(inst, assignment):
    """Spectra, exact verdict and margins for a complete assignment."""
    ctx = inst.ctx
    bound = part_bound(inst)
    spectra, charpolys = [], []
    for s in _part_sums(inst, assignment):
        spectra.append(hyperb.spectrum(ctx, s))
        charpolys.append(ctx.charpoly(s))
    norms = [max(sp.max, -sp.min) if sp.eigenvalues else 0 for sp in spectra]
    worst = max(range(inst.k), key=lambda i: norms[i])
    if inst.exact:
        # parts lie in the closed cone, so the seminorm is the largest eigenvalue
        passed = all(compare_largest_root_to(f, bound) <= 0 for f in charpolys)
        trivial = bound >= 1
    else:
        passed = max(norms) <= float(bound) + FLOAT_COMPARE_TOL
        trivial = float(bound) >= 1
    return spectra, norms, worst, bound, passed, trivial


def _certificate(inst, assignment, method, trace=()):
    spectra, norms, worst, bound, passed, trivial = _evaluate_assignment(inst, assignment)
    cert = PartitionCertificate(tuple(assignment), inst.k, method, spectra, norms[worst], bound,
                                passed, inst.exact, list(trace), trivial, worst_part=worst)
    if inst.exact:
        final = assignment_charpoly(inst, assignment)
        worst_poly = inst.ctx.charpoly(_part_sums(inst, assignment)[worst])
        if worst_poly.degree >= 1 and final.degree >= 1:
            cert.scale_bridge = compare_largest_roots(final, worst_poly.compose_linear(Fraction(1, inst.k), 0)) == 0
    return cert


# -- partitioners ----------------------------------------------------------------------

def greedy_partition(inst):
    """Fix vectors in order, each to the part minimizing the conditional largest root."""
    assignment = []
    current = expected_charpoly(inst, ())
    _check_real_rooted(current)
    trace = [_root_value(current)]
    for j in range(inst.m):
        sums = _part_sums(inst, assignment)
        best, best_p = None, None
        seen = {}
        for p in range(inst.k):
            # parts with identical sums give the same polynomial up to block order
            if sums[p] in seen:
                continue
            seen[sums[p]] = p
            f = expected_charpoly(inst, assignment + [p])
            _check_real_rooted(f)
            if best is None or _less(f, best):
                best, best_p = f, p
        assignment.append(best_p)
        trace.append(_root_value(best))
    return _certificate(inst, assignment, "greedy", trace)


def _less(f, g):
    if f.backend == FLOAT:
        return _float_top_root(f) < _float_top_root(g) - FLOAT_COMPARE_TOL
    return compare_largest_roots(f, g) < 0


def _subset_charpolys(inst):
    """``h(t e - sum_{j in S} u_j)`` for every subset ``S``, as coefficient tuples indexed by mask."""
    m, ctx = inst.m, inst.ctx
    zero = tuple(c * 0 for c in ctx.e)
    terms, scale = _block_terms(ctx, inst.us, 1, zero, tuple(range(m)))
    width = ctx.degree + 1
    table = np.zeros((1 << m, width), dtype=object if inst.exact else float)
    for mask, cs in terms.items():
        table[mask, :len(cs)] = cs
    # rank-one vectors make the expansion multi-affine, so subset sums give every restriction
    for b in range(m):
        bit = 1 << b
        for mask in range(1 << m):
            if mask & bit:
                table[mask] += table[mask ^ bit]
    if inst.exact:
        return [tuple(Fraction(int(c), scale) for c in row) for row in table]
    return [tuple(float(c) for c in row) for row in table]


def _separated_top_root(f):
    """Float estimate of the largest root, taken on the square-free part so multiplicities do not blur it."""
    g = squarefree_part(f) if f.backend == RATIONAL else f
    r = float_roots(g)
    return float(np.max(r.real)) if len(r) else 0.0


def _lambda_max_order(inst):
    """Rank every subset by its largest eigenvalue; equal eigenvalues share a rank."""
    keyed = _subset_charpolys(inst)
    backend = inst.ctx.backend
    polys = {key: UniPoly(list(key), backend) for key in set(keyed)}
    approx = {key: _separated_top_root(f) for key, f in polys.items()}
    uniq = sorted(polys, key=approx.get)
    ranks = {}
    if not inst.exact:
        r = 0
        for i, key in enumerate(uniq):
            if i and approx[key] - approx[uniq[i - 1]] > FLOAT_COMPARE_TOL:
                r += 1
            ranks[key] = r
        return [ranks[key] for key in keyed]
    # floats order well-separated roots; clusters of near-equal roots are settled exactly
    clusters, cur = [], [uniq[0]]
    for prev, key in zip(uniq, uniq[1:]):
        if approx[key] - approx[prev] > 1e-6 * max(1.0, abs(approx[key])):
            clusters.append(cur)
            cur = []
        cur.append(key)
    clusters.append(cur)

    def cmp(a, b):
        return compare_largest_roots(polys[a], polys[b])

    r = -1
    for cluster in clusters:
        cluster.sort(key=functools.cmp_to_key(cmp))
        for i, key in enumerate(cluster):
            if i == 0 or cmp(cluster[i - 1], key) != 0:
                r += 1
            ranks[key] = r
    return [ranks[key] for key in keyed]


def exhaustive_partition(inst, budget=EXHAUSTIVE_BUDGET):
    """Assignment minimizing the largest part eigenvalue; the first one found wins ties."""
    m, k = inst.m, inst.k
    if k ** m > budget:
        raise BudgetExceeded("k**m exceeds the enumeration budget", k=k, m=m, budget=budget)
    rank = _lambda_max_order(inst)
    best = [None, None]
    masks = [0] * k
    assignment = [0] * m

    def walk(j, current):
        if best[0] is not None and current >= best[0]:
            return
        if j == m:
            best[0], best[1] = current, list(assignment)
            return
        # element 0 is pinned to part 0: parts are interchangeable
        for p in range(k if j else 1):
            old = masks[p]
            masks[p] = old | (1 << j)
            assignment[j] = p
            walk(j + 1, max(current, rank[masks[p]]))
            masks[p] = old

    walk(0, rank[0])
    return _certificate(inst, best[1], "exhaustive")


def verify_certificate(inst, cert):
    """Recompute every part spectrum and the bound; raises on malformed assignments."""
    assignment = tuple(cert.assignment)
    if len(assignment) != inst.m:
        raise MalformedPartition("assignment does not cover every vector",
                                 expected=inst.m, got=len(assignment))
    if any(not isinstance(p, int) or not 0 <= p < inst.k for p in assignment):
        raise MalformedPartition("part index out of range", k=inst.k)
    spectra, norms, worst, bound, passed, trivial = _evaluate_assignment(inst, assignment)
    bound_f = float(bound)
    return {
        "passed": passed,
        "consistent": passed == cert.passed,
        "trivial_pass": trivial,
        "bound": bound.to_json() if isinstance(bound, QuadSurd) else bound,
        "max_seminorm": float(norms[worst]),
        "margins": [bound_f - float(n) for n in norms],
        "spectra": [s.to_json() for s in spectra],
        "exact": inst.exact,
    }
