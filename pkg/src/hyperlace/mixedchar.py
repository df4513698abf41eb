"""Mixed hyperbolic polynomials, mixed characteristic polynomials and root bounds.

For a context ``(h, e)`` and vectors ``v_1..v_m`` the mixed polynomial is
``prod_j (1 - y_j D_{v_j}) h`` in variables ``x_1..x_n, y_1..y_m``; its
characteristic polynomial sets ``x = t*e`` and every ``y_j = 1``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from . import hyperb
from ._scalar import RATIONAL, fmt_scalar, fmt_vector, to_scalar
from .errors import InfeasibleParameters, NotRealRooted, PreconditionError
from .polycore import MultiPoly, compose_affine, directional_derivative, evaluate, restrict_to_line
from .surd import QuadSurd, compare_largest_root_to
from .unipoly import (UniPoly, compare_largest_roots, float_real_roots, is_real_rooted,
                      largest_root_bracket)


@dataclass(frozen=True)
class MixedPoly:
    """``h[v_1..v_m]`` in ``n + m`` variables (``x`` first, then ``y``)."""

    poly: MultiPoly
    ctx: hyperb.HyperbolicContext
    vs: tuple
    rank_one: tuple

    @property
    def direction(self):
        """Hyperbolicity direction ``(e, 0)``."""
        zero = to_scalar(0, self.poly.backend)
        return tuple(self.ctx.e) + (zero,) * len(self.vs)

    def in_cone(self, point, mode="closed"):
        return hyperb.in_cone(self.poly, self.direction, point, mode)


def _in_closed_cone(ctx, v):
    if ctx.backend == RATIONAL:
        return hyperb.cone_membership(ctx, v, "closed")
    roots = float_real_roots(ctx.charpoly(v))
    scale = max([1.0] + [abs(r) for r in roots])
    return not roots or roots[0] >= -hyperb.BOUNDARY_TOL * scale


def _check_vectors(ctx, vs):
    vs = [ctx.vector(v) for v in vs]
    if not vs:
        raise PreconditionError("need at least one vector")
    for i, v in enumerate(vs):
        if not _in_closed_cone(ctx, v):
            raise PreconditionError("vector outside the closed hyperbolicity cone", index=i,
                                    vector=fmt_vector(v))
    return vs


def mixed_operator_poly(ctx, vs, check=True):
    """Expand ``prod_j (1 - y_j D_{v_j}) h`` one operator at a time."""
    vs = _check_vectors(ctx, vs) if check else [ctx.vector(v) for v in vs]
    n, m = ctx.nvars, len(vs)
    zero = to_scalar(0, ctx.backend)
    p = ctx.h.embed(n + m, 0)
    for j, v in enumerate(vs):
        y = MultiPoly.variable(n + m, n + j, ctx.backend)
        p = p - y * directional_derivative(p, tuple(v) + (zero,) * m)
    ranks = tuple(hyperb.rank(ctx, v) <= 1 for v in vs)
    return MixedPoly(p, ctx, tuple(vs), ranks)


def substitution_poly(ctx, vs):
    """``h(x - y_1 v_1 - ... - y_m v_m)``; equals the operator form when every rank is at most one."""
    vs = [ctx.vector(v) for v in vs]
    n, m = ctx.nvars, len(vs)
    forms = []
    for i in range(n):
        form = MultiPoly.variable(n + m, i, ctx.backend)
        for j, v in enumerate(vs):
            if v[i] != 0:
                form = form - MultiPoly.variable(n + m, n + j, ctx.backend) * v[i]
        forms.append(form)
    return compose_affine(ctx.h, forms, n + m)


def apply_operators(h, ops):
    """Apply ``(1 - D_v)`` for each ``v`` in ``ops`` to ``h`` (no auxiliary variables)."""
    for v in ops:
        h = h - directional_derivative(h, v)
    return h


def mixed_char_poly(ctx, vs, check=True):
    """``t -> h[v_1..v_m](t*e + 1)``."""
    vs = _check_vectors(ctx, vs) if check else [ctx.vector(v) for v in vs]
    q = apply_operators(ctx.h, vs)
    zero = tuple(to_scalar(0, ctx.backend) for _ in ctx.e)
    chi = restrict_to_line(q, zero, ctx.e)
    if not is_real_rooted(chi):
        raise NotRealRooted("mixed characteristic polynomial is not real-rooted", poly=chi.to_json())
    return chi


# -- the root bound -------------------------------------------------------------

def delta_parts(alpha, m):
    """``(c, r)`` with ``delta(alpha, m) = (c + sqrt(r))**2``."""
    if m < 1:
        raise PreconditionError("m must be positive")
    c = 1 - Fraction(1, m) if not isinstance(alpha, float) else 1 - 1 / m
    r = alpha - (1 - c) * c
    if r < 0:
        raise PreconditionError("delta bound radicand is negative", alpha=fmt_scalar(alpha), m=m)
    return c, r


def delta_bound(alpha, m):
    """``(1 - 1/m + sqrt(alpha - (1/m)(1 - 1/m)))**2``.

    Exact ``QuadSurd`` for rational ``alpha``; plain float for float input.
    """
    if isinstance(alpha, float):
        c, r = delta_parts(alpha, m)
        return (c + math.sqrt(r)) ** 2
    c, r = delta_parts(to_scalar(alpha, RATIONAL), m)
    return QuadSurd(c * c + r, 2 * c, r)


def delta_infimum_gap(eps, m, grid=4000, t_max=1000.0):
    """Minimum over a grid of ``t > 1`` of ``ratio(t) - delta(eps, m)``.

    ``ratio(t) = (eps*t + (1 - 1/m) t/(t - 1)) / (1 - 1/m + t/m)``; a
    nonnegative result close to zero means the bound is the infimum.
    """
    target = float(delta_bound(eps, m))
    eps, c = float(eps), 1 - 1 / m
    best = math.inf
    for i in range(1, grid + 1):
        t = 1 + (t_max - 1) * (i / grid) ** 4
        best = min(best, (eps * t + c * t / (t - 1)) / (c + t / m) - target)
    return best


def mainbound_check(ctx, vs, eps):
    """Check that the largest root of the mixed characteristic polynomial is at most ``delta(eps, m)``.

    Preconditions ``sum(vs) == e`` and ``tr(v_i) <= eps`` are verified
    first and raise ``PreconditionError`` when they fail.
    """
    vs = _check_vectors(ctx, vs)
    eps = to_scalar(eps, ctx.backend)
    m = len(vs)
    total = [sum(col) for col in zip(*vs)]
    if ctx.backend == RATIONAL:
        if tuple(total) != tuple(ctx.e):
            raise PreconditionError("vectors do not sum to e")
    elif max(abs(a - b) for a, b in zip(total, ctx.e)) > 1e-9:
        raise PreconditionError("vectors do not sum to e within 1e-9")
    traces = [hyperb.trace(ctx, v) for v in vs]
    for i, tr in enumerate(traces):
        if tr > eps:
            raise PreconditionError("trace exceeds eps", index=i, trace=fmt_scalar(tr), eps=fmt_scalar(eps))
    chi = mixed_char_poly(ctx, vs, check=False)
    bound = delta_bound(eps, m)
    report = {"m": m, "eps": fmt_scalar(eps), "traces": [fmt_scalar(t) for t in traces],
              "chi": chi.to_json()}
    if ctx.backend == RATIONAL:
        br = largest_root_bracket(chi)
        sign = compare_largest_root_to(chi, bound)
        report.update(largest_root=[str(br.lo), str(br.hi)], largest_root_approx=float(br.value),
                      bound=bound.to_json(), margin=float(bound) - float(br.value),
                      exact=True, passed=sign <= 0)
    else:
        root = float_real_roots(chi)[-1]
        report.update(largest_root=root, bound=bound, margin=bound - root, exact=False,
                      passed=root <= bound + 1e-9)
    return report


# -- xi operators ----------------------------------------------------------------

def xi(g, v, point):
    """``g / D_v g`` at ``point``; ``v`` may be a vector or a coordinate index."""
    if isinstance(g, hyperb.HyperbolicContext):
        g = g.h
    if isinstance(v, int):
        v = tuple(to_scalar(int(i == v), g.backend) for i in range(g.nvars))
    dg = evaluate(directional_derivative(g, v), point)
    if dg == 0:
        raise PreconditionError("directional derivative vanishes: point on the cone boundary",
                                point=fmt_vector(g.vector(point)))
    return evaluate(g, point) / dg


# -- one-dimensional reduction ------------------------------------------------------

def tkd_apply(k, d, f):
    """Apply the linear operator ``T_{k,d}`` to the coefficients of ``f``."""
    a = list(f.coeffs) + [to_scalar(0, f.backend)] * (d + 2)
    out = []
    for j in range(d + 1):
        r = d - j
        coef = Fraction(j + 1, k + 1) * a[j + 1] + (d - 1 - j) * a[j]
        out.append(-coef * math.factorial(r) * math.comb(k + 1, r))
    return UniPoly(out, f.backend)


def gv_poly(ctx, v, k):
    """``(1 - D_v)^k (1 - D_e + k D_v) h(t*e)`` for ``v, e - k*v`` in the open cone."""
    v = ctx.vector(v)
    w = tuple(a - k * b for a, b in zip(ctx.e, v))
    if not hyperb.cone_membership(ctx, v, "open"):
        raise PreconditionError("v must lie in the open cone", v=fmt_vector(v))
    if not hyperb.cone_membership(ctx, w, "open"):
        raise PreconditionError("e - k*v must lie in the open cone", w=fmt_vector(w))
    q = apply_operators(ctx.h, [v] * k)
    q = q - directional_derivative(q, ctx.e) + directional_derivative(q, v) * k
    zero = tuple(to_scalar(0, ctx.backend) for _ in ctx.e)
    return restrict_to_line(q, zero, ctx.e)


# -- extremal-configuration explorer ----------------------------------------------------

def candidate_vectors(ctx, eps, m):
    """``floor(d/eps)`` copies of ``(eps/d) e``, the remainder ``(1 - k eps/d) e``, then zeros."""
    eps = to_scalar(eps, ctx.backend)
    d = ctx.degree
    if m * eps < d:
        raise InfeasibleParameters("need m * eps >= d", m=m, eps=fmt_scalar(eps), d=d)
    k = math.floor(Fraction(d) / Fraction(eps)) if ctx.backend == RATIONAL else math.floor(d / eps)
    k = min(k, m)
    small = tuple(c * eps / d for c in ctx.e)
    rest = tuple(c * (1 - k * eps / d) for c in ctx.e)
    vs = [small] * k
    zero = tuple(c * 0 for c in ctx.e)
    if any(x != 0 for x in rest):
        vs.append(rest)
    vs += [zero] * (m - len(vs))
    return vs


def _explore_value(ctx, vs):
    return mixed_char_poly(ctx, vs, check=False)


def central_explore(ctx, eps, m, budget=200, seed=0):
    """Seeded hill-climb for configurations with a large mixed-characteristic root.

    Heuristic only: moves keep every ``v_i`` in the closed cone, the sum
    equal to ``e`` and each trace at most ``eps``. The result is compared
    against the balanced candidate configuration and against ``delta(eps, m)``.
    """
    if ctx.backend != RATIONAL:
        raise PreconditionError("central_explore runs on exact contexts")
    eps = to_scalar(eps, RATIONAL)
    d = ctx.degree
    if m * eps < d:
        raise InfeasibleParameters("need m * eps >= d", m=m, eps=str(eps), d=d)
    rng = random.Random(seed)
    vs = [tuple(c / m for c in ctx.e) for _ in range(m)]
    best = _explore_value(ctx, vs)
    evaluations = 1
    accepted = 0
    n = ctx.nvars
    while evaluations < budget and m > 1:
        i, j = rng.sample(range(m), 2)
        step = Fraction(rng.randint(1, 8), 16)
        if rng.random() < 0.5:
            w = tuple(c * step for c in vs[i])
        else:
            w = tuple(Fraction(rng.randint(-4, 4), 8) * step for _ in range(n))
        new = list(vs)
        new[i] = tuple(a - b for a, b in zip(vs[i], w))
        new[j] = tuple(a + b for a, b in zip(vs[j], w))
        if not all(_in_closed_cone(ctx, new[x]) for x in (i, j)):
            continue
        if any(hyperb.trace(ctx, new[x]) > eps for x in (i, j)):
            continue
        evaluations += 1
        chi = _explore_value(ctx, new)
        if compare_largest_roots(chi, best) > 0:
            vs, best = new, chi
            accepted += 1
    cand = candidate_vectors(ctx, eps, m)
    cand_chi = _explore_value(ctx, cand)
    bound = delta_bound(eps, m)
    vs_cmp = compare_largest_roots(best, cand_chi)
    return {
        "heuristic": True,
        "seed": seed,
        "budget": budget,
        "evaluations": evaluations,
        "accepted_moves": accepted,
        "best_vectors": [fmt_vector(v) for v in vs],
        "best_largest_root": float(largest_root_bracket(best).value),
        "candidate_vectors": [fmt_vector(v) for v in cand],
        "candidate_largest_root": float(largest_root_bracket(cand_chi).value),
        "delta_bound": bound.to_json(),
        "exceeds_candidate": vs_cmp > 0,
        "exceeds_delta": compare_largest_root_to(best, bound) > 0,
    }


def derivative_pair_gap(ctx, u, v, w):
    """``(D_u D_v h(w))**2 - D_u^2 h(w) * D_v^2 h(w)`` (nonnegative on the closed cone)."""
    du = directional_derivative(ctx.h, ctx.vector(u))
    dv = directional_derivative(ctx.h, ctx.vector(v))
    duv = evaluate(directional_derivative(du, ctx.vector(v)), w)
    duu = evaluate(directional_derivative(du, ctx.vector(u)), w)
    dvv = evaluate(directional_derivative(dv, ctx.vector(v)), w)
    return duv * duv - duu * dvv
