"""Extreme zeros of elementary-symmetric block restrictions.

Restricting ``e_d`` on ``m*k`` variables to the line ``t*1 - (indicator of
the first m coordinates)`` gives a shifted Jacobi polynomial. Its largest
zero is tabulated against the limiting value, a lower bound that holds for
every partition and the general upper bound on the best partition.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from ._scalar import RATIONAL, to_scalar
from .errors import InfeasibleParameters, PreconditionError
from .surd import QuadSurd
from .unipoly import UniPoly, jacobi_largest_zero_shifted, jacobi_shifted, largest_root_bracket

CSV_COLUMNS = ("d", "m", "alpha", "beta", "largest_zero", "limit", "lower_bound", "upper_bound")
DEFAULT_ZERO_TOL = Fraction(1, 10**12)


def _check_feasible(m, k, d):
    if m < 1 or k < 1 or d < 0 or d > m * k:
        raise InfeasibleParameters("need m, k >= 1 and 0 <= d <= m*k", m=m, k=k, d=d)


def jacobi_parameters(m, k, d):
    return m * k - m - d, m - d


def block_restriction_poly(m, k, d):
    """``sum_j C(m(k-1), j) C(m, d-j) (t-1)^(d-j) t^j`` with exact coefficients."""
    _check_feasible(m, k, d)
    t = UniPoly([0, 1])
    tm1 = UniPoly([-1, 1])
    out = UniPoly([0])
    for j in range(d + 1):
        c = math.comb(m * (k - 1), j) * math.comb(m, d - j)
        if c:
            out = out + (tm1 ** (d - j)) * (t ** j) * c
    return out


def jacobi_identity_check(m, k, d):
    """Compare the block restriction with ``P_d^(alpha, beta)(2t - 1)`` coefficientwise."""
    _check_feasible(m, k, d)
    alpha, beta = jacobi_parameters(m, k, d)
    lhs = block_restriction_poly(m, k, d)
    rhs = jacobi_shifted(d, alpha, beta)
    out = {"m": m, "k": k, "d": d, "alpha": alpha, "beta": beta, "equal": lhs == rhs}
    if not out["equal"]:
        out["block"] = lhs.to_json()
        out["jacobi"] = rhs.to_json()
    return out


def identity_grid(d_max=6, m_max=6, k_max=3):
    """Every feasible ``(m, k, d)`` in the box."""
    return [(m, k, d) for m in range(1, m_max + 1) for k in range(1, k_max + 1)
            for d in range(0, min(d_max, m * k) + 1)]


def asymptotic_limit(a, b):
    """``b^2 - a^2 + sqrt((a^2 + b^2 - 1)^2 - 4 a^2 b^2)`` as an exact surd in the classical variable."""
    a, b = to_scalar(a, RATIONAL), to_scalar(b, RATIONAL)
    radicand = (a * a + b * b - 1) ** 2 - 4 * a * a * b * b
    if radicand < 0:
        raise PreconditionError("negative radicand", a=str(a), b=str(b), radicand=str(radicand))
    return QuadSurd(b * b - a * a, 1, radicand)


def to_unit_interval(x):
    """Classical variable on ``[-1, 1]`` to the shifted variable on ``[0, 1]``."""
    return (x + 1) / 2


def _check_eps(k, eps):
    eps = to_scalar(eps, RATIONAL)
    if k < 2 or not 0 < eps <= 1 - Fraction(1, k):
        raise InfeasibleParameters("need k >= 2 and 0 < eps <= 1 - 1/k", k=k, eps=str(eps))
    return eps


def lower_bound(k, eps):
    """``1/k + eps(k-2)/k + (2/k) sqrt((k-1)(eps - eps^2))``: no partition does better for large d."""
    eps = _check_eps(k, eps)
    return QuadSurd(Fraction(1, k) + eps * (k - 2) / k, Fraction(2, k), (k - 1) * (eps - eps * eps))


def upper_bound(k, eps):
    """``1/k + eps + 2 sqrt(eps/k)``: the guaranteed bound as the number of vectors grows."""
    eps = _check_eps(k, eps)
    return QuadSurd(Fraction(1, k) + eps, Fraction(2, k), k * eps)


def limit_for(k, eps):
    """Shifted limiting zero for ``(a, b) = (1 - 1/k - eps, 1/k - eps)``; checked against ``lower_bound``."""
    eps = _check_eps(k, eps)
    a, b = 1 - Fraction(1, k) - eps, Fraction(1, k) - eps
    value = to_unit_interval(asymptotic_limit(a, b))
    closed = lower_bound(k, eps)
    if value.compare(closed) != 0:
        raise AssertionError(f"limit {value} disagrees with closed form {closed}")
    return value


@dataclass(frozen=True)
class SharpnessRow:
    d: int
    m: int
    alpha: int
    beta: int
    largest_zero: Fraction
    zero_width: Fraction
    limit: float
    lower_bound: float
    upper_bound: float

    @property
    def error(self):
        return abs(float(self.largest_zero) - self.limit)

    def csv_values(self):
        return (self.d, self.m, self.alpha, self.beta, repr(float(self.largest_zero)),
                repr(self.limit), repr(self.lower_bound), repr(self.upper_bound))

    def to_json(self):
        return {"d": self.d, "m": self.m, "alpha": self.alpha, "beta": self.beta,
                "largest_zero": float(self.largest_zero), "zero_width": float(self.zero_width),
                "limit": self.limit, "error": self.error,
                "lower_bound": self.lower_bound, "upper_bound": self.upper_bound}


def largest_zero(m, k, d, tol=DEFAULT_ZERO_TOL):
    """Bracket of the largest zero of the block restriction.

    With ``alpha, beta > -1`` the three-term recurrence gives exact zero
    counts above any point; otherwise the expanded polynomial is isolated
    with Sturm sequences.
    """
    alpha, beta = jacobi_parameters(m, k, d)
    if alpha > -1 and beta > -1:
        return jacobi_largest_zero_shifted(d, alpha, beta, tol)
    return largest_root_bracket(block_restriction_poly(m, k, d), tol)


def table_row(k, eps, d, tol=DEFAULT_ZERO_TOL):
    eps = _check_eps(k, eps)
    if d < 1:
        raise InfeasibleParameters("degree must be positive", d=d)
    m = math.ceil(d / (eps * k))
    alpha, beta = jacobi_parameters(m, k, d)
    bracket = largest_zero(m, k, d, tol)
    return SharpnessRow(d, m, alpha, beta, bracket.value, bracket.hi - bracket.lo,
                        float(limit_for(k, eps)), float(lower_bound(k, eps)), float(upper_bound(k, eps)))


def convergence_table(k, eps, d_list, tol=DEFAULT_ZERO_TOL, map_fn=map):
    """One row per degree, in increasing ``d``; ``map_fn`` may be a pool's ``map``."""
    eps = _check_eps(k, eps)
    ds = sorted(set(d_list))
    return list(map_fn(_RowTask(k, eps, tol), ds))


@dataclass(frozen=True)
class _RowTask:
    k: int
    eps: Fraction
    tol: Fraction

    def __call__(self, d):
        return table_row(self.k, self.eps, d, self.tol)


def default_degrees(d_max):
    """Roughly geometric degrees up to ``d_max``, always including it."""
    out = [d for d in (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000) if d < d_max]
    return out + [d_max]


def table_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_values())
    return buf.getvalue()
