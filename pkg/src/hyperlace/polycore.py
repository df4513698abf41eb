"""Sparse multivariate polynomials over exact rationals (or floats).

Terms map exponent tuples to nonzero coefficients. Iteration and
serialization follow graded lexicographic order, so JSON output is
byte-stable.
"""

from __future__ import annotations

import contextlib
import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from types import MappingProxyType

from ._scalar import FLOAT, RATIONAL, check_backend, fmt_scalar, to_scalar, to_vector
from .errors import BackendMismatch, CapExceeded, DimensionMismatch, PreconditionError
from .unipoly import UniPoly


@dataclass(frozen=True)
class Limits:
    max_nvars: int = 24
    max_degree: int = 16


LIMITS = Limits()


@contextlib.contextmanager
def limits(**overrides):
    """Temporarily raise or lower the size caps, e.g. ``with limits(max_degree=24):``."""
    global LIMITS
    old = LIMITS
    LIMITS = replace(old, **overrides)
    try:
        yield LIMITS
    finally:
        LIMITS = old


def _grlex_key(exp):
    return (-sum(exp), tuple(-e for e in exp))


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "backend", "_terms", "_degree")

    def __init__(self, nvars, terms=None, backend=RATIONAL, *, _trusted=False):
        check_backend(backend)
        self.nvars = int(nvars)
        self.backend = backend
        if _trusted:
            clean = terms
        else:
            clean = {}
            for exp, c in (terms or {}).items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != self.nvars or any(e < 0 for e in exp):
                    raise DimensionMismatch(f"exponent {exp} does not fit {self.nvars} variables")
                c = to_scalar(c, backend)
                if c != 0:
                    clean[exp] = clean.get(exp, 0) + c
            clean = {e: c for e, c in clean.items() if c != 0}
        self._terms = clean
        self._degree = max((sum(e) for e in clean), default=-1)
        if self.nvars > LIMITS.max_nvars:
            raise CapExceeded(f"{self.nvars} variables exceeds cap {LIMITS.max_nvars}")
        if self._degree > LIMITS.max_degree:
            raise CapExceeded(f"degree {self._degree} exceeds cap {LIMITS.max_degree}")

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, nvars, c, backend=RATIONAL):
        return cls(nvars, {(0,) * nvars: c}, backend)

    @classmethod
    def variable(cls, nvars, i, backend=RATIONAL):
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1}, backend)

    @classmethod
    def linear(cls, coeffs, const=0, backend=RATIONAL):
        n = len(coeffs)
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(n, terms, backend)

    # -- structure -------------------------------------------------------
    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    @property
    def degree(self):
        return self._degree

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def is_homogeneous(self):
        degs = {sum(e) for e in self._terms}
        return len(degs) <= 1

    def coefficient(self, exp):
        return self._terms.get(tuple(exp), to_scalar(0, self.backend))

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return (self.nvars, self.backend, self._terms) == (other.nvars, other.backend, other._terms)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, self.backend, frozenset(self._terms.items())))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for exp, c in self.items():
            mono = "*".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exp) if e)
            parts.append(f"{fmt_scalar(c)}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.backend != self.backend:
                raise BackendMismatch("cannot mix rational and float polynomials")
            if other.nvars != self.nvars:
                raise DimensionMismatch(f"{self.nvars} vs {other.nvars} variables")
            return other
        return MultiPoly.constant(self.nvars, to_scalar(other, self.backend), self.backend)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = v
        return MultiPoly(self.nvars, out, self.backend, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self._terms.items()}, self.backend, _trusted=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = to_scalar(other, self.backend)
            if c == 0:
                return MultiPoly(self.nvars, {}, self.backend, _trusted=True)
            return MultiPoly(self.nvars, {e: c * v for e, v in self._terms.items()}, self.backend,
                             _trusted=True)
        other = self._coerce(other)
        out = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.nvars, {e: c for e, c in out.items() if c != 0}, self.backend,
                         _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = MultiPoly.constant(self.nvars, 1, self.backend)
        for _ in range(k):
            out = out * self
        return out

    # -- conversions -----------------------------------------------------
    def to_float(self):
        return MultiPoly(self.nvars, {e: float(c) for e, c in self._terms.items()}, FLOAT, _trusted=True)

    def embed(self, nvars, offset=0):
        """Same polynomial inside a larger variable set, occupying ``[offset, offset + self.nvars)``."""
        if offset < 0 or offset + self.nvars > nvars:
            raise DimensionMismatch("embedding does not fit")
        pad_l, pad_r = (0,) * offset, (0,) * (nvars - offset - self.nvars)
        return MultiPoly(nvars, {pad_l + e + pad_r: c for e, c in self._terms.items()}, self.backend,
                         _trusted=True)

    def to_json(self):
        return {
            "nvars": self.nvars,
            "backend": self.backend,
            "terms": [{"exp": list(e), "coef": fmt_scalar(c)} for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, obj):
        backend = obj.get("backend", RATIONAL)
        terms = {}
        for t in obj["terms"]:
            e = tuple(t["exp"])
            terms[e] = terms.get(e, 0) + to_scalar(t["coef"], backend)
        return cls(obj["nvars"], terms, backend)

    # -- calculus ----------------------------------------------------------
    def vector(self, x):
        """Coerce ``x`` to a coordinate tuple on this polynomial's backend."""
        x = list(x)
        if len(x) != self.nvars:
            raise DimensionMismatch(f"vector of length {len(x)} for {self.nvars} variables")
        return tuple(to_scalar(v, self.backend) for v in x)

    def partial(self, i):
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = c * e[i]
        return MultiPoly(self.nvars, out, self.backend, _trusted=True)


def evaluate(p, x):
    """Value of ``p`` at the point ``x`` (exact on the rational backend)."""
    x = p.vector(x)
    total = to_scalar(0, p.backend)
    cache = {}
    for exp, c in p._terms.items():
        term = c
        for i, e in enumerate(exp):
            if e:
                key = (i, e)
                if key not in cache:
                    cache[key] = x[i] ** e
                term = term * cache[key]
        total += term
    return total


def directional_derivative(p, v):
    """``D_v p = sum_k v_k dp/dx_k``."""
    v = p.vector(v)
    out = {}
    for e, c in p._terms.items():
        for i, ei in enumerate(e):
            if ei and v[i] != 0:
                ne = e[:i] + (ei - 1,) + e[i + 1:]
                out[ne] = out.get(ne, 0) + c * ei * v[i]
    return MultiPoly(p.nvars, {e: c for e, c in out.items() if c != 0}, p.backend, _trusted=True)


def restrict_to_line(p, base, direction):
    """Univariate ``t -> p(base + t * direction)``."""
    base, direction = p.vector(base), p.vector(direction)
    lines = [UniPoly([b, d], p.backend) for b, d in zip(base, direction)]
    powers = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = lines[i] ** e
        return powers[key]

    acc = [to_scalar(0, p.backend)] * (max(p.degree, 0) + 1)
    for exp, c in p._terms.items():
        term = UniPoly([c], p.backend)
        for i, e in enumerate(exp):
            if e:
                term = term * power(i, e)
        for k, tc in enumerate(term.coeffs):
            acc[k] += tc
    return UniPoly(acc, p.backend)


def compose_affine(p, forms, nvars_out):
    """Substitute ``x_i -> forms[i]`` where each form is a ``MultiPoly`` in ``nvars_out`` variables."""
    if len(forms) != p.nvars:
        raise DimensionMismatch("need one form per variable")
    one = MultiPoly.constant(nvars_out, 1, p.backend)
    powers = {}
    out = MultiPoly(nvars_out, {}, p.backend, _trusted=True)
    for exp, c in p._terms.items():
        term = one * c
        for i, e in enumerate(exp):
            if e:
                if (i, e) not in powers:
                    powers[(i, e)] = forms[i] ** e
                term = term * powers[(i, e)]
        out = out + term
    return out


def shift(p, v):
    """``x -> p(x - v)``."""
    v = p.vector(v)
    n = p.nvars
    forms = [MultiPoly.variable(n, i, p.backend) - v[i] for i in range(n)]
    return compose_affine(p, forms, n)


def block_product(h, k):
    """``h(x^1) h(x^2) ... h(x^k)`` on ``k`` disjoint blocks; block ``i`` uses ``[i*n, (i+1)*n)``."""
    if k < 1:
        raise PreconditionError("block_product needs k >= 1")
    n = h.nvars
    out = MultiPoly.constant(n * k, 1, h.backend)
    for i in range(k):
        out = out * h.embed(n * k, i * n)
    return out


def direct_product(polys):
    """``p_1(x^1) p_2(x^2) ...`` on consecutive disjoint variable blocks."""
    total = sum(p.nvars for p in polys)
    out = MultiPoly.constant(total, 1, polys[0].backend)
    offset = 0
    for p in polys:
        out = out * p.embed(total, offset)
        offset += p.nvars
    return out


def block_vector(v, k, block):
    """Place ``v`` into block ``block`` of a ``k``-fold product, zeros elsewhere."""
    n = len(v)
    zero = v[0] * 0 if n else 0
    out = [zero] * (n * k)
    out[block * n:(block + 1) * n] = v
    return tuple(out)


def direct_sum(*vectors):
    return tuple(itertools.chain.from_iterable(vectors))


# -- built-in families ----------------------------------------------------

def coordinate_product(n, backend=RATIONAL):
    return MultiPoly(n, {(1,) * n: 1}, backend)


def elementary_symmetric(n, d, backend=RATIONAL):
    """``e_d(x_1..x_n)``: sum over d-subsets, all coefficients 1."""
    if not 0 <= d <= n:
        raise PreconditionError(f"elementary symmetric needs 0 <= d <= n, got d={d}, n={n}")
    terms = {}
    for S in itertools.combinations(range(n), d):
        exp = [0] * n
        for i in S:
            exp[i] = 1
        terms[tuple(exp)] = 1
    return MultiPoly(n, terms, backend)


def lorentz(n, backend=RATIONAL):
    """``x_1^2 - x_2^2 - ... - x_n^2``."""
    terms = {}
    for i in range(n):
        exp = [0] * n
        exp[i] = 2
        terms[tuple(exp)] = 1 if i == 0 else -1
    return MultiPoly(n, terms, backend)


def sym_pairs(d):
    """Variable order for a symmetric d x d matrix: upper triangle, row-major."""
    return [(i, j) for i in range(d) for j in range(i, d)]


def sym_dim_to_size(nvars):
    d = (math.isqrt(8 * nvars + 1) - 1) // 2
    if d * (d + 1) // 2 != nvars:
        raise DimensionMismatch(f"{nvars} is not a triangular number")
    return d


def flatten_symmetric(matrix):
    d = len(matrix)
    return tuple(matrix[i][j] for i, j in sym_pairs(d))


def unflatten_symmetric(coords):
    d = sym_dim_to_size(len(coords))
    m = [[None] * d for _ in range(d)]
    for (i, j), c in zip(sym_pairs(d), coords):
        m[i][j] = m[j][i] = c
    return m


def symmetric_determinant(d, backend=RATIONAL):
    """``det X`` for symmetric ``X`` with ``d(d+1)/2`` variables (Leibniz expansion)."""
    if not 1 <= d <= 5:
        raise PreconditionError("symmetric_determinant supports 1 <= d <= 5")
    pairs = sym_pairs(d)
    index = {}
    for k, (i, j) in enumerate(pairs):
        index[(i, j)] = index[(j, i)] = k
    nv = len(pairs)
    terms = {}
    for perm in itertools.permutations(range(d)):
        inversions = sum(1 for a in range(d) for b in range(a + 1, d) if perm[a] > perm[b])
        exp = [0] * nv
        for i in range(d):
            exp[index[(i, perm[i])]] += 1
        e = tuple(exp)
        terms[e] = terms.get(e, 0) + (-1) ** inversions
    return MultiPoly(nv, terms, backend)


def identity_flat(d, backend=RATIONAL):
    return to_vector([1 if i == j else 0 for i, j in sym_pairs(d)], backend)


def ones(n, backend=RATIONAL):
    return (to_scalar(1, backend),) * n


def unit(n, i, backend=RATIONAL):
    return tuple(to_scalar(int(k == i), backend) for k in range(n))


def fraction_vector(seq):
    return tuple(Fraction(s) if not isinstance(s, Fraction) else s for s in seq)
