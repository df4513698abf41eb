"""Univariate polynomials and exact real-root machinery.

Real-rootedness is decided with Sturm chains over the rationals. Chains are
stored as integer polynomials (positively rescaled, which leaves sign
patterns unchanged) so evaluation at a rational point is pure ``int`` work.

Root brackets use the half-open convention ``(lo, hi]``; ``lo == hi`` marks
a root known exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._scalar import FLOAT, RATIONAL, check_backend, fmt_scalar, to_scalar
from .errors import BackendMismatch, DimensionMismatch, NotRealRooted, PreconditionError

DEFAULT_TOL = Fraction(1, 10**12)
FLOAT_IMAG_TOL = 1e-9

# Global scale applied to every Jacobi polynomial. The standard normalization
# P_d(1) = C(d + alpha, d) corresponds to 1; the block-restriction identity
# is the arbiter of this value.
JACOBI_NORMALIZATION = Fraction(1)


class UniPoly:
    """Dense univariate polynomial, coefficients ascending by degree."""

    __slots__ = ("coeffs", "backend", "__dict__")

    def __init__(self, coeffs=(), backend=RATIONAL):
        check_backend(backend)
        cs = [to_scalar(c, backend) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.backend = backend

    @classmethod
    def from_roots(cls, roots, lead=1, backend=RATIONAL):
        p = cls([lead], backend)
        for r in roots:
            p = p * cls([-to_scalar(r, backend), 1], backend)
        return p

    @classmethod
    def monomial(cls, k, c=1, backend=RATIONAL):
        return cls([0] * k + [c], backend)

    # -- basic structure -------------------------------------------------
    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    @property
    def lc(self):
        if not self.coeffs:
            raise PreconditionError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc if self.coeffs else to_scalar(0, self.backend)

    def __repr__(self):
        return f"UniPoly({[fmt_scalar(c) for c in self.coeffs]}, {self.backend!r})"

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.backend == other.backend and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.backend, self.coeffs))

    def _other(self, other):
        if isinstance(other, UniPoly):
            if other.backend != self.backend:
                raise BackendMismatch("cannot mix rational and float polynomials")
            return other
        return UniPoly([other], self.backend)

    def __add__(self, other):
        other = self._other(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return UniPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)],
                       self.backend)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], self.backend)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            c = to_scalar(other, self.backend)
            return UniPoly([c * a for a in self.coeffs], self.backend)
        other = self._other(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly([], self.backend)
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return UniPoly(out, self.backend)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = UniPoly([1], self.backend)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self):
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:], self.backend)

    def compose_linear(self, a, b):
        """Return ``t -> p(a*t + b)``."""
        lin = UniPoly([b, a], self.backend)
        out = UniPoly([], self.backend)
        for c in reversed(self.coeffs):
            out = out * lin + c
        return out

    def shift(self, c):
        """Return ``t -> p(t - c)``; roots move right by ``c``."""
        return self.compose_linear(1, -to_scalar(c, self.backend))

    def monic(self):
        lc = self.lc
        return UniPoly([c / lc for c in self.coeffs], self.backend)

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        q = [0] * max(len(r) - len(other.coeffs) + 1, 0)
        lc = other.lc
        dd = other.degree
        for i in range(len(r) - 1, dd - 1, -1):
            c = r[i]
            if c == 0:
                continue
            f = c / lc
            q[i - dd] = f
            for j, oc in enumerate(other.coeffs):
                r[i - dd + j] -= f * oc
        return UniPoly(q, self.backend), UniPoly(r[:dd] if dd > 0 else [], self.backend)

    def to_float(self):
        return UniPoly([float(c) for c in self.coeffs], FLOAT)

    def to_json(self):
        return {"backend": self.backend, "coeffs": [fmt_scalar(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj):
        backend = obj.get("backend", RATIONAL)
        return cls([to_scalar(c, backend) for c in obj["coeffs"]], backend)


def poly_gcd(f, g):
    """Monic gcd over the rationals."""
    _require_rational(f)
    a, b = f, g
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic() if not a.is_zero() else a


def squarefree_part(f):
    g = poly_gcd(f, f.derivative())
    return f.divmod(g)[0].monic() if g.degree > 0 else f.monic()


def yun_factorization(f):
    """Square-free factorization ``f = lc * prod(g_i ** i)``; returns ``[(g_i, i)]``."""
    _require_rational(f)
    out = []
    fp = f.derivative()
    a = poly_gcd(f, fp)
    b = f.divmod(a)[0]
    c = fp.divmod(a)[0]
    d = c - b.derivative()
    i = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        if a.degree > 0:
            out.append((a, i))
        b = b.divmod(a)[0]
        c = d.divmod(a)[0]
        d = c - b.derivative()
        i += 1
    return out


def _require_rational(f):
    if f.backend != RATIONAL:
        raise BackendMismatch("exact root machinery needs the rational backend; use the float helpers")


def _integer_coeffs(p):
    """Positive multiple of ``p`` with coprime integer coefficients."""
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p.coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return tuple(c // g for c in ints) if g > 1 else tuple(ints)


def _int_sign_at(coeffs, x):
    """Sign of the integer polynomial at rational ``x`` using homogeneous Horner."""
    p, q = x.numerator, x.denominator
    n = len(coeffs) - 1
    acc = coeffs[-1]
    qp = q
    for i in range(n - 1, -1, -1):
        acc = acc * p + coeffs[i] * qp
        qp *= q
    return (acc > 0) - (acc < 0)


class SturmChain:
    """Sturm sequence of the square-free part of a rational polynomial."""

    def __init__(self, f):
        _require_rational(f)
        if f.degree < 1:
            raise PreconditionError("Sturm chain needs a nonconstant polynomial")
        self.sqfree = squarefree_part(f)
        seq = [self.sqfree, self.sqfree.derivative()]
        while seq[-1].degree > 0:
            r = seq[-2].divmod(seq[-1])[1]
            if r.is_zero():
                break
            seq.append(-r)
        self._ints = [_integer_coeffs(p) for p in seq]

    @cached_property
    def _inf_signs(self):
        return [(1 if c[-1] > 0 else -1) for c in self._ints]

    @staticmethod
    def _changes(signs):
        n, prev = 0, 0
        for s in signs:
            if s == 0:
                continue
            if prev and s != prev:
                n += 1
            prev = s
        return n

    def variations(self, x):
        """Sign changes at ``x``; ``None`` means +infinity, ``"-inf"`` minus infinity."""
        if x is None:
            return self._changes(self._inf_signs)
        if x == "-inf":
            return self._changes([s if (len(c) - 1) % 2 == 0 else -s
                                  for s, c in zip(self._inf_signs, self._ints)])
        return self._changes([_int_sign_at(c, x) for c in self._ints])

    def count(self, lo=None, hi=None):
        """Distinct real roots in ``(lo, hi]``; ``None`` bounds are infinite."""
        return self.variations("-inf" if lo is None else lo) - self.variations(hi)

    def is_root(self, x):
        return _int_sign_at(self._ints[0], x) == 0

    @cached_property
    def bound(self):
        """Power of two strictly exceeding every root magnitude (Cauchy bound)."""
        c = self.sqfree.coeffs
        b = 1 + max(abs(a / c[-1]) for a in c[:-1]) if len(c) > 1 else Fraction(1)
        return Fraction(2 ** max(1, math.ceil(math.log2(b)) + 1))


@dataclass(frozen=True)
class RootBracket:
    """Root in ``(lo, hi]`` (or exactly ``lo`` when ``lo == hi``) with its multiplicity."""

    lo: Fraction
    hi: Fraction
    multiplicity: int = 1

    @property
    def exact(self):
        return self.lo == self.hi

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def value(self):
        return self.lo if self.exact else (self.lo + self.hi) / 2

    def __float__(self):
        return float(self.value)


def _try_exact(chain, lo, hi):
    """Snap a narrow isolating interval to a rational root when one is there."""
    if chain.is_root(hi):
        return hi, hi
    mid = (lo + hi) / 2
    for den in (10**3, 10**6, 10**9):
        c = mid.limit_denominator(den)
        if lo < c <= hi and chain.is_root(c):
            return c, c
    return lo, hi


def _refine(chain, lo, hi, tol):
    """Bisect an isolating interval ``(lo, hi]`` down to width ``tol``."""
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if chain.is_root(mid):
            return mid, mid
        if chain.count(lo, mid) == 1:
            hi = mid
        else:
            lo = mid
    return _try_exact(chain, lo, hi)


def _isolate(chain):
    out = []
    b = chain.bound
    stack = [(-b, b)]
    while stack:
        lo, hi = stack.pop()
        n = chain.count(lo, hi)
        if n == 0:
            continue
        if n == 1:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((lo, mid))
        stack.append((mid, hi))
    out.sort()
    return out


def _multiplicities(f, brackets, own=True):
    """Multiplicity in ``f`` of the root isolated by each bracket (0 if absent)."""
    factors = yun_factorization(f)
    if own and len(factors) == 1 and factors[0][1] == 1:
        return [1] * len(brackets)
    chains = [(SturmChain(g), i) for g, i in factors]
    mults = []
    for lo, hi in brackets:
        m = 0
        for ch, i in chains:
            hit = ch.is_root(lo) if lo == hi else ch.count(lo, hi) > 0
            if hit:
                m = i
                break
        mults.append(m)
    return mults


def real_roots(f, tol=DEFAULT_TOL):
    """All distinct real roots of ``f`` as ascending ``RootBracket`` list (width <= tol)."""
    _require_rational(f)
    if f.degree < 1:
        return []
    chain = SturmChain(f)
    brackets = [_refine(chain, lo, hi, tol) for lo, hi in _isolate(chain)]
    mults = _multiplicities(f, brackets)
    return [RootBracket(lo, hi, m) for (lo, hi), m in zip(brackets, mults)]


def real_root_count(f, lo=None, hi=None):
    """Number of real roots in ``(lo, hi]`` counted with multiplicity.

    ``None`` bounds are infinite, so ``real_root_count(f)`` equals
    ``f.degree`` exactly when ``f`` is real-rooted.
    """
    if f.is_zero():
        raise PreconditionError("zero polynomial has infinitely many roots")
    _require_rational(f)
    if lo is not None and hi is not None and not lo < hi:
        raise PreconditionError("need lo < hi")
    if f.degree < 1:
        return 0
    lo = None if lo is None else to_scalar(lo, RATIONAL)
    hi = None if hi is None else to_scalar(hi, RATIONAL)
    total = 0
    for g, i in yun_factorization(f):
        total += i * SturmChain(g).count(lo, hi)
    return total


def is_real_rooted(f, tol=FLOAT_IMAG_TOL):
    """Exact Sturm decision on rationals; tolerance test on floats."""
    if f.is_zero():
        raise PreconditionError("zero polynomial")
    if f.degree < 1:
        return True
    if f.backend == FLOAT:
        return is_real_rooted_float(f, tol)
    return real_root_count(f) == f.degree


def float_roots(f):
    """numpy roots of a float (or rational) polynomial, ascending by real part."""
    cs = [float(c) for c in f.coeffs]
    if len(cs) < 2:
        return np.array([])
    r = np.roots(cs[::-1])
    return r[np.argsort(r.real)]


def _float_scale(f):
    return max(1.0, max(abs(float(c)) for c in f.coeffs) / abs(float(f.lc)))


def is_real_rooted_float(f, tol=FLOAT_IMAG_TOL):
    r = float_roots(f)
    return bool(np.all(np.abs(r.imag) < tol * _float_scale(f)))


def float_real_roots(f, tol=FLOAT_IMAG_TOL):
    r = float_roots(f)
    if not np.all(np.abs(r.imag) < tol * _float_scale(f)):
        raise NotRealRooted("float polynomial has non-real roots beyond tolerance",
                            max_imag=float(np.max(np.abs(r.imag))))
    return sorted(float(x) for x in r.real)


def largest_root_bracket(f, tol=DEFAULT_TOL):
    """Bracket of the largest real root; raises unless ``f`` is real-rooted."""
    _require_rational(f)
    if f.degree < 1:
        raise PreconditionError("constant polynomial has no roots")
    if not is_real_rooted(f):
        raise NotRealRooted("largest_root needs a real-rooted polynomial", poly=f.to_json())
    chain = SturmChain(f)
    lo, hi = _top_interval(chain)
    lo, hi = _refine(chain, lo, hi, tol)
    return RootBracket(lo, hi, 1)


def _top_interval(chain):
    hi = chain.bound
    lo = -hi
    # shrink from below until only the top root remains in (lo, hi]
    while chain.count(lo, hi) > 1:
        mid = (lo + hi) / 2
        if chain.count(mid, hi) >= 1:
            lo = mid
        else:
            hi = mid
    return lo, hi


def largest_root(f, tol=DEFAULT_TOL):
    """Largest root within ``tol``: a ``Fraction`` on rationals, ``float`` on floats."""
    if f.backend == FLOAT:
        if f.degree < 1:
            raise PreconditionError("constant polynomial has no roots")
        return float_real_roots(f)[-1]
    return largest_root_bracket(f, to_scalar(tol, RATIONAL)).value


def sign_root_minus(chain, x):
    """Sign of (largest root of the chain's polynomial) minus rational ``x``."""
    if chain.count(x, None) > 0:
        return 1
    return 0 if chain.is_root(x) else -1


def compare_largest_roots(f, g):
    """Exact sign of ``maxroot(f) - maxroot(g)`` for real-rooted rational inputs."""
    cf, cg = SturmChain(f), SturmChain(g)
    lf, hf = _top_interval(cf)
    lg, hg = _top_interval(cg)
    common = poly_gcd(cf.sqfree, cg.sqfree)
    while True:
        if lf == hf:
            return -sign_root_minus(cg, lf)
        if lg == hg:
            return sign_root_minus(cf, lg)
        if hf <= lg:
            return -1
        if hg <= lf:
            return 1
        if common.degree > 0:
            lo, hi = max(lf, lg), min(hf, hg)
            if lo < hi and SturmChain(common).count(lo, hi) > 0:
                return 0
        lf, hf = _halve(cf, lf, hf)
        lg, hg = _halve(cg, lg, hg)


def _halve(chain, lo, hi):
    mid = (lo + hi) / 2
    if chain.is_root(mid) and chain.count(mid, hi) == 0:
        return mid, mid
    if chain.count(mid, hi) >= 1:
        return mid, hi
    return lo, mid


def interleaves(f, g):
    """True iff ``f`` (degree n-1) interleaves ``g`` (degree n): b1 <= a1 <= b2 <= ... <= bn."""
    _require_rational(f)
    _require_rational(g)
    if f.degree != g.degree - 1:
        raise DimensionMismatch("interleaves needs deg f = deg g - 1",
                                deg_f=f.degree, deg_g=g.degree)
    for p in (f, g):
        if p.lc <= 0:
            raise PreconditionError("interleaves needs positive leading coefficients")
        if not is_real_rooted(p):
            raise NotRealRooted("interleaves needs real-rooted inputs", poly=p.to_json())
    if f.degree == 0:
        return True
    both = real_roots(f * g)
    brackets = [(b.lo, b.hi) for b in both]
    alphas, betas = [], []
    for idx, m in enumerate(_multiplicities(f, brackets, own=False)):
        alphas += [idx] * m
    for idx, m in enumerate(_multiplicities(g, brackets, own=False)):
        betas += [idx] * m
    return all(betas[i] <= alphas[i] <= betas[i + 1] for i in range(len(alphas)))


@dataclass(frozen=True)
class ProbeVerdict:
    """Outcome of a convex-mixture real-rootedness probe."""

    ok: bool
    trials: int
    weights: tuple = ()
    mixture: UniPoly | None = None

    def __str__(self):
        if self.ok:
            return f"no-counterexample({self.trials})"
        return f"counterexample(weights={[str(w) for w in self.weights]})"

    def to_json(self):
        out = {"verdict": "no-counterexample" if self.ok else "counterexample", "trials": self.trials}
        if not self.ok:
            out["weights"] = [fmt_scalar(w) for w in self.weights]
            out["mixture"] = self.mixture.to_json()
        return out


def mixture_realrooted_probe(fs, trials=200, seed=0):
    """Sample convex combinations of ``fs`` and Sturm-test each one.

    Vertices and pairwise midpoints are always tried first; ``trials``
    further random weight vectors follow.
    """
    fs = list(fs)
    if not fs:
        raise PreconditionError("mixture probe needs at least one polynomial")
    deg = fs[0].degree
    for f in fs:
        _require_rational(f)
        if f.degree != deg:
            raise DimensionMismatch("mixture probe needs equal degrees")
        if f.lc <= 0:
            raise PreconditionError("mixture probe needs positive leading coefficients")
    m = len(fs)
    rng = random.Random(seed)
    candidates = []
    for i in range(m):
        candidates.append(tuple(Fraction(int(i == j)) for j in range(m)))
    for i in range(m):
        for j in range(i + 1, m):
            candidates.append(tuple(Fraction(1, 2) if k in (i, j) else Fraction(0) for k in range(m)))
    for _ in range(trials):
        raw = [rng.randint(0, 100) for _ in range(m)]
        s = sum(raw)
        if s == 0:
            continue
        candidates.append(tuple(Fraction(r, s) for r in raw))
    for n, w in enumerate(candidates, 1):
        mix = UniPoly([0])
        for wi, f in zip(w, fs):
            if wi:
                mix = mix + f * wi
        if not is_real_rooted(mix):
            return ProbeVerdict(False, n, w, mix)
    return ProbeVerdict(True, len(candidates))


# -- Jacobi polynomials --------------------------------------------------

def _poch(x, n):
    out = Fraction(1)
    for i in range(n):
        out *= x + i
    return out


def _jacobi_series(d, a, b):
    """Hypergeometric form, valid for every parameter value."""
    half = UniPoly([Fraction(-1, 2), Fraction(1, 2)])  # (u - 1) / 2
    out = UniPoly([0])
    power = UniPoly([1])
    for j in range(d + 1):
        c = _poch(d + a + b + 1, j) * _poch(a + j + 1, d - j) / (math.factorial(j) * math.factorial(d - j))
        out = out + power * c
        power = power * half
    return out


def _recurrence_ok(d, a, b):
    return all(n + a + b != 0 and 2 * n + a + b - 2 != 0 for n in range(2, d + 1))


def _jacobi_recurrence(d, a, b):
    p0 = UniPoly([1])
    if d == 0:
        return p0
    p1 = UniPoly([(a + 1) - (a + b + 2) / 2, (a + b + 2) / 2])
    u = UniPoly([0, 1])
    for n in range(2, d + 1):
        s = 2 * n + a + b
        lhs = 2 * n * (n + a + b) * (s - 2)
        mid = (u * (s * (s - 2)) + (a * a - b * b)) * (s - 1)
        p0, p1 = p1, (mid * p1 - p0 * (2 * (n + a - 1) * (n + b - 1) * s)) * Fraction(1, lhs)
    return p1


def jacobi_poly(d, alpha, beta):
    """``P_d^(alpha, beta)`` in the classical variable, exact rational coefficients.

    Uses the three-term recurrence; parameter pairs where a recurrence
    denominator vanishes fall back to the hypergeometric series.
    """
    if d < 0:
        raise PreconditionError("degree must be nonnegative")
    a, b = to_scalar(alpha, RATIONAL), to_scalar(beta, RATIONAL)
    p = _jacobi_recurrence(d, a, b) if _recurrence_ok(d, a, b) else _jacobi_series(d, a, b)
    return p * JACOBI_NORMALIZATION


def jacobi_shifted(d, alpha, beta):
    """``t -> P_d^(alpha, beta)(2t - 1)``."""
    return jacobi_poly(d, alpha, beta).compose_linear(2, -1)


def jacobi_variations(d, alpha, beta, u):
    """Sign changes of ``P_0(u), ..., P_d(u)``: the number of zeros of ``P_d`` above ``u``.

    Valid for ``alpha, beta > -1`` where the recurrence coefficients keep
    the orthogonal-polynomial sign pattern.
    """
    a, b = Fraction(alpha), Fraction(beta)
    u = Fraction(u)
    vals = [Fraction(1)]
    if d >= 1:
        vals.append((a + 1) + (a + b + 2) * (u - 1) / 2)
    for n in range(2, d + 1):
        s = 2 * n + a + b
        nxt = ((s - 1) * (s * (s - 2) * u + a * a - b * b) * vals[-1]
               - 2 * (n + a - 1) * (n + b - 1) * s * vals[-2]) / (2 * n * (n + a + b) * (s - 2))
        vals.append(nxt)
    return SturmChain._changes([(v > 0) - (v < 0) for v in vals])


def jacobi_largest_zero_shifted(d, alpha, beta, tol=DEFAULT_TOL):
    """Bracket of the largest zero of ``P_d^(alpha,beta)(2t - 1)`` for ``alpha, beta > -1``."""
    if not (alpha > -1 and beta > -1):
        raise PreconditionError("recurrence sign chain needs alpha, beta > -1")
    if d < 1:
        raise PreconditionError("degree must be positive")
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        above = jacobi_variations(d, alpha, beta, 2 * mid - 1)
        if above >= 1:
            lo = mid
        else:
            # mid is at or above the largest zero
            hi = mid
    return RootBracket(lo, hi, 1)
