"""Hyperbolicity certificates and the spectral calculus they unlock.

A ``HyperbolicContext`` pairs a homogeneous polynomial ``h`` with a
direction ``e``. Eigenvalues of ``x`` are the roots of ``t -> h(t*e - x)``;
trace, rank, seminorm and cone membership are all read off that
restriction.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import polycore
from ._scalar import FLOAT, RATIONAL, fmt_scalar, fmt_vector, to_scalar
from .errors import (BoundaryUndecided, DimensionMismatch, NotHyperbolic, NotRealRooted,
                     PreconditionError)
from .polycore import MultiPoly, evaluate, restrict_to_line
from .unipoly import (DEFAULT_TOL, UniPoly, float_real_roots, is_real_rooted,
                      real_root_count, real_roots)

DEFAULT_SAMPLES = 200
DEFAULT_BOX = 10
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class HyperbolicContext:
    h: MultiPoly
    e: tuple
    h_at_e: object
    degree: int
    certification: dict = field(compare=False)

    @property
    def nvars(self):
        return self.h.nvars

    @property
    def backend(self):
        return self.h.backend

    def vector(self, x):
        return self.h.vector(x)

    def charpoly(self, x):
        """``t -> h(t*e - x)``; its roots are the eigenvalues of ``x``."""
        x = self.vector(x)
        return restrict_to_line(self.h, tuple(-c for c in x), self.e)

    def to_json(self):
        return {"h": self.h.to_json(), "e": fmt_vector(self.e), "certification": self.certification}

    @classmethod
    def from_json(cls, obj):
        """Rebuild and re-run the recorded certification strategy."""
        h = MultiPoly.from_json(obj["h"])
        e = h.vector(obj["e"])
        cert = obj.get("certification", {})
        strategy = cert.get("strategy", "auto")
        if strategy == "block_product":
            return block_context(cls.from_json(cert["inner"]), cert["k"])
        if strategy == "direct_product":
            return direct_context([cls.from_json(p) for p in cert["parts"]])
        return certify_hyperbolic(h, e, strategy, samples=cert.get("samples", DEFAULT_SAMPLES),
                                  seed=cert.get("seed", 0), box=cert.get("box", DEFAULT_BOX))


# -- structural recognition ------------------------------------------------

def _is_positive_definite(matrix):
    """Exact Sylvester test via leading principal minors (fraction-free elimination)."""
    n = len(matrix)
    a = [[Fraction(v) for v in row] for row in matrix]
    for i in range(n):
        if a[i][i] <= 0:
            return False
        for r in range(i + 1, n):
            f = a[r][i] / a[i][i]
            for c in range(i, n):
                a[r][c] -= f * a[i][c]
    return True


def _matches_scaled(h, ref):
    """Scale ``c`` with ``h == c * ref`` (tolerant on floats), else ``None``."""
    if len(h) != len(ref):
        return None
    exp0, c0 = ref.items()[0]
    c = h.coefficient(exp0) / c0
    if c == 0:
        return None
    if h.backend == RATIONAL:
        return c if h == ref * c else None
    ok = all(abs(h.coefficient(exp) - c * v) <= 1e-12 * abs(c) for exp, v in ref.items())
    return c if ok else None


def _recognize(h, e):
    """Name of the built-in family ``(h, e)`` belongs to, or ``None``."""
    n, d = h.nvars, h.degree
    if len(h) == 1:
        (exp,) = h.terms
        if all(e[i] != 0 for i, a in enumerate(exp) if a):
            return "monomial"
    if len(h) == math.comb(n, d) and all(x > 0 for x in e) \
            and _matches_scaled(h, polycore.elementary_symmetric(n, d, h.backend)) is not None:
        return "elementary_symmetric"
    if d == 2 and n >= 2:
        c = _matches_scaled(h, polycore.lorentz(n, h.backend))
        if c is not None and c > 0 and e[0] ** 2 > sum(x * x for x in e[1:]):
            return "lorentz"
    try:
        size = polycore.sym_dim_to_size(n)
    except DimensionMismatch:
        return None
    if size == d and 1 <= d <= 5:
        if _matches_scaled(h, polycore.symmetric_determinant(d, h.backend)) is not None:
            m = polycore.unflatten_symmetric(e)
            pd = (_is_positive_definite(m) if h.backend == RATIONAL
                  else bool(np.all(np.linalg.eigvalsh(np.array(m, dtype=float)) > 0)))
            if pd:
                return "symmetric_determinant"
    return None


def _sample_lines(h, e, samples, seed, box):
    rng = random.Random(seed)
    for _ in range(samples):
        x = tuple(to_scalar(rng.randint(-box, box), h.backend) for _ in range(h.nvars))
        f = restrict_to_line(h, tuple(-c for c in x), e)
        if not is_real_rooted(f):
            raise NotHyperbolic("sampled line restriction is not real-rooted",
                                witness=fmt_vector(x), seed=seed)


def certify_hyperbolic(h, e, strategy="auto", samples=DEFAULT_SAMPLES, seed=0, box=DEFAULT_BOX):
    """Build a ``HyperbolicContext`` after checking ``h`` against ``e``.

    ``strategy`` is ``"structural"`` (built-in families only), ``"sampled"``
    (Sturm-test ``t -> h(te - x)`` on ``samples`` seeded lattice points in
    ``[-box, box]^n``), or ``"auto"`` (structural, falling back to sampled).
    """
    e = h.vector(e)
    if h.is_zero() or not h.is_homogeneous():
        raise PreconditionError("hyperbolic polynomial must be homogeneous and nonzero")
    h_at_e = evaluate(h, e)
    if h_at_e == 0:
        raise PreconditionError("h(e) = 0", e=fmt_vector(e))
    if strategy not in ("auto", "structural", "sampled"):
        raise ValueError(f"unknown strategy {strategy!r}")
    family = _recognize(h, e) if strategy in ("auto", "structural") else None
    if family is not None:
        cert = {"strategy": "structural", "family": family}
    elif strategy == "structural":
        raise NotHyperbolic("no structural rule recognizes this polynomial and direction")
    else:
        _sample_lines(h, e, samples, seed, box)
        cert = {"strategy": "sampled", "samples": samples, "seed": seed, "box": box}
    return HyperbolicContext(h, e, h_at_e, h.degree, cert)


def block_context(ctx, k):
    """Context of ``h(x^1)...h(x^k)`` in direction ``e ⊕ ... ⊕ e``; hyperbolic whenever ``ctx`` is."""
    g = polycore.block_product(ctx.h, k)
    e = ctx.e * k
    cert = {"strategy": "block_product", "k": k, "inner": ctx.to_json()}
    return HyperbolicContext(g, e, ctx.h_at_e ** k, ctx.degree * k, cert)


def direct_context(ctxs):
    """Context of ``h_1(x^1) h_2(x^2) ...`` in direction ``e_1 ⊕ e_2 ⊕ ...``."""
    g = polycore.direct_product([c.h for c in ctxs])
    e = tuple(x for c in ctxs for x in c.e)
    h_at_e = math.prod(c.h_at_e for c in ctxs)
    cert = {"strategy": "direct_product", "parts": [c.to_json() for c in ctxs]}
    return HyperbolicContext(g, e, h_at_e, sum(c.degree for c in ctxs), cert)


# -- spectra -----------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order (with multiplicity).

    On the rational backend each value carries a ``RootBracket`` of width
    at most ``tol``; ``exact`` is true when every bracket collapsed.
    """

    eigenvalues: tuple
    brackets: tuple | None
    backend: str

    @property
    def exact(self):
        return self.brackets is not None and all(b.exact for b in self.brackets)

    @property
    def max(self):
        return self.eigenvalues[0]

    @property
    def min(self):
        return self.eigenvalues[-1]

    def to_json(self):
        out = {"eigenvalues": [fmt_scalar(v) for v in self.eigenvalues], "backend": self.backend}
        if self.brackets is not None:
            out["exact"] = self.exact
            out["brackets"] = [[str(b.lo), str(b.hi)] for b in self.brackets]
        return out


def _spectrum_of(f, backend, tol):
    if f.degree < 1:
        return Spectrum((), () if backend == RATIONAL else None, backend)
    if backend == FLOAT:
        return Spectrum(tuple(sorted(float_real_roots(f), reverse=True)), None, backend)
    if not is_real_rooted(f):
        raise NotRealRooted("restriction is not real-rooted; certification is wrong", poly=f.to_json())
    vals, brs = [], []
    for b in reversed(real_roots(f, tol)):
        vals += [b.value] * b.multiplicity
        brs += [b] * b.multiplicity
    return Spectrum(tuple(vals), tuple(brs), backend)


def spectrum(ctx, x, tol=DEFAULT_TOL):
    return _spectrum_of(ctx.charpoly(x), ctx.backend, tol)


def trace(ctx, v):
    """``D_v h(e) / h(e)``: the linear coefficient of ``s -> h(e + s*v)`` over the constant one."""
    f = restrict_to_line(ctx.h, ctx.e, ctx.vector(v))
    c1 = f.coeffs[1] if len(f.coeffs) > 1 else to_scalar(0, ctx.backend)
    return c1 / ctx.h_at_e


def _float_degree(f, rel=1e-9):
    scale = max((abs(c) for c in f.coeffs), default=0.0)
    d = f.degree
    while d > 0 and abs(f.coeffs[d]) <= rel * scale:
        d -= 1
    return d


def rank(ctx, v):
    """Degree of ``t -> h(e - t*v)``: the number of nonzero eigenvalues of ``v``."""
    v = ctx.vector(v)
    f = restrict_to_line(ctx.h, ctx.e, tuple(-c for c in v))
    if ctx.backend == FLOAT:
        return _float_degree(f)
    return max(f.degree, 0)


def seminorm(ctx, x, tol=DEFAULT_TOL):
    """``max(lambda_max, -lambda_min)``; exactly zero iff every eigenvalue vanishes."""
    f = ctx.charpoly(x)
    if ctx.backend == RATIONAL and f == UniPoly.monomial(ctx.degree, ctx.h_at_e):
        return Fraction(0)
    s = _spectrum_of(f, ctx.backend, tol)
    return max(s.max, -s.min)


def in_lineality_space(ctx, x):
    if ctx.backend == FLOAT:
        return seminorm(ctx, x) <= BOUNDARY_TOL
    return ctx.charpoly(x) == UniPoly.monomial(ctx.degree, ctx.h_at_e)


def _membership(f, mode, backend):
    if mode not in ("open", "closed"):
        raise ValueError("mode must be 'open' or 'closed'")
    if backend == FLOAT:
        roots = float_real_roots(f)
        if not roots:
            return True
        lam_min = roots[0]
        scale = max(1.0, max(abs(r) for r in roots))
        if abs(lam_min) <= BOUNDARY_TOL * scale:
            raise BoundaryUndecided("smallest eigenvalue within tolerance of zero", lambda_min=lam_min)
        return lam_min > 0
    if f.degree < 1:
        return True
    nonpos = real_root_count(f, None, 0)
    if mode == "open":
        return nonpos == 0
    at_zero = 0
    g = f
    while g.coeffs and g.coeffs[0] == 0:
        g = UniPoly(g.coeffs[1:], g.backend)
        at_zero += 1
    return nonpos - at_zero == 0


def cone_membership(ctx, x, mode="open"):
    """``lambda_min(x) > 0`` (open) or ``>= 0`` (closed), by sign counting at zero."""
    return _membership(ctx.charpoly(x), mode, ctx.backend)


def in_cone(h, e, x, mode="open"):
    """Cone membership for a bare ``(h, e)`` pair assumed hyperbolic."""
    f = restrict_to_line(h, tuple(-c for c in h.vector(x)), h.vector(e))
    return _membership(f, mode, h.backend)


def lambda_max(ctx, x, tol=DEFAULT_TOL):
    return spectrum(ctx, x, tol).max


def lambda_min(ctx, x, tol=DEFAULT_TOL):
    return spectrum(ctx, x, tol).min


def random_cone_point(ctx, rng, spread=4):
    """Seeded interior point: ``e`` plus a small lattice perturbation, retried until inside."""
    for _ in range(1000):
        x = tuple(c * rng.randint(1, spread) + to_scalar(Fraction(rng.randint(-spread, spread), 4 * spread),
                                                         ctx.backend)
                  for c in ctx.e)
        if cone_membership(ctx, x, "open"):
            return x
    raise PreconditionError("could not sample an interior point")


def builtin_context(name, n=None, d=None, backend=RATIONAL):
    """Certified contexts for the built-in families keyed by name."""
    if name == "product":
        h = polycore.coordinate_product(n, backend)
        e = polycore.ones(n, backend)
    elif name == "elementary":
        h = polycore.elementary_symmetric(n, d, backend)
        e = polycore.ones(n, backend)
    elif name == "determinant":
        h = polycore.symmetric_determinant(d, backend)
        e = polycore.identity_flat(d, backend)
    elif name == "lorentz":
        h = polycore.lorentz(n, backend)
        e = polycore.unit(n, 0, backend)
    else:
        raise ValueError(f"unknown family {name!r}")
    return certify_hyperbolic(h, e, "structural")

