"""Scalar backends: exact ``Fraction`` or binary ``float``; never mixed."""

from fractions import Fraction
from numbers import Integral, Rational

from .errors import BackendMismatch

RATIONAL = "rational"
FLOAT = "float"
BACKENDS = (RATIONAL, FLOAT)


def check_backend(backend):
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return backend


def to_scalar(x, backend):
    if backend == RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, bool):
            return Fraction(int(x))
        if isinstance(x, (Integral, Rational)):
            return Fraction(int(x.numerator), int(x.denominator))
        if isinstance(x, str):
            return Fraction(x.strip())
        raise BackendMismatch(f"value {x!r} of type {type(x).__name__} is not exact rational")
    if backend == FLOAT:
        return float(x) if not isinstance(x, str) else float(Fraction(x.strip()))
    raise ValueError(f"unknown backend {backend!r}")


def infer_backend(values):
    return FLOAT if any(isinstance(v, float) for v in values) else RATIONAL


def to_vector(seq, backend=None):
    seq = list(seq)
    if backend is None:
        backend = infer_backend(seq)
    return tuple(to_scalar(v, backend) for v in seq)


def fmt_scalar(x):
    """Render for JSON: rationals as lowest-terms ``"p/q"`` strings, floats via repr."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def fmt_vector(v):
    return [fmt_scalar(c) for c in v]
