"""Exact hyperbolic-polynomial toolkit for partitioning vectors with small largest eigenvalues."""

__version__ = "0.1.0"

from .errors import (BackendMismatch, BoundaryUndecided, BudgetExceeded, CapExceeded, DimensionMismatch,
                     ExchangeAxiomError, HyperlaceError, InfeasibleParameters, MalformedPartition,
                     NotHyperbolic, NotRealRooted, PreconditionError)
from .hyperb import HyperbolicContext, builtin_context, certify_hyperbolic, spectrum
from .polycore import MultiPoly
from .surd import QuadSurd
from .unipoly import UniPoly

__all__ = [
    "__version__", "MultiPoly", "UniPoly", "QuadSurd", "HyperbolicContext", "builtin_context",
    "certify_hyperbolic", "spectrum", "HyperlaceError", "DimensionMismatch", "BackendMismatch",
    "CapExceeded", "NotRealRooted", "NotHyperbolic", "PreconditionError", "BoundaryUndecided",
    "MalformedPartition", "BudgetExceeded", "ExchangeAxiomError", "InfeasibleParameters",
]
