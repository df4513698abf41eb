"""Exception hierarchy shared by all hyperlace modules."""


class HyperlaceError(Exception):
    """Base class; ``details`` is a JSON-friendly dict attached to CLI error reports."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DimensionMismatch(HyperlaceError, ValueError):
    pass


class BackendMismatch(HyperlaceError, TypeError):
    pass


class CapExceeded(HyperlaceError):
    pass


class NotRealRooted(HyperlaceError):
    pass


class NotHyperbolic(HyperlaceError):
    """Certification failed; ``details['witness']`` holds the offending point when sampled."""


class PreconditionError(HyperlaceError, ValueError):
    pass


class BoundaryUndecided(HyperlaceError):
    """Float query landed within tolerance of a cone boundary."""


class MalformedPartition(HyperlaceError, ValueError):
    pass


class BudgetExceeded(HyperlaceError):
    pass


class ExchangeAxiomError(HyperlaceError):
    pass


class InfeasibleParameters(HyperlaceError, ValueError):
    pass
