"""Exception types raised by the package."""


class RobustMAError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(RobustMAError, ValueError):
    pass


class DegenerateChannelError(RobustMAError, ValueError):
    """Raised when an operation needs a nonzero channel vector."""


class InfeasibleError(RobustMAError, ValueError):
    """Raised when a placement problem has no feasible selection."""


class EnumerationLimitError(RobustMAError, ValueError):
    pass


class ConsistencyError(RobustMAError, ArithmeticError):
    """Internal numerical consistency check failed."""
