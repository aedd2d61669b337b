"""Exception and warning types shared by the transform modules.

Errors fall in three families that the command-line front end maps to
exit codes: bad input (2), failed numerical check (3), and file I/O (4).
"""


class IGTError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(IGTError, ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedDimensionError(InvalidArgumentError):
    pass


class GridError(InvalidArgumentError):
    """A grid lacks a structural property the operation relies on."""


class AliasingRiskError(InvalidArgumentError):
    pass


class ResolutionError(InvalidArgumentError):
    pass


class OffsetRangeError(InvalidArgumentError):
    """Too much quadrature weight falls outside the sampled offset range."""


class PreconditionError(InvalidArgumentError):
    pass


class NotInRangeError(InvalidArgumentError):
    pass


class NotAFunkImageError(InvalidArgumentError):
    pass


class DegeneratePointError(InvalidArgumentError):
    pass


class NumericalError(IGTError, ArithmeticError):
    """A numerical procedure failed to meet its own acceptance test."""


class DivergenceError(NumericalError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NoConvergenceError(NumericalError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class FitError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


class FormatError(IGTError, OSError):
    """Malformed or truncated RGRD file."""


class TruncationWarning(UserWarning):
    """Integrand mass at the edge of a truncated domain is not negligible."""


class DivergenceWarning(UserWarning):
    """A quadrature met a singular or non-decaying integrand."""
