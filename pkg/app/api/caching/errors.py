"""
Exception hierarchy for the caching library.

Audit failures are never raised; they are recorded as report checks.
"""


class PrivCacheError(Exception):
    """Base class for every error raised by api.caching."""


class ParameterError(PrivCacheError, ValueError):
    """Bad or inconsistent parameters."""


class ShapeError(ParameterError):
    """A file library is not split the way a scheme needs it."""


class GranularityError(ParameterError):
    """A memory-sharing fraction cannot be realised at subfile granularity."""

    def __init__(self, message, required_multiple=None):
        super().__init__(message)
        self.required_multiple = required_multiple


class DomainError(PrivCacheError, ValueError):
    """Argument outside the domain of an operation."""


class FieldArithmeticError(PrivCacheError, ArithmeticError):
    """Inverse or division by zero in GF(2^m)."""


class InsufficientDataError(PrivCacheError):
    """Fewer coded segments than the code dimension."""


class DecodeIntegrityError(PrivCacheError):
    """A decoded payload does not match the stored file."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConsistencyError(PrivCacheError):
    """A value that must lie in a span does not. Signals a bug."""


class InfeasibleAuditError(PrivCacheError):
    """An exact audit would enumerate more states than allowed."""

    def __init__(self, message, states=None, ceiling=None, hint=""):
        super().__init__(message)
        self.states = states
        self.ceiling = ceiling
        self.hint = hint
