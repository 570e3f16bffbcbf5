"""Exception types shared by every module.

The CLI maps :class:`DomainError` (and its subclasses) to exit status 2 and
:class:`AccuracyError` to exit status 3.
"""


class FptError(Exception):
    """Base class for all package errors."""


class DomainError(FptError, ValueError):
    """An input lies outside the domain an operation supports."""


class RangeError(DomainError):
    """A result would overflow, or a query falls outside a solved horizon."""


class PoleError(DomainError):
    """Evaluation too close to a pole of the target function."""


class AccuracyError(FptError, ArithmeticError):
    """A numerical procedure could not reach its accuracy contract."""
