"""Exception hierarchy.

Each class maps onto one CLI exit code (see ``hypoindex.cli``).
"""

import numpy as np

__all__ = ["HypoIndexError", "InputError", "DomainError", "PreconditionError",
           "SingularityError", "RangeError", "NumericalError", "IndeterminateError",
           "ConsistencyError", "FitError"]


class HypoIndexError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(HypoIndexError, ValueError):
    """Malformed input: wrong shape, non-finite entries, unparsable file."""

    exit_code = 1


class DomainError(HypoIndexError, ValueError):
    """Input is well-formed but outside the mathematical domain
    (e.g. a matrix that should be Hermitian is not)."""

    exit_code = 2


class PreconditionError(HypoIndexError):
    """A documented precondition of the operation does not hold."""

    exit_code = 2


class SingularityError(PreconditionError):
    """A resolvent ``(I - A)^{-1}``-type inverse does not exist numerically."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class RangeError(HypoIndexError, OverflowError):
    exit_code = 2


class NumericalError(HypoIndexError, np.linalg.LinAlgError):
    exit_code = 4


class IndeterminateError(HypoIndexError):
    """A discrete decision sits within one tolerance decade of its cutoff."""

    exit_code = 3

    def __init__(self, message, audit=None):
        super().__init__(message)
        self.audit = audit or []


class ConsistencyError(HypoIndexError):
    """Independent methods disagree beyond tolerance."""

    exit_code = 4

    def __init__(self, message, audit=None):
        super().__init__(message)
        self.audit = audit or []


class FitError(HypoIndexError):
    exit_code = 3
