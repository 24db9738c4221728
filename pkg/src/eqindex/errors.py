"""Exception types shared across the toolkit.

The CLI maps ValidationError to exit code 1 and ConsistencyError (a
mathematical identity that must hold failed to hold) to exit code 2.
"""


class EqindexError(Exception):
    pass


class ValidationError(EqindexError):
    """Malformed input: bad problem file, non-symmetric matrix, bad region."""


class DimensionMismatchError(ValidationError):
    """Operands live on different truncations."""


class SplitError(EqindexError):
    """No admissible band gap for a spectral split."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class AlignmentError(EqindexError):
    """Projection distance too large for the aligning isomorphism."""

    def __init__(self, message, margins=None):
        super().__init__(message)
        self.margins = margins


class BoundaryZeroError(EqindexError):
    """Vector field vanishes (or cannot be resolved) on a region boundary."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class DegenerateZeroError(EqindexError):
    """A located zero has (numerically) singular Jacobian."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class OrderCheckFailure(EqindexError):
    """Measured remainder order fell below the required slope."""

    def __init__(self, message, slope=None, table=None):
        super().__init__(message)
        self.slope = slope
        self.table = table


class ConfirmationFailure(EqindexError):
    """An existence statement could not be confirmed numerically."""


class ConsistencyError(EqindexError):
    """Two independent computations of the same integer disagree."""
