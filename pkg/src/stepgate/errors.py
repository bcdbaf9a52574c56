"""Exception types shared across the package.

Computational degeneracies get their own classes so callers can tell a
perfect fit (DegenerateFitError) from a collapsed scale estimate
(DegenerateScaleError) from plain bad input.
"""


class StepgateError(Exception):
    """Base class for all package errors."""


class InvalidInputError(StepgateError, ValueError):
    """Non-finite values, bad counts, or arguments outside the contract."""


class DomainError(StepgateError, ValueError):
    """Probability or parameter outside its mathematical domain."""


class DimensionError(StepgateError, ValueError):
    """Mismatched array shapes."""


class DegenerateFitError(StepgateError):
    """A fit left nothing to explain (zero residual sum, zero curvature)."""


class DegenerateWeightsError(StepgateError):
    """All weights zero: the weighted problem has no information."""


class DegenerateScaleError(StepgateError):
    """A scale estimate collapsed to zero (e.g. MAD of near-constant residuals)."""


class DegenerateColumnError(StepgateError):
    """A column with zero spread cannot be standardized."""


class ConvergenceError(StepgateError):
    """Iteration limit hit before the convergence criterion was met.

    Carries the last iterate so callers can inspect how close it got.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SchemaError(StepgateError):
    """CSV/manifest structure does not match expectations."""


class ParseError(StepgateError):
    """A cell failed to parse; carries row/column location in the message."""
