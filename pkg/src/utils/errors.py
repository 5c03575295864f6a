# src/utils/errors.py
# Exception hierarchy shared by all nwidth modules


class NWidthError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(NWidthError, ValueError):
    """Invalid parameters, empty inputs or inconsistent arguments."""


class DimensionMismatchError(ValidationError):
    """Points do not share an ambient dimension, or violate a domain
    requirement such as unit norm for zonal kernels."""


class PointsFormatError(ValidationError):
    """A point file could not be parsed.

    Args:
        message: Description of the problem
        line: 1-based line number in the file, if known
    """
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(NWidthError, ArithmeticError):
    """Non-finite values or a failed factorization / eigensolver call."""


class DegenerateFitError(NumericalError):
    """A log-log fit has fewer than two usable points or no spread in x."""
