"""Approximate two-kink collision solutions for the phi^6 wave equation."""

from .errors import (
    AlgebraError,
    InterpolationError,
    InvalidArgument,
    NumericFailure,
    TruncationError,
    UndefinedValuation,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "InterpolationError",
    "InvalidArgument",
    "NumericFailure",
    "TruncationError",
    "UndefinedValuation",
]
