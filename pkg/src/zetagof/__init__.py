"""Goodness-of-fit tests for the Zeta distribution based on a Stein operator."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateSample,
    DomainError,
    NumericError,
    ZetaGofError,
)

__all__ = [
    "__version__",
    "BACKEND",
    "BracketError",
    "ConvergenceError",
    "DegenerateSample",
    "DomainError",
    "NumericError",
    "ZetaGofError",
]
