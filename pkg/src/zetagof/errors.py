"""Exception hierarchy shared by all modules."""


class ZetaGofError(Exception):
    """Base class for all errors raised by :mod:`zetagof`."""


class DomainError(ZetaGofError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ConvergenceError(ZetaGofError, ArithmeticError):
    """A series or quadrature failed to reach its tolerance within budget."""


class NumericError(ZetaGofError, ArithmeticError):
    """A numerical safeguard tripped (asymmetry, underflow, ...)."""


class DegenerateSample(ZetaGofError, ValueError):
    """The sample carries no information about the shape parameter.

    Raised when every observation equals 1: the likelihood then increases
    without bound as ``s -> inf`` and no finite MLE exists.
    """


class BracketError(ZetaGofError, ValueError):
    """The root of the score equation lies beyond the admissible cap."""
