"""Exception hierarchy shared by all modules.

``DomainError`` subclasses map to CLI exit code 2; everything else that is a
user mistake (bad flags, malformed input) maps to exit code 1.
"""

from __future__ import annotations


class GNFError(Exception):
    """Base class for all library errors."""


class ShapeError(GNFError, ValueError):
    """Dimension or degree mismatch between operands."""


class ScalarFieldError(GNFError, TypeError):
    """Coefficients from different scalar fields were mixed."""


class TruncationError(GNFError, ValueError):
    """Inputs are not known to a high enough degree."""


class NotAUnitError(GNFError, ZeroDivisionError):
    """Series reciprocal requested for a series with zero constant term."""


class DomainError(GNFError, ValueError):
    """Mathematically invalid input for the requested operation."""


class ParameterError(DomainError):
    """A numeric parameter is outside its admissible range."""


class InsufficientDataError(DomainError):
    """Too few usable points for a fit."""


class NotLinearizableError(DomainError):
    """A resonant projection survived in linearize mode.

    ``resonant`` holds the offending homogeneous part (a ``HomogeneousVF``).
    """

    def __init__(self, message: str, resonant=None, degree: int | None = None):
        super().__init__(message)
        self.resonant = resonant
        self.degree = degree


class NotContractingError(DomainError):
    """The field failed the contraction certificate at ``witness``."""

    def __init__(self, message: str, witness=None, value: float | None = None):
        super().__init__(message)
        self.witness = witness
        self.value = value


class BoxExitError(DomainError):
    """A trajectory left the certified box."""


class DivergenceError(DomainError):
    """A flow integral does not converge (data not flat)."""


class ConfigurationError(GNFError, ValueError):
    """Missing configuration needed to bound an integral tail."""


class IllConditionedError(DomainError):
    """Fundamental matrix became too ill-conditioned to invert reliably."""


class ParseError(GNFError, ValueError):
    """Malformed input file, with the location of the problem."""
