"""Exception and warning taxonomy.

Two error families matter to callers: validation errors (bad inputs, mapped to
exit code 2 by the CLI) and numeric failures (a computation that could not be
completed, exit code 3). Warnings mark recoverable numeric fallbacks.
"""


class MapBoundError(Exception):
    """Base class for all package errors."""


class ValidationError(MapBoundError, ValueError):
    """Invalid input (geometry, parameters, configuration)."""


class NumericError(MapBoundError, ArithmeticError):
    """A numeric procedure failed to produce a trustworthy result."""


class EmptyMap(ValidationError):
    pass


class DegenerateRect(ValidationError):
    pass


class OverlappingRects(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NegativeSnr(ValidationError):
    pass


class NegativeArgument(ValidationError):
    pass


class NonpositiveJs(ValidationError):
    pass


class NonpositiveSigma(ValidationError):
    pass


class NonpositiveWidth(ValidationError):
    pass


class UnknownParam(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class QuadratureNoConvergence(NumericError):
    pass


class AllMassUnderflow(UserWarning):
    """Every support component carried zero posterior mass at double precision;
    the estimator fell back to the nearest support point."""


class DegenerateDenominator(UserWarning):
    """Every candidate displacement left the bound denominator below the
    numeric floor; the greatest valid candidate value was returned."""
