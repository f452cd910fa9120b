"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PrecisionError(ValueError):
    """Too little (or degenerate) data for a meaningful statistical estimate."""


class PointOnPathError(ArithmeticError):
    """The winding point sits on the discretized path even after refinement."""


class NumericalError(ArithmeticError):
    """A quadrature failed to reach its requested accuracy."""
