"""
Exception types raised by the axis service
"""
from typing import Optional


class AxisError(ValueError):
    """Base error for all axis-service failures"""


class InvalidInputError(AxisError):
    """Malformed or inconsistent input (shape, order, degree, tolerance)"""


class ChartDomainError(AxisError):
    """Point lies outside (or too close to the edge of) an affine chart"""

    def __init__(self, chart: int, message: Optional[str] = None):
        self.chart = chart
        super().__init__(message or f"point is outside chart U_{chart}")


class NearSingularError(AxisError):
    """Matrix is numerically singular at the evaluation point"""


class TubeDomainError(AxisError):
    """Point lies outside the tubular neighborhood"""


class ResolutionError(AxisError):
    """A boundary integral did not resolve to an integer"""

    def __init__(self, raw: float, message: Optional[str] = None):
        self.raw = raw
        super().__init__(
            message or f"winding integral {raw:.6f} is not within snap tolerance of an integer; "
            "use a smaller radius or more nodes"
        )


class UnresolvedDegreeError(AxisError):
    """Quadrature degree estimate is too far from an integer"""

    def __init__(self, estimate):
        self.estimate = estimate
        super().__init__(
            f"degree estimate {estimate.raw:.6f} has gap {estimate.gap:.3e} above snap tolerance"
        )


class UnsupportedConfigurationError(AxisError):
    """Input outside what a harness can handle (e.g. degenerate zeros)"""
