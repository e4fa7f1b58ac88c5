"""Exception types raised across the package."""


class ParameterCountError(ValueError):
    """Parameter vector length does not match the circuit."""


class ShotCountError(ValueError):
    """Shot count is not a positive integer."""


class SingularShiftError(ValueError):
    """Shift is a multiple of pi, so the shift rule denominator vanishes."""


class UnsupportedShiftError(ValueError):
    """Requested (order, shift) or (scheme, order) combination is not defined."""


class UndefinedOptimumError(ValueError):
    """Closed-form optimum requires a non-zero curvature input."""


class NonPositiveSpectrumError(ValueError):
    """Max-eigenvalue regularisation applied to a matrix with no positive eigenvalue."""


class SingularMatrixError(ValueError):
    """Curvature matrix could not be inverted after regularisation."""
