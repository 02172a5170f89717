"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array shape or grid mismatch."""


class ConsistencyError(ValueError):
    """A field violates an invariant it claims to satisfy (e.g. realness)."""


class ParityError(ValueError):
    """Samples do not belong to the requested strip function space."""


class ParameterError(ValueError):
    """Invalid numerical parameter (negative time, bad exponents, ...)."""


class RefinementError(RuntimeError):
    """Quadrature did not converge to the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BlowUpError(RuntimeError):
    """Non-finite or runaway state during time stepping."""

    def __init__(self, message, last_good_time=None):
        super().__init__(message)
        self.last_good_time = last_good_time
