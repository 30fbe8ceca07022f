"""Exception types raised across the package."""


class ValidationError(ValueError):
    """An input matrix or value violates a structural invariant."""


class PhysicalityError(ValueError):
    """Channel parameters lie outside the completely positive region."""


class DomainError(ValueError):
    """A function was evaluated outside its mathematical domain."""


class NumericalError(ArithmeticError):
    """A numerical procedure did not reach its target accuracy or diverged."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DegenerateEstimateError(ValueError):
    """An estimator is undefined or its variance vanishes for the given input."""


class DivergentInformation(ArithmeticError):
    """Fisher information is infinite: an impossible outcome has nonzero slope."""
