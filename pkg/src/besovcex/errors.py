"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class DomainError(ParameterError):
    """A point lies outside the domain of the function being evaluated."""


class MonotonicityError(ParameterError):
    """A sequence that must be nonincreasing is not."""


class AlignmentError(ParameterError):
    """A shift vector is not a whole number of grid cells."""


class ResolutionError(ParameterError):
    """The requested scales cannot be represented on the given grid."""
