"""Exception and warning types raised by rolloutopt."""


class RolloutError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RolloutError, ValueError):
    """An argument lies outside the domain of the function."""


class RangeError(DomainError):
    """A requested value is not attainable by the function being inverted."""


class ParameterError(RolloutError, ValueError):
    """A model parameter or configuration value is invalid."""


class ClassificationError(RolloutError):
    """A curve does not belong to the curvature class an operation requires,
    or cannot be classified at all (e.g. p(x) = 0 on the test grid)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InfiniteRateError(RolloutError, ZeroDivisionError):
    """The average rate of increase is infinite (single-step rollout)."""


class CapReachedWarning(UserWarning):
    """A step-count search hit its cap before the stopping condition held."""
