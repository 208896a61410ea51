"""Input validation helpers shared across modules."""

import math

import numpy as np
from sklearn.utils.validation import column_or_1d

from .exceptions import DomainError, ParameterError


def check_positive(value, name):
    value = float(value)
    if not (value > 0) or math.isnan(value):
        raise ParameterError(f"{name} must be > 0, got {value!r}")
    return value


def check_nonneg(value, name):
    value = float(value)
    if not (value >= 0):
        raise ParameterError(f"{name} must be >= 0, got {value!r}")
    return value


def check_delta(delta):
    delta = float(delta)
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"discount factor delta must lie in (0, 1), got {delta!r}")
    return delta


def check_step(A, x, *, allow_equal=True):
    """Validate 0 < x <= A (or x < A) for step-size arguments."""
    A = float(A)
    x = float(x)
    if not A > 0:
        raise DomainError(f"total increase A must be > 0, got {A!r}")
    if not x > 0:
        raise DomainError(f"step size x must be > 0, got {x!r}")
    if x > A or (not allow_equal and x == A):
        bound = "<=" if allow_equal else "<"
        raise DomainError(f"step size x must be {bound} A={A!r}, got {x!r}")
    return A, x


def check_grid(grid, name="grid", *, min_size=1):
    """Return ``grid`` as a float array of strictly ascending positive reals."""
    try:
        arr = column_or_1d(np.asarray(grid, dtype=float))
    except ValueError as exc:
        raise ParameterError(f"{name} must be one-dimensional") from exc
    if arr.size < min_size:
        raise ParameterError(f"{name} needs at least {min_size} point(s), got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    if np.any(arr <= 0):
        raise ParameterError(f"{name} must contain positive values only")
    if np.any(np.diff(arr) <= 0):
        raise ParameterError(f"{name} must be strictly ascending")
    return arr


def check_int(value, name, *, minimum=1):
    if isinstance(value, bool) or int(value) != value:
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return value
