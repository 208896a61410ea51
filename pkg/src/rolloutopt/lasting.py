"""Incomplete adaptation: retention that erodes with accumulated inconvenience.

With a lasting effect of size ``epsilon`` the ``i``-th increase of ``x`` is
survived with probability ``p(x) - epsilon * d((i - 1) x)``.  The survival
product is only defined for an integer number of steps, so admissible step
sizes are ``x = A / z``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_nonneg, check_positive, check_step
from .exceptions import DomainError, ParameterError
from .retention import survival_s

Z_MAX = 10_000


@dataclass(frozen=True)
class LinearDecay:
    """d(t) = t."""

    def __call__(self, t):
        return t


@dataclass(frozen=True)
class PowerDecay:
    """d(t) = t**exponent."""

    exponent: float = 1.0

    def __post_init__(self):
        check_positive(self.exponent, "exponent")

    def __call__(self, t):
        return np.asarray(t, dtype=float) ** self.exponent if np.ndim(t) else t**self.exponent


@dataclass(frozen=True)
class LastingEffect:
    epsilon: float = 0.0
    decay: object = LinearDecay()

    def __post_init__(self):
        check_nonneg(self.epsilon, "epsilon")

    def penalty(self, total):
        """Retention lost to inconvenience accumulated so far."""
        return self.epsilon * self.decay(total)


def step_count(A, x):
    """Integer step count ``z`` with ``z * x == A`` up to rounding."""
    A, x = check_step(A, x)
    ratio = A / x
    z = round(ratio)
    if z < 1 or abs(ratio - z) > 1e-9 * z:
        raise DomainError(f"A/x = {ratio!r} is not an integer step count")
    return z


def step_retention(curve, effect, x, i):
    """Probability of surviving the ``i``-th increase, floored at 0."""
    x = check_positive(x, "x")
    i = check_int(i, "i")
    return max(curve.p(x) - effect.penalty((i - 1) * x), 0.0)


def step_retentions(curve, effect, x, z):
    """Vector of ``step_retention`` for i = 1..z."""
    steps = np.arange(z, dtype=float)
    return np.maximum(curve.p(x) - effect.epsilon * effect.decay(steps * x), 0.0)


def survival_s_lasting(curve, effect, A, x):
    """Survival after ``A / x`` increases under a lasting effect.

    With ``epsilon = 0`` this is exactly :func:`survival_s` at the integer
    exponent.  Once a step retention clamps at zero the product is zero.
    """
    z = step_count(A, x)
    if effect.epsilon == 0:
        return survival_s(curve, A, x)
    factors = step_retentions(curve, effect, x, z)
    if np.any(factors == 0):
        return 0.0
    return float(math.exp(np.sum(np.log(factors))))


def half_horizon_bound(curve, effect, A, x):
    """Upper bound on ``survival_s_lasting``: the last ``floor(z/2)`` factors
    each satisfy ``p_i <= p(x) - epsilon * d(A/2)``, the rest are at most 1."""
    z = step_count(A, x)
    base = max(curve.p(x) - effect.penalty(A / 2), 0.0)
    return base ** (z // 2)


def admissible_steps(A, z_max=Z_MAX):
    """Ascending admissible step sizes ``A / z`` for z = z_max..1."""
    A = check_positive(A, "A")
    z_max = check_int(z_max, "z_max")
    return [A / z for z in range(z_max, 0, -1)]


@dataclass(frozen=True)
class MonotonicityWitness:
    x1: float
    x2: float
    s1: float
    s2: float


def non_monotonicity_witness(curve, effect, A, z_max=Z_MAX):
    """Find admissible ``x1 < x2`` with ``s(x1) < s(x2)``, or None.

    Scanning adjacent pairs suffices: a sequence without an adjacent increase
    is non-increasing.  The pair with the largest relative increase wins.
    """
    xs = admissible_steps(A, z_max)
    s = np.array([survival_s_lasting(curve, effect, A, x) for x in xs])
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.where(s[:-1] > 0, s[1:] / s[:-1], np.where(s[1:] > 0, np.inf, 1.0))
    i = int(np.argmax(gain))
    if not gain[i] > 1:
        return None
    return MonotonicityWitness(xs[i], xs[i + 1], float(s[i]), float(s[i + 1]))


def arum_step_retention(arum, effect, x, i):
    """``F(u0 - c(x) - epsilon d((i-1) x))``: the ARUM version of a step retention."""
    x = check_positive(x, "x")
    i = check_int(i, "i")
    return float(arum.stay_probability(x, effect.penalty((i - 1) * x)))
