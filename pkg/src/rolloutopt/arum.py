"""Additive random utility model (ARUM).

A user with baseline utility ``u0`` who faces an increase ``x`` in
inconvenience pays ``c(x) + Y`` with ``Y ~ F`` and stays iff the remaining
utility is positive, so ``p(x) = F(u0 - c(x))`` for ``x > 0``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._validation import check_positive
from .exceptions import ParameterError


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


# -- noise distributions ------------------------------------------------------


@dataclass(frozen=True)
class NormalNoise:
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        check_positive(self.sd, "sd")

    lower_support = -math.inf

    def cdf(self, y):
        return _out(special.ndtr((np.asarray(y, dtype=float) - self.mean) / self.sd))

    def logcdf(self, y):
        return _out(special.log_ndtr((np.asarray(y, dtype=float) - self.mean) / self.sd))

    def ppf(self, u):
        return _out(self.mean + self.sd * special.ndtri(np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class UniformNoise:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ParameterError(f"uniform noise needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def lower_support(self):
        return float(self.lo)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        return _out(np.clip((y - self.lo) / (self.hi - self.lo), 0.0, 1.0))

    def logcdf(self, y):
        with np.errstate(divide="ignore"):
            return _out(np.log(self.cdf(y)))

    def ppf(self, u):
        return _out(self.lo + (self.hi - self.lo) * np.asarray(u, dtype=float))


@dataclass(frozen=True)
class ExponentialNoise:
    rate: float = 1.0

    def __post_init__(self):
        check_positive(self.rate, "rate")

    lower_support = 0.0

    def cdf(self, y):
        y = np.maximum(np.asarray(y, dtype=float), 0.0)
        return _out(-np.expm1(-self.rate * y))

    def logcdf(self, y):
        with np.errstate(divide="ignore"):
            return _out(np.log(self.cdf(y)))

    def ppf(self, u):
        return _out(-np.log1p(-np.asarray(u, dtype=float)) / self.rate)


@dataclass(frozen=True)
class LogisticNoise:
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        check_positive(self.scale, "scale")

    lower_support = -math.inf

    def cdf(self, y):
        return _out(special.expit((np.asarray(y, dtype=float) - self.loc) / self.scale))

    def logcdf(self, y):
        return _out(special.log_expit((np.asarray(y, dtype=float) - self.loc) / self.scale))

    def ppf(self, u):
        return _out(self.loc + self.scale * special.logit(np.asarray(u, dtype=float)))


# -- deterministic costs ------------------------------------------------------


@dataclass(frozen=True)
class LinearCost:
    slope: float = 1.0

    def __post_init__(self):
        check_positive(self.slope, "slope")

    def __call__(self, x):
        return _out(self.slope * np.asarray(x, dtype=float))

    def inverse(self, v):
        return v / self.slope


@dataclass(frozen=True)
class PowerCost:
    coeff: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        check_positive(self.coeff, "coeff")
        if not self.exponent >= 1:
            raise ParameterError(f"cost exponent must be >= 1, got {self.exponent}")

    def __call__(self, x):
        return _out(self.coeff * np.asarray(x, dtype=float) ** self.exponent)

    def inverse(self, v):
        return (v / self.coeff) ** (1.0 / self.exponent)


@dataclass(frozen=True)
class ArumSpec:
    """Baseline utility, cost function and noise distribution of the ARUM."""

    u0: float
    cost: object = LinearCost()
    noise: object = NormalNoise()

    def __post_init__(self):
        check_positive(self.u0, "u0")

    def threshold(self, x, shift=0.0):
        """Largest noise draw a user tolerates: ``u0 - c(x) - shift``."""
        return self.u0 - self.cost(x) - shift

    def stay_probability(self, x, shift=0.0):
        """``F(u0 - c(x) - shift)``; the ``x = 0`` convention is left to callers."""
        return self.noise.cdf(self.threshold(x, shift))

    @property
    def support_end(self):
        """Smallest x beyond which nobody stays (inf if the noise is unbounded below)."""
        lo = self.noise.lower_support
        if math.isinf(lo):
            return math.inf
        room = self.u0 - lo
        return self.cost.inverse(room) if room > 0 else 0.0
