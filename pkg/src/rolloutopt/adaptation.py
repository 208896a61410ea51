"""Adaptation time, rollout duration and the average rate of increase.

After each increase of size ``x`` the provider waits ``l(x)`` periods for
staying users to adapt, so a total increase ``A`` takes
``t_A(x) = (A/x - 1) * l(x)``.  When ``l`` is inelastic (``x l'(x) < l(x)``)
``t_A`` is strictly decreasing in ``x`` and can be traded against retention
through the average rate ``A / t_A(x)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_grid, check_positive, check_step
from .exceptions import ParameterError, RangeError, InfiniteRateError

FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class ConstantClock:
    """l(x) = c."""

    c: float = 1.0

    def __post_init__(self):
        check_positive(self.c, "c")

    def __call__(self, x):
        return self.c * np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else float(self.c)

    @property
    def elasticity(self):
        return 0.0


@dataclass(frozen=True)
class PowerClock:
    """l(x) = c * x**a; its elasticity is ``a`` everywhere."""

    c: float = 1.0
    a: float = 0.5

    def __post_init__(self):
        check_positive(self.c, "c")
        if not self.a >= 0:
            raise ParameterError(f"clock exponent a must be >= 0, got {self.a}")

    def __call__(self, x):
        out = self.c * np.asarray(x, dtype=float) ** self.a
        return float(out) if out.ndim == 0 else out

    @property
    def elasticity(self):
        return float(self.a)


def rollout_time(clock, A, x):
    A, x = check_step(A, x)
    if x == A:
        return 0.0
    return (A / x - 1.0) * clock(x)


@dataclass(frozen=True)
class InelasticityReport:
    inelastic: bool
    worst_margin: float  # min over the grid of (l(x) - x l'(x)) / l(x)
    worst_x: float

    def __bool__(self):
        return self.inelastic


def is_inelastic(clock, grid):
    """Check ``x * l'(x) < l(x)`` on ``grid`` with central finite differences."""
    grid = check_grid(grid)
    h = FD_REL_STEP * grid
    deriv = (clock(grid + h) - clock(grid - h)) / (2 * h)
    lval = clock(grid)
    margin = (lval - grid * deriv) / lval
    i = int(np.argmin(margin))
    return InelasticityReport(bool(np.all(margin > 0)), float(margin[i]), float(grid[i]))


def avg_rate(clock, A, x):
    """Average rate of increase ``A / t_A(x)`` for ``0 < x < A``."""
    A, x = check_step(A, x)
    if x == A:
        raise InfiniteRateError("a single-step rollout has an infinite average rate")
    return A / rollout_time(clock, A, x)


def _working_grid(A):
    return A * np.geomspace(1e-6, 1 - 1e-6, 64)


def invert_rate(clock, A, rbar, rtol=1e-12):
    """Step size ``x`` whose rollout has average rate ``rbar``.

    Solved by bisection, which is valid because ``avg_rate(A, .)`` is strictly
    increasing for inelastic clocks.  Elastic clocks are refused.
    """
    A = check_positive(A, "A")
    rbar = check_positive(rbar, "rbar")
    report = is_inelastic(clock, _working_grid(A))
    if not report:
        raise ParameterError(
            f"clock is elastic near x={report.worst_x:.6g}; rate inversion is not monotone"
        )
    lo, hi = A * 1e-15, A
    r_lo = avg_rate(clock, A, lo)
    if rbar <= r_lo:
        raise RangeError(f"rbar={rbar!r} is below the attainable range (> {r_lo:.6g})")
    # hi is the single-step end where the rate diverges
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if avg_rate(clock, A, mid) < rbar:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    x = 0.5 * (lo + hi)
    if not math.isfinite(x):
        raise RangeError(f"rate inversion failed for rbar={rbar!r}")
    return x
