"""Retention curves p(x) and the survival function of a stepped rollout.

``p(x)`` is the probability that a user keeps using the service after the
inconvenience is raised by ``x``.  Every curve satisfies ``p(0) = 1`` and is
non-increasing; the limit at ``0+`` may be below one (a jump at zero).

Curves are evaluated through their logarithm ``g = log p`` so that very
small retention values do not underflow before they are combined.
"""

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from ._numerics import golden_section_max
from ._validation import check_grid, check_positive, check_step
from .arum import ArumSpec
from .exceptions import ClassificationError, DomainError, ParameterError

_SNAP_RTOL = 4 * np.finfo(float).eps


class RetentionCurve(ABC):
    """Base class of all retention curves.

    Subclasses implement :meth:`_log_p_pos`, the log-retention for strictly
    positive arguments.
    """

    domain_max = math.inf

    @abstractmethod
    def _log_p_pos(self, x):
        """log p(x) for an array of x > 0 (may contain -inf)."""

    @property
    @abstractmethod
    def jump_at_zero(self):
        """lim_{x -> 0+} p(x)."""

    @property
    def support_end(self):
        """Smallest x with p(x) = 0, or inf."""
        return math.inf

    def _checked(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0):
            raise DomainError(f"retention is defined for x >= 0 only, got {x!r}")
        if np.any(arr > self.domain_max):
            raise DomainError(f"x exceeds domain_max={self.domain_max!r}: {x!r}")
        return arr

    def log_p(self, x):
        """log p(x); 0 at x = 0 and -inf where p(x) = 0."""
        arr = self._checked(x)
        out = np.zeros_like(arr)
        pos = arr > 0
        if np.any(pos):
            out[pos] = self._log_p_pos(arr[pos])
        return float(out) if out.ndim == 0 else out

    def p(self, x):
        arr = self._checked(x)
        out = np.ones_like(arr)
        pos = arr > 0
        if np.any(pos):
            out[pos] = np.exp(self._log_p_pos(arr[pos]))
        return float(out) if out.ndim == 0 else out

    __call__ = p


@dataclass(frozen=True)
class ExpPower(RetentionCurve):
    """p(x) = exp(-x**k)."""

    k: float = 2.0

    def __post_init__(self):
        check_positive(self.k, "k")

    def _log_p_pos(self, x):
        return -(x**self.k)

    @property
    def jump_at_zero(self):
        return 1.0


@dataclass(frozen=True)
class PolyCap(RetentionCurve):
    """p(x) = 1 - x**k on [0, 1) and 0 beyond."""

    k: float = 2.0

    def __post_init__(self):
        check_positive(self.k, "k")

    def _log_p_pos(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x < 1.0, np.log1p(-np.minimum(x, 1.0) ** self.k), -np.inf)

    @property
    def jump_at_zero(self):
        return 1.0

    @property
    def support_end(self):
        return 1.0


@dataclass(frozen=True)
class InversePower(RetentionCurve):
    """p(x) = (1 + x)**(-k); log-convex for every k > 0."""

    k: float = 1.0

    def __post_init__(self):
        check_positive(self.k, "k")

    def _log_p_pos(self, x):
        return -self.k * np.log1p(x)

    @property
    def jump_at_zero(self):
        return 1.0


@dataclass(frozen=True)
class ScaledExpPower(RetentionCurve):
    """p(x) = scale * exp(-x**k) for x > 0, which jumps from 1 to ``scale`` at zero."""

    scale: float = 0.5
    k: float = 2.0

    def __post_init__(self):
        if not 0 < self.scale <= 1:
            raise ParameterError(f"scale must lie in (0, 1], got {self.scale!r}")
        check_positive(self.k, "k")

    def _log_p_pos(self, x):
        return math.log(self.scale) - x**self.k

    @property
    def jump_at_zero(self):
        return float(self.scale)


@dataclass(frozen=True)
class ArumDerived(RetentionCurve):
    """p(x) = F(u0 - c(x)) for x > 0, generated by an :class:`ArumSpec`."""

    arum: ArumSpec

    def _log_p_pos(self, x):
        return np.asarray(self.arum.noise.logcdf(self.arum.threshold(x)), dtype=float)

    @property
    def jump_at_zero(self):
        return float(self.arum.stay_probability(0.0))

    @property
    def support_end(self):
        return self.arum.support_end


@dataclass(frozen=True)
class Tabulated(RetentionCurve):
    """Piecewise-linear curve through sampled points.

    ``xs`` must start at 0 and ascend strictly; ``ps`` must be non-increasing
    in [0, 1].  ``ps[0]`` is the limit at ``0+`` (``p(0)`` itself is always
    one).  Evaluation beyond the last sample is a domain error.
    """

    xs: tuple
    ps: tuple
    _x: np.ndarray = field(init=False, repr=False, compare=False)
    _p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ps = np.asarray(self.ps, dtype=float)
        if xs.ndim != 1 or xs.shape != ps.shape or xs.size < 2:
            raise ParameterError("tabulated curve needs matching 1-d xs/ps with >= 2 points")
        if xs[0] != 0.0:
            raise ParameterError("tabulated xs must start at 0")
        if np.any(np.diff(xs) <= 0):
            raise ParameterError("tabulated xs must be strictly ascending")
        if np.any(ps < 0) or np.any(ps > 1):
            raise ParameterError("tabulated ps must lie in [0, 1]")
        if np.any(np.diff(ps) > 0):
            raise ParameterError("tabulated ps must be non-increasing")
        object.__setattr__(self, "xs", tuple(xs.tolist()))
        object.__setattr__(self, "ps", tuple(ps.tolist()))
        object.__setattr__(self, "_x", xs)
        object.__setattr__(self, "_p", ps)

    @property
    def domain_max(self):
        return float(self._x[-1])

    def _log_p_pos(self, x):
        with np.errstate(divide="ignore"):
            return np.log(np.interp(x, self._x, self._p))

    @property
    def jump_at_zero(self):
        return float(self._p[0])

    @property
    def support_end(self):
        zero = np.flatnonzero(self._p == 0)
        return float(self._x[zero[0]]) if zero.size else math.inf


# -- survival -----------------------------------------------------------------


def _steps_exponent(A, x):
    ratio = A / x
    z = round(ratio)
    if z >= 1 and math.isclose(ratio, z, rel_tol=_SNAP_RTOL):
        return float(z)
    return ratio


def survival_s(curve, A, x):
    """Fraction of users left after raising inconvenience by ``A`` in steps of ``x``.

    Equals ``p(x) ** (A / x)``.  The exponent is real-valued, so the function
    is defined on all of ``(0, A]``, not only at ``A / i``.
    """
    A, x = check_step(A, x)
    g = curve.log_p(x)
    if g == -math.inf:
        return 0.0
    return math.exp(_steps_exponent(A, x) * g)


# -- curvature ----------------------------------------------------------------


class CurvatureClass(str, enum.Enum):
    LOG_CONCAVE = "LogConcave"
    LOG_CONVEX = "LogConvex"
    NEITHER = "Neither"
    DISCONTINUOUS_LOG_CONCAVE_TAIL = "DiscontinuousLogConcaveTail"


@dataclass(frozen=True)
class Curvature:
    """Outcome of :func:`classify_curvature`.

    ``max_second_diff``/``min_second_diff`` are the extreme normalized second
    differences of ``log p`` on the grid (slope changes divided by the larger
    adjacent slope magnitude); ``evidence`` is whichever one decided the class.
    """

    kind: CurvatureClass
    evidence: float
    max_second_diff: float
    min_second_diff: float
    worst_x: float
    jump_at_zero: float


def default_grid(curve, n=256, lo=1e-4, hi=10.0):
    """Log-spaced grid on (lo, min(domain_max, hi)] staying inside p > 0."""
    upper = min(curve.domain_max, hi)
    end = curve.support_end
    if end <= upper:
        upper = end * (1 - 1e-3)
    if not upper > lo:
        raise ParameterError(f"curve support too small for a grid starting at {lo}")
    return np.geomspace(lo, upper, n)


def _normalized_second_differences(grid, g):
    slopes = np.diff(g) / np.diff(grid)
    change = np.diff(slopes)
    scale = np.maximum(np.abs(slopes[:-1]), np.abs(slopes[1:]))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0, change / scale, 0.0)
    return rel


def classify_curvature(curve, grid=None, tol=1e-9):
    """Classify ``log p`` as concave, convex or neither on ``grid``.

    Concavity is tested first, so linear ``log p`` counts as log-concave.  A
    concave tail with ``jump_at_zero < 1`` is reported separately because
    ``p`` is then not log-concave on ``[0, inf)``.
    """
    grid = default_grid(curve) if grid is None else check_grid(grid, min_size=5)
    g = curve.log_p(grid)
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        pt = float(grid[bad[0]])
        raise ClassificationError(f"p(x) = 0 at grid point x={pt!r}", point=pt)
    rel = _normalized_second_differences(grid, g)
    hi_i, lo_i = int(np.argmax(rel)), int(np.argmin(rel))
    hi, lo = float(rel[hi_i]), float(rel[lo_i])
    jump = curve.jump_at_zero
    continuous = jump >= 1.0 - 1e-12
    if hi <= tol:
        kind = (
            CurvatureClass.LOG_CONCAVE
            if continuous
            else CurvatureClass.DISCONTINUOUS_LOG_CONCAVE_TAIL
        )
        evidence, worst = hi, grid[hi_i + 1]
    elif lo >= -tol:
        kind, evidence, worst = CurvatureClass.LOG_CONVEX, lo, grid[lo_i + 1]
    else:
        kind, evidence, worst = CurvatureClass.NEITHER, hi, grid[hi_i + 1]
    return Curvature(kind, evidence, hi, lo, float(worst), jump)


# -- jump at zero ----------------------------------------------------------------


def tangent_point(curve, grid=None, rtol=1e-6):
    """Step size where ``s_A`` peaks for a log-concave tail with a jump at zero.

    ``s_A`` rises on ``(0, xbar]`` and falls afterwards for every ``A``.  The
    peak is the maximizer of ``log p(x) / x``: the point where a ray from
    the origin touches ``log p``.  Returns ``inf`` (or ``domain_max`` when
    finite) if the ray never touches, i.e. ``s_A`` increases throughout.
    """
    cls = classify_curvature(curve, grid)
    if cls.kind is not CurvatureClass.DISCONTINUOUS_LOG_CONCAVE_TAIL:
        raise ClassificationError(
            f"tangent point needs a discontinuous log-concave tail, curve is {cls.kind.value}"
        )
    upper = min(curve.domain_max, 1e4)
    if curve.support_end <= upper:
        upper = curve.support_end * (1 - 1e-9)
    scan = np.geomspace(1e-8, upper, 4001)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = curve.log_p(scan) / scan
    i = int(np.nanargmax(h))
    if i == scan.size - 1:
        return float(curve.domain_max) if upper == curve.domain_max else math.inf
    a = scan[max(i - 1, 0)]
    b = scan[i + 1]
    xbar, _ = golden_section_max(lambda t: curve.log_p(t) / t, a, b, rtol=rtol)
    return float(xbar)


# -- Jensen product bounds -------------------------------------------------------------


@dataclass(frozen=True)
class ProductBound:
    """p(sum of increments) versus the product of p over the increments."""

    joint: float
    product: float
    relation: str  # "<=", ">=" or "=="

    @property
    def holds_le(self):
        return self.relation in ("<=", "==")

    @property
    def holds_ge(self):
        return self.relation in (">=", "==")


def product_bound_check(curve, increments, rtol=1e-12):
    inc = np.asarray(increments, dtype=float).reshape(-1)
    if np.any(inc < 0):
        raise DomainError("increments must be non-negative")
    total = float(inc.sum())
    g_joint = curve.log_p(total)
    g_prod = float(np.sum(curve.log_p(inc))) if inc.size else 0.0
    if g_joint == g_prod or (
        math.isfinite(g_joint)
        and math.isfinite(g_prod)
        and abs(g_joint - g_prod) <= rtol * max(1.0, abs(g_prod))
    ):
        relation = "=="
    else:
        relation = "<=" if g_joint < g_prod else ">="
    return ProductBound(math.exp(g_joint), math.exp(g_prod), relation)
