"""Discounted revenue of equal-step rollouts and its maximization.

A provider raising inconvenience ``z`` times by ``x`` earns::

    Pi(x, z) = sum_{i=1}^{z-1} delta^(i-1) p(x)^i r(i x)
               + delta^(z-1) / (1 - delta) * p(x)^z r(z x)

For log-concave ``r`` the best ``z`` for a fixed ``x`` is the first ``z``
with ``r(z x) / r((z+1) x) >= p(x)``, which turns the search into a sweep
over ``x``.  For log-convex ``p`` a single step is optimal.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ._numerics import golden_section_max
from ._validation import check_delta, check_grid, check_int, check_positive
from .exceptions import CapReachedWarning, ClassificationError, ParameterError, RolloutError
from .lasting import LastingEffect
from .retention import CurvatureClass, classify_curvature

Z_MAX = 10_000


# -- revenue per user --------------------------------------------------------------


@dataclass(frozen=True)
class IdentityRevenue:
    """r(x) = x (a subscription fee)."""

    def __call__(self, x):
        return x


@dataclass(frozen=True)
class PowerRevenue:
    """r(x) = x**a."""

    a: float = 1.0

    def __post_init__(self):
        check_positive(self.a, "a")

    def __call__(self, x):
        return np.power(x, self.a)


@dataclass(frozen=True)
class AffineRevenue:
    """r(x) = intercept + slope * x."""

    intercept: float = 0.0
    slope: float = 1.0

    def __post_init__(self):
        if not self.intercept >= 0:
            raise ParameterError(f"intercept must be >= 0, got {self.intercept}")
        check_positive(self.slope, "slope")

    def __call__(self, x):
        return self.intercept + self.slope * x


@dataclass(frozen=True)
class LogShiftedRevenue:
    """r(x) = log(1 + x)."""

    def __call__(self, x):
        return np.log1p(x)


@dataclass(frozen=True)
class RevenueModel:
    """Per-user revenue ``r`` and discount factor ``delta``.

    Only log-concave, non-decreasing revenue families are offered, which is
    what the step-count reduction in :func:`z_star` relies on.
    """

    r: object = IdentityRevenue()
    delta: float = 0.9

    def __post_init__(self):
        check_delta(self.delta)

    def is_log_concave(self, grid, tol=1e-9):
        grid = check_grid(grid, min_size=3)
        g = np.log(np.asarray(self.r(grid), dtype=float))
        slopes = np.diff(g) / np.diff(grid)
        change = np.diff(slopes)
        scale = np.maximum(np.abs(slopes[:-1]), np.abs(slopes[1:]))
        return bool(np.all(change <= tol * np.maximum(scale, 1e-300)))


# -- schedules and results -----------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    """``z`` equal increases of size ``x``; ``A = x * z`` is the total."""

    x: float
    z: int
    A: float = field(init=False)

    def __post_init__(self):
        check_positive(self.x, "x")
        object.__setattr__(self, "z", check_int(self.z, "z"))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "A", self.x * self.z)


@dataclass(frozen=True)
class TraceRow:
    x: float
    z_star: int
    A: float
    pi: float
    capped: bool = False


@dataclass
class OptimizationResult:
    best: Schedule
    value: float
    sweep_trace: list
    one_step_shortcut_used: bool = False

    @property
    def n_capped(self):
        return sum(row.capped for row in self.sweep_trace)

    @property
    def best_capped(self):
        return any(row.capped and row.x == self.best.x for row in self.sweep_trace)


# -- objective -----------------------------------------------------------------------


def revenue_pi(curve, rev, sched):
    """Discounted infinite-horizon revenue of ``sched``."""
    check_delta(rev.delta)
    x, z, delta = sched.x, sched.z, rev.delta
    p = curve.p(x)
    if p == 0:
        return 0.0
    i = np.arange(1, z, dtype=float)
    head = np.sum(delta ** (i - 1) * p**i * rev.r(x * i)) if z > 1 else 0.0
    tail = delta ** (z - 1) / (1 - delta) * p**z * rev.r(x * z)
    return float(head + tail)


def _first_true(cond_fn, z_max):
    """Smallest z in [1, z_max] with cond_fn(z) true, scanning in doubling blocks."""
    start, block = 1, 64
    while start <= z_max:
        stop = min(start + block, z_max + 1)
        z = np.arange(start, stop, dtype=float)
        hit = np.flatnonzero(cond_fn(z))
        if hit.size:
            return int(z[hit[0]]), False
        start, block = stop, block * 2
    return z_max, True


def _z_star(curve, rev, x, z_max, effect=None):
    p = curve.p(x)
    if effect is None or effect.epsilon == 0:
        def cond(z):
            return rev.r(x * z) >= p * rev.r(x * (z + 1))
    else:
        def cond(z):
            nxt = rev.r(x * (z + 1))
            return rev.r(x * z) + effect.penalty(z * x) * nxt >= p * nxt
    return _first_true(cond, z_max)


def _warn_cap(x, z_max):
    warnings.warn(
        f"step count search hit z_max={z_max} at x={x!r}", CapReachedWarning, stacklevel=3
    )


def z_star(curve, rev, x, z_max=Z_MAX):
    """Revenue-maximizing number of increases of size ``x``.

    Returns ``z_max`` and emits :class:`CapReachedWarning` if the stopping
    condition does not hold below the cap.
    """
    x = check_positive(x, "x")
    z_max = check_int(z_max, "z_max")
    z, capped = _z_star(curve, rev, x, z_max)
    if capped:
        _warn_cap(x, z_max)
    return z


def z_star_lasting(curve, rev, effect, x, z_max=Z_MAX):
    """Step count under a lasting effect; equal to :func:`z_star` at epsilon 0."""
    x = check_positive(x, "x")
    z_max = check_int(z_max, "z_max")
    z, capped = _z_star(curve, rev, x, z_max, effect or LastingEffect())
    if capped:
        _warn_cap(x, z_max)
    return z


# -- one step (log-convex retention) -----------------------------------------------------


def _one_step_value(curve, rev, x):
    return curve.p(x) * rev.r(x) / (1 - rev.delta)


def dominance_audit(curve, rev, value, x_min, x_max, n_probes=200, z_hi=50, seed=0):
    """Largest ``Pi(x, z) / value`` over random probes with ``x_min <= x`` and
    ``x z <= x_max``.

    Every partial total ``x z'`` (z' <= z) is then a single step the grid can
    reach, so one-step dominance holds when the result is at most ``1 + 1e-9``.
    """
    rng = np.random.default_rng(seed)
    z_hi = max(1, min(z_hi, int(x_max // x_min)))
    zs = rng.integers(1, z_hi + 1, size=n_probes)
    us = rng.uniform(0.0, 1.0, size=n_probes)
    worst = -math.inf
    for z, u in zip(zs, us):
        x = x_min + u * (x_max / z - x_min)
        worst = max(worst, revenue_pi(curve, rev, Schedule(x, int(z))) / value)
    return worst


def optimize_one_step(curve, rev, x_grid, audit=True, seed=0):
    """Best single increase for a log-convex retention curve.

    Maximizes ``p(x) r(x)`` on the grid, refines inside the bracketing cells
    by golden-section search, and (by default) audits the answer against
    random multi-step schedules reachable within the grid.
    Returns ``(x_star, value)``.
    """
    x_grid = check_grid(x_grid, "x_grid")
    cls = classify_curvature(curve)
    if cls.kind is not CurvatureClass.LOG_CONVEX:
        raise ClassificationError(f"one-step shortcut needs a log-convex curve, got {cls.kind.value}")
    check_delta(rev.delta)
    obj = curve.p(x_grid) * rev.r(x_grid)
    i = int(np.argmax(obj))
    lo = x_grid[max(i - 1, 0)]
    hi = x_grid[min(i + 1, x_grid.size - 1)]
    if hi > lo:
        x_star, _ = golden_section_max(lambda t: curve.p(t) * rev.r(t), lo, hi, rtol=1e-6)
        if curve.p(x_star) * rev.r(x_star) < obj[i]:
            x_star = float(x_grid[i])
    else:
        x_star = float(x_grid[i])
    value = float(_one_step_value(curve, rev, x_star))
    if audit:
        worst = dominance_audit(curve, rev, value, float(x_grid[0]), float(x_grid[-1]), seed=seed)
        if worst > 1 + 1e-9:
            raise RolloutError(f"one-step dominance audit failed: ratio {worst!r}")
    return float(x_star), value


# -- sweep --------------------------------------------------------------------------------


def default_sweep_grid(curve, step=0.001, p_floor=1e-6, x_cap=100.0):
    """Grid ``step, 2 step, ...`` up to the first x with ``p(x) < p_floor``.

    The upper end is also limited by ``domain_max`` and ``x_cap``.
    """
    step = check_positive(step, "step")
    upper = min(curve.domain_max, x_cap)
    if curve.p(upper) < p_floor:
        lo, hi = 0.0, upper
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if curve.p(mid) < p_floor:
                hi = mid
            else:
                lo = mid
        upper = hi
    n = int(math.floor(upper / step + 1e-9))
    if n < 1:
        raise ParameterError(f"grid step {step} exceeds the usable range {upper}")
    return step * np.arange(1, n + 1)


def _sweep_rows(curve, rev, xs, z_max):
    rows = []
    for x in xs:
        x = float(x)
        z, capped = _z_star(curve, rev, x, z_max)
        pi = revenue_pi(curve, rev, Schedule(x, z))
        rows.append(TraceRow(x, z, x * z, pi, capped))
    return rows


def optimize_sweep(curve, rev, x_grid, z_max=Z_MAX, n_jobs=1):
    """Evaluate ``Pi(x, z*(x))`` over ``x_grid`` and keep the best.

    Ties go to the smaller ``x``.  With ``n_jobs != 1`` grid chunks run in
    parallel; the trace is reassembled in grid order, so the result does not
    depend on the worker count.
    """
    x_grid = check_grid(x_grid, "x_grid")
    z_max = check_int(z_max, "z_max")
    check_delta(rev.delta)
    if n_jobs == 1:
        trace = _sweep_rows(curve, rev, x_grid, z_max)
    else:
        chunks = np.array_split(x_grid, max(1, min(len(x_grid), 64)))
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_sweep_rows)(curve, rev, chunk, z_max) for chunk in chunks
        )
        trace = [row for part in parts for row in part]
    best = trace[0]
    for row in trace[1:]:
        if row.pi > best.pi:
            best = row
    sched = Schedule(best.x, best.z_star)
    return OptimizationResult(sched, best.pi, trace, one_step_shortcut_used=False)


def optimize(curve, rev, x_grid, z_max=Z_MAX, n_jobs=1):
    """Dispatch to the one-step shortcut for log-convex curves, else sweep."""
    result = optimize_sweep(curve, rev, x_grid, z_max=z_max, n_jobs=n_jobs)
    try:
        cls = classify_curvature(curve).kind
    except ClassificationError:
        cls = None
    if cls is CurvatureClass.LOG_CONVEX:
        x_star, value = optimize_one_step(curve, rev, x_grid)
        result = OptimizationResult(
            Schedule(x_star, 1), value, result.sweep_trace, one_step_shortcut_used=True
        )
    return result
