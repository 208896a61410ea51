"""Monte-Carlo cohort simulation and simulated A/B estimation of p(x).

Every surviving user faces each increase independently.  In direct mode a
user stays with the (lasting-aware) step retention; in ARUM mode the user
draws fresh noise ``Y ~ F`` and stays iff ``Y < u0 - c(x) - epsilon d(total)``.
Departures are permanent.

Draws come from :mod:`rolloutopt.rng`, keyed by (seed, stream, user,
period), so results are bit-identical for any chunking or worker count.
Stream 0 is used by cohort runs; A/B arm ``j`` uses stream ``j + 1``.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm
from sklearn.isotonic import IsotonicRegression

from . import rng
from ._validation import check_grid, check_int
from .arum import ArumSpec
from .exceptions import ParameterError
from .lasting import LastingEffect
from .optimizer import RevenueModel, Schedule, default_sweep_grid, optimize_sweep
from .retention import RetentionCurve, Tabulated

logger = logging.getLogger(__name__)

Z95 = float(norm.ppf(0.975))
WIDE_CI_HALF_WIDTH = 0.05
_CHUNK = 1 << 16


def wilson_interval(successes, n, z=Z95):
    """Wilson score interval for a binomial proportion (vectorized)."""
    successes = np.asarray(successes, dtype=float)
    n = np.asarray(n, dtype=float)
    phat = successes / n
    z2 = z * z
    denom = 1 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = z / denom * np.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n))
    return np.clip(center - half, 0.0, 1.0), np.clip(center + half, 0.0, 1.0)


# -- cohort simulation ------------------------------------------------------------------


@dataclass(frozen=True)
class CohortConfig:
    n_users: int
    seed: int
    model: Union[RetentionCurve, ArumSpec]
    schedule: Union[Schedule, Sequence[float]]
    effect: Optional[LastingEffect] = None
    revenue: Optional[RevenueModel] = None
    n_jobs: int = 1

    def increments(self):
        if isinstance(self.schedule, Schedule):
            return [self.schedule.x] * self.schedule.z
        incs = [float(v) for v in self.schedule]
        if not incs or any(v < 0 for v in incs):
            raise ParameterError("explicit increments must be a non-empty list of values >= 0")
        return incs


@dataclass
class CohortResult:
    seed: int
    n_users: int
    survivors_per_period: list
    survival_fraction: list
    ci_95: list
    realized_revenue: list
    cumulative_inconvenience: list = field(default_factory=list)

    @property
    def final_fraction(self):
        return self.survival_fraction[-1]


def _stay_mask(model, effect, x, total, u):
    if x == 0:
        return np.ones(u.shape, dtype=bool)
    penalty = effect.penalty(total) if effect is not None else 0.0
    if isinstance(model, ArumSpec):
        return model.noise.ppf(u) < model.threshold(x, penalty)
    prob = max(model.p(x) - penalty, 0.0)
    return u < prob


def _simulate_chunk(model, effect, increments, seed, stream, lo, hi):
    users = np.arange(lo, hi, dtype=np.uint64)
    alive = np.ones(users.size, dtype=bool)
    counts = []
    total = 0.0
    for period, x in enumerate(increments, start=1):
        u = rng.uniforms(seed, stream, users, period)
        alive &= _stay_mask(model, effect, x, total, u)
        total += x
        counts.append(int(alive.sum()))
    return counts


def _run_cohort(model, effect, increments, seed, stream, n_users, n_jobs):
    bounds = [(lo, min(lo + _CHUNK, n_users)) for lo in range(0, n_users, _CHUNK)]
    if n_jobs == 1 or len(bounds) == 1:
        parts = [_simulate_chunk(model, effect, increments, seed, stream, lo, hi) for lo, hi in bounds]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_simulate_chunk)(model, effect, increments, seed, stream, lo, hi)
            for lo, hi in bounds
        )
    return [int(sum(col)) for col in zip(*parts)]


def simulate_schedule(cfg):
    """Replay ``cfg.schedule`` on a cohort of ``cfg.n_users`` users.

    Period 0 is the starting cohort; period ``t`` counts survivors after the
    ``t``-th increase.
    """
    n = check_int(cfg.n_users, "n_users")
    increments = cfg.increments()
    counts = [n] + _run_cohort(cfg.model, cfg.effect, increments, cfg.seed, 0, n, cfg.n_jobs)
    lo, hi = wilson_interval(counts, n)
    totals = np.concatenate([[0.0], np.cumsum(increments)])
    r = (cfg.revenue or RevenueModel()).r
    revenue = [float(r(t) * c) for t, c in zip(totals, counts)]
    return CohortResult(
        seed=cfg.seed,
        n_users=n,
        survivors_per_period=counts,
        survival_fraction=[c / n for c in counts],
        ci_95=list(zip(lo.tolist(), hi.tolist())),
        realized_revenue=revenue,
        cumulative_inconvenience=totals.tolist(),
    )


# -- estimation ----------------------------------------------------------------------------


def monotone_fit(x_samples, p_hat, weights=None):
    """Non-increasing piecewise-linear curve through ``(0, 1)`` and the samples.

    Violations are pooled by isotonic regression (pool-adjacent-violators).
    """
    x = check_grid(x_samples, "x_samples")
    p = np.asarray(p_hat, dtype=float)
    if p.shape != x.shape:
        raise ParameterError("x_samples and p_hat must have the same length")
    iso = IsotonicRegression(increasing=False, y_min=0.0, y_max=1.0)
    fitted = iso.fit(x, p, sample_weight=weights).predict(x)
    return Tabulated(tuple([0.0, *x.tolist()]), tuple([1.0, *fitted.tolist()]))


@dataclass
class AbEstimate:
    x_samples: np.ndarray
    p_hat: np.ndarray
    ci_95: np.ndarray  # shape (n_arms, 2)
    n_per_arm: int
    seed: int
    fitted: Tabulated
    wide_ci_warning: bool = False


def estimate_p(model, x_samples, n_per_arm, seed):
    """Estimate p at each sample point from a single-increase arm of users."""
    x = check_grid(x_samples, "x_samples")
    n = check_int(n_per_arm, "n_per_arm", minimum=30)
    stays = np.array(
        [_run_cohort(model, None, [xi], seed, j + 1, n, 1)[0] for j, xi in enumerate(x)]
    )
    p_hat = stays / n
    lo, hi = wilson_interval(stays, n)
    ci = np.column_stack([lo, hi])
    wide = bool(np.max(hi - lo) / 2 > WIDE_CI_HALF_WIDTH)
    if wide:
        logger.warning("A/B arms of %d users give Wilson half-widths above %.2f", n, WIDE_CI_HALF_WIDTH)
    fitted = monotone_fit(x, p_hat)
    return AbEstimate(x, p_hat, ci, n, seed, fitted, wide)


def end_to_end_estimate_and_optimize(
    model, x_samples, n_per_arm, seed, rev, x_grid=None, grid_step=0.001, z_max=10_000
):
    """Estimate p by simulated A/B tests, then optimize the schedule on the fit.

    With ``n_per_arm=None`` estimation is skipped and ``model`` (a retention
    curve) is optimized directly.  Returns ``(result, estimate)``.
    """
    if n_per_arm is None:
        if not isinstance(model, RetentionCurve):
            raise ParameterError("bypassing estimation needs a RetentionCurve model")
        estimate, curve = None, model
    else:
        estimate = estimate_p(model, x_samples, n_per_arm, seed)
        curve = estimate.fitted
    grid = default_sweep_grid(curve, grid_step) if x_grid is None else x_grid
    return optimize_sweep(curve, rev, grid, z_max=z_max), estimate
