"""scikit-learn compatible wrappers.

:class:`RetentionEstimator` learns a non-increasing retention curve from
per-user outcomes (did the user stay after an increase of ``x``?).
:class:`RolloutOptimizer` chains such an estimator into the schedule
sweep, so the whole pipeline supports ``get_params``/``set_params``,
``clone`` and model-selection utilities.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, clone
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d, _check_sample_weight

from .exceptions import ParameterError
from .optimizer import (
    IdentityRevenue,
    RevenueModel,
    Z_MAX,
    _z_star,
    default_sweep_grid,
    optimize,
    optimize_sweep,
)
from .simulator import WIDE_CI_HALF_WIDTH, monotone_fit, wilson_interval


def _as_levels(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single feature (the inconvenience level), got {X.shape[1]}")
        X = X[:, 0]
    return column_or_1d(X)


class RetentionEstimator(RegressorMixin, BaseEstimator):
    """Isotonic (non-increasing) estimate of p(x) from A/B outcomes.

    Parameters
    ----------
    out_of_bounds : {"raise", "clip"}
        What ``predict`` does beyond the largest observed level: raise a
        domain error, or return the value at the last level.

    Attributes
    ----------
    x_samples_, p_hat_, n_obs_, ci_95_ : per-level raw estimates
    curve_ : Tabulated
        Fitted monotone curve through ``(0, 1)``.
    wide_ci_ : bool
        True if some level's Wilson half-width exceeds 0.05.
    """

    def __init__(self, out_of_bounds="raise"):
        self.out_of_bounds = out_of_bounds

    def fit(self, X, y, sample_weight=None):
        if self.out_of_bounds not in ("raise", "clip"):
            raise ParameterError(f"out_of_bounds must be 'raise' or 'clip', got {self.out_of_bounds!r}")
        x = _as_levels(X)
        x, y = check_X_y(x.reshape(-1, 1), y, y_numeric=True)
        x = x[:, 0]
        if np.any(x <= 0):
            raise ParameterError("inconvenience levels must be > 0")
        if np.any((y < 0) | (y > 1)):
            raise ParameterError("outcomes must lie in [0, 1]")
        w = _check_sample_weight(sample_weight, x)
        levels, inverse = np.unique(x, return_inverse=True)
        n = np.bincount(inverse, weights=w)
        stayed = np.bincount(inverse, weights=w * y)
        keep = n > 0
        levels, n, stayed = levels[keep], n[keep], stayed[keep]
        self.x_samples_ = levels
        self.n_obs_ = n
        self.p_hat_ = stayed / n
        lo, hi = wilson_interval(stayed, n)
        self.ci_95_ = np.column_stack([lo, hi])
        self.wide_ci_ = bool(np.max(hi - lo) / 2 > WIDE_CI_HALF_WIDTH)
        self.curve_ = monotone_fit(levels, self.p_hat_, weights=n)
        return self

    def predict(self, X):
        check_is_fitted(self, "curve_")
        x = _as_levels(X)
        if self.out_of_bounds == "clip":
            x = np.minimum(x, self.curve_.domain_max)
        return np.asarray(self.curve_.p(x), dtype=float).reshape(-1)


class RolloutOptimizer(BaseEstimator):
    """Fit a retention curve, then choose the revenue-maximizing schedule.

    Parameters
    ----------
    revenue : callable, default IdentityRevenue()
        Log-concave per-user revenue r(x).
    delta : float, default 0.9
        Discount factor in (0, 1).
    grid_step : float, default 0.001
        Spacing of the step-size sweep.
    z_max : int, default 10000
        Cap on the number of increases.
    retention : estimator or None
        Retention estimator to clone and fit; ``RetentionEstimator()`` if None.
    n_jobs : int, default 1

    Attributes
    ----------
    curve_ : RetentionCurve used for optimization
    result_ : OptimizationResult
    schedule_ : Schedule
    """

    def __init__(
        self,
        revenue=IdentityRevenue(),
        delta=0.9,
        grid_step=0.001,
        z_max=Z_MAX,
        retention=None,
        n_jobs=1,
    ):
        self.revenue = revenue
        self.delta = delta
        self.grid_step = grid_step
        self.z_max = z_max
        self.retention = retention
        self.n_jobs = n_jobs

    def _rev(self):
        return RevenueModel(self.revenue, self.delta)

    def fit(self, X, y, sample_weight=None):
        est = clone(self.retention) if self.retention is not None else RetentionEstimator()
        est.fit(X, y, sample_weight=sample_weight)
        self.retention_ = est
        grid = default_sweep_grid(est.curve_, self.grid_step)
        self.result_ = optimize_sweep(est.curve_, self._rev(), grid, z_max=self.z_max, n_jobs=self.n_jobs)
        return self._finish(est.curve_)

    def fit_curve(self, curve, dispatch=True):
        """Optimize a known retention curve, skipping estimation.

        With ``dispatch`` log-convex curves take the one-step shortcut.
        """
        grid = default_sweep_grid(curve, self.grid_step)
        solve = optimize if dispatch else optimize_sweep
        self.result_ = solve(curve, self._rev(), grid, z_max=self.z_max, n_jobs=self.n_jobs)
        return self._finish(curve)

    def _finish(self, curve):
        self.curve_ = curve
        self.schedule_ = self.result_.best
        return self

    def predict(self, X):
        """Optimal number of increases z*(x) for each candidate step size."""
        check_is_fitted(self, "curve_")
        x = _as_levels(X)
        rev = self._rev()
        return np.array([_z_star(self.curve_, rev, float(v), self.z_max)[0] for v in x], dtype=int)
