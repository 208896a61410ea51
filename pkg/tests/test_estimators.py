import numpy as np
import pytest
from sklearn.base import clone

from rolloutopt import ExpPower, InversePower, PowerRevenue, RetentionEstimator, RolloutOptimizer, rng
from rolloutopt.exceptions import DomainError, ParameterError


def _ab_data(levels, n, seed=0):
    x = np.repeat(levels, n)
    users = np.arange(x.size, dtype=np.uint64)
    y = (rng.uniforms(seed, 0, users, 1) < ExpPower(2).p(x)).astype(float)
    return x.reshape(-1, 1), y


def test_retention_estimator_params_and_clone():
    est = RetentionEstimator(out_of_bounds="clip")
    assert est.get_params() == {"out_of_bounds": "clip"}
    assert clone(est).get_params() == est.get_params()


def test_retention_estimator_fit_predict():
    X, y = _ab_data(np.arange(1, 21) * 0.1, 5000)
    est = RetentionEstimator().fit(X, y)
    assert est.x_samples_.size == 20
    assert np.all(np.diff(est.predict(est.x_samples_)) <= 0)
    assert est.predict([[0.5]])[0] == pytest.approx(np.exp(-0.25), abs=0.03)
    assert est.predict([0.0])[0] == 1.0


def test_retention_estimator_out_of_bounds():
    X, y = _ab_data([0.5, 1.0], 200)
    with pytest.raises(DomainError):
        RetentionEstimator().fit(X, y).predict([[2.0]])
    clipped = RetentionEstimator(out_of_bounds="clip").fit(X, y)
    assert clipped.predict([[2.0]])[0] == clipped.predict([[1.0]])[0]


def test_retention_estimator_validates_inputs():
    with pytest.raises(ParameterError):
        RetentionEstimator().fit([[0.0], [1.0]], [1, 0])
    with pytest.raises(ParameterError):
        RetentionEstimator().fit([[0.5], [1.0]], [1, 2])
    with pytest.raises(ParameterError):
        RetentionEstimator(out_of_bounds="wrap").fit([[0.5]], [1])


def test_sample_weight_equals_repetition():
    X = np.array([[0.5], [0.5], [1.0]])
    y = np.array([1.0, 0.0, 1.0])
    a = RetentionEstimator().fit(X, y, sample_weight=[3, 1, 2])
    b = RetentionEstimator().fit(np.array([[0.5]] * 4 + [[1.0]] * 2), np.array([1, 1, 1, 0, 1, 1.0]))
    assert np.allclose(a.p_hat_, b.p_hat_)


def test_rollout_optimizer_fit_from_outcomes():
    X, y = _ab_data(np.arange(1, 65) / 32, 20_000, seed=1)
    opt = RolloutOptimizer(grid_step=0.002).fit(X, y)
    assert 0.15 <= opt.schedule_.x <= 0.25
    assert abs(opt.schedule_.z - 26) <= 5
    assert isinstance(opt.retention_, RetentionEstimator)


def test_rollout_optimizer_known_curve_and_predict():
    opt = RolloutOptimizer().fit_curve(ExpPower(2), dispatch=False)
    assert opt.schedule_.z == 26
    assert opt.predict([0.195, 1.0]).tolist() == [26, 1]


def test_rollout_optimizer_dispatch_on_log_convex():
    opt = RolloutOptimizer(grid_step=0.01).fit_curve(InversePower(2))
    assert opt.result_.one_step_shortcut_used
    assert opt.schedule_.z == 1


def test_rollout_optimizer_clone_keeps_params():
    opt = RolloutOptimizer(revenue=PowerRevenue(0.5), delta=0.8, retention=RetentionEstimator("clip"))
    twin = clone(opt)
    assert twin.get_params()["delta"] == 0.8
    assert twin.get_params()["retention__out_of_bounds"] == "clip"
