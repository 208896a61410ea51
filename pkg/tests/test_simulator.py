import math

import numpy as np
import pytest
from scipy import stats

from rolloutopt import (
    ArumSpec,
    ExpPower,
    IdentityRevenue,
    LastingEffect,
    LinearCost,
    LinearDecay,
    NormalNoise,
    RevenueModel,
    Schedule,
    Tabulated,
    rng,
)
from rolloutopt.exceptions import ParameterError
from rolloutopt.optimizer import optimize_sweep
from rolloutopt.retention import survival_s
from rolloutopt.simulator import (
    CohortConfig,
    end_to_end_estimate_and_optimize,
    estimate_p,
    monotone_fit,
    simulate_schedule,
    wilson_interval,
)

REV = RevenueModel(IdentityRevenue(), 0.9)


def _flat():
    return Tabulated((0.0, 10.0), (1.0, 1.0))


# -- rng -------------------------------------------------------------------------------------


def test_uniforms_open_interval_and_uniform():
    u = rng.uniforms(7, 0, np.arange(200_000, dtype=np.uint64), 3)
    assert u.min() > 0 and u.max() < 1
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_uniforms_keyed_by_every_coordinate():
    users = np.arange(1000, dtype=np.uint64)
    base = rng.uniforms(1, 0, users, 1)
    assert np.array_equal(base, rng.uniforms(1, 0, users, 1))
    for other in (rng.uniforms(2, 0, users, 1), rng.uniforms(1, 1, users, 1), rng.uniforms(1, 0, users, 2)):
        assert not np.any(base == other)


def test_uniforms_independent_of_batching():
    users = np.arange(5000, dtype=np.uint64)
    whole = rng.uniforms(3, 0, users, 4)
    parts = np.concatenate([rng.uniforms(3, 0, users[i : i + 333], 4) for i in range(0, 5000, 333)])
    assert np.array_equal(whole, parts)


# -- wilson ------------------------------------------------------------------------------------


def test_wilson_matches_textbook_value():
    # 8 of 10 at 95%: (0.4902, 0.9433)
    lo, hi = wilson_interval(8, 10)
    assert lo == pytest.approx(0.4902, abs=1e-4) and hi == pytest.approx(0.9433, abs=1e-4)


def test_wilson_all_successes_upper_is_one():
    lo, hi = wilson_interval(50, 50)
    assert hi == 1.0 and lo < 1.0


# -- cohort ------------------------------------------------------------------------------------


def test_everyone_stays_when_p_is_one():
    res = simulate_schedule(CohortConfig(5000, 0, _flat(), Schedule(0.5, 4)))
    assert res.survivors_per_period == [5000] * 5


def test_direct_survival_within_three_sd():
    n = 100_000
    res = simulate_schedule(CohortConfig(n, 11, ExpPower(2), Schedule(0.5, 2)))
    s = survival_s(ExpPower(2), 1.0, 0.5)
    assert abs(res.final_fraction - s) <= 3 * math.sqrt(s * (1 - s) / n)


def test_arum_single_step_median():
    n = 100_000
    arum = ArumSpec(1.0, LinearCost(1.0), NormalNoise())
    res = simulate_schedule(CohortConfig(n, 5, arum, Schedule(1.0, 1)))
    assert abs(res.final_fraction - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_lasting_cohort_matches_product():
    n = 100_000
    eff = LastingEffect(0.1, LinearDecay())
    res = simulate_schedule(CohortConfig(n, 2, ExpPower(2), Schedule(0.5, 2), effect=eff))
    s = 0.778800783 * 0.728800783
    assert abs(res.final_fraction - s) <= 3 * math.sqrt(s * (1 - s) / n)


def test_cohort_survivors_non_increasing_and_revenue():
    res = simulate_schedule(CohortConfig(20_000, 4, ExpPower(2), Schedule(0.2, 10), revenue=REV))
    assert all(a >= b for a, b in zip(res.survivors_per_period, res.survivors_per_period[1:]))
    assert res.realized_revenue[0] == 0.0
    assert res.realized_revenue[3] == pytest.approx(0.6 * res.survivors_per_period[3])


def test_cohort_parallel_equals_sequential():
    cfg = dict(n_users=150_000, seed=9, model=ExpPower(2), schedule=Schedule(0.25, 4))
    a = simulate_schedule(CohortConfig(**cfg, n_jobs=1))
    b = simulate_schedule(CohortConfig(**cfg, n_jobs=3))
    assert a.survivors_per_period == b.survivors_per_period


def test_explicit_increments():
    res = simulate_schedule(CohortConfig(1000, 0, ExpPower(2), [0.1, 0.0, 0.3]))
    assert len(res.survivors_per_period) == 4
    assert res.survivors_per_period[1] == res.survivors_per_period[2]
    assert res.cumulative_inconvenience == pytest.approx([0.0, 0.1, 0.1, 0.4])


def test_zero_users_rejected():
    with pytest.raises(ParameterError):
        simulate_schedule(CohortConfig(0, 0, ExpPower(2), Schedule(0.5, 2)))


# -- estimation -----------------------------------------------------------------------------------


def test_monotone_fit_pools_violation():
    c = monotone_fit([1.0, 2.0], [0.6, 0.7])
    assert c.ps == pytest.approx((1.0, 0.65, 0.65))


def test_monotone_fit_keeps_feasible_input():
    c = monotone_fit([0.5, 1.0, 1.5], [0.9, 0.6, 0.2])
    assert c.ps == pytest.approx((1.0, 0.9, 0.6, 0.2))


def test_monotone_fit_single_sample():
    c = monotone_fit([0.8], [0.4])
    assert c.xs == (0.0, 0.8) and c.ps == (1.0, 0.4)


def test_estimate_single_arm_covers_truth():
    est = estimate_p(ExpPower(2), [0.5], 10_000, seed=3)
    lo, hi = est.ci_95[0]
    assert lo <= math.exp(-0.25) <= hi


def test_estimate_certain_stay():
    est = estimate_p(_flat(), [0.5, 1.0], 100, seed=0)
    assert np.all(est.p_hat == 1.0) and np.all(est.ci_95[:, 1] == 1.0)


def test_estimate_small_arms_flag_wide_ci():
    est = estimate_p(ExpPower(2), [0.5, 1.0], 30, seed=0)
    assert est.wide_ci_warning


def test_estimate_rejects_tiny_arms():
    with pytest.raises(ParameterError):
        estimate_p(ExpPower(2), [0.5], 29, seed=0)


def test_bypass_equals_direct_sweep():
    truth = Tabulated((0.0, 0.5, 1.0, 1.5, 2.0), (1.0, 0.8, 0.4, 0.1, 0.01))
    grid = np.arange(1, 2001) * 0.001
    res, est = end_to_end_estimate_and_optimize(truth, None, None, 0, REV, x_grid=grid)
    assert est is None
    assert res.sweep_trace == optimize_sweep(truth, REV, grid).sweep_trace


def test_end_to_end_tiny_arms_still_produces_result():
    xs = np.arange(1, 9) * 0.25
    res, est = end_to_end_estimate_and_optimize(ExpPower(2), xs, 30, 1, REV)
    assert est.wide_ci_warning and res.best.z >= 1
