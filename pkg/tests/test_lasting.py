import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rolloutopt import (
    ArumSpec,
    ExpPower,
    InversePower,
    LastingEffect,
    LinearCost,
    LinearDecay,
    NormalNoise,
    PowerDecay,
    arum_step_retention,
    non_monotonicity_witness,
    step_retention,
    survival_s_lasting,
)
from rolloutopt.exceptions import DomainError
from rolloutopt.lasting import admissible_steps, half_horizon_bound, step_count
from rolloutopt.retention import survival_s

EFF = lambda eps: LastingEffect(eps, LinearDecay())


def _loop_product(curve, eps, A, x):
    z = round(A / x)
    out = 1.0
    for i in range(1, z + 1):
        out *= max(curve.p(x) - eps * (i - 1) * x, 0.0)
    return out


def test_step_retention_examples():
    c = ExpPower(2)
    assert step_retention(c, EFF(0.0), 0.3, 7) == c.p(0.3)
    assert step_retention(c, EFF(0.4), 0.3, 1) == c.p(0.3)
    assert step_retention(c, EFF(0.1), 0.5, 3) == pytest.approx(math.exp(-0.25) - 0.1, abs=1e-15)


def test_step_retention_floors_at_zero():
    assert step_retention(ExpPower(2), EFF(5.0), 0.5, 4) == 0.0


def test_survival_lasting_examples():
    c = ExpPower(2)
    got = survival_s_lasting(c, EFF(0.1), 1.0, 0.5)
    assert got == pytest.approx(0.778800783 * 0.728800783, rel=1e-8)
    assert got == pytest.approx(_loop_product(c, 0.1, 1.0, 0.5), rel=1e-14)
    s = survival_s_lasting(c, EFF(0.5), 2.0, 0.1)
    assert s == pytest.approx(_loop_product(c, 0.5, 2.0, 0.1), rel=1e-12)
    assert s <= (1 - 0.5 * 1.0) ** 10


@pytest.mark.parametrize("curve", [ExpPower(2), InversePower(1), ExpPower(0.5)])
@pytest.mark.parametrize("z", [1, 2, 3, 7, 40])
def test_zero_epsilon_matches_survival_exactly(curve, z):
    A = 1.7
    x = A / z
    assert survival_s_lasting(curve, EFF(0.0), A, x) == survival_s(curve, A, x)


def test_step_count_requires_integer_ratio():
    assert step_count(1.0, 0.1) == 10
    with pytest.raises(DomainError):
        step_count(1.0, 0.3)


def test_admissible_steps_ascending():
    xs = admissible_steps(2.0, 50)
    assert len(xs) == 50 and xs[-1] == 2.0 and np.all(np.diff(xs) > 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.2, 4.0), st.integers(1, 300))
def test_half_horizon_bound_holds(eps, A, z):
    c = ExpPower(2)
    x = A / z
    assert survival_s_lasting(c, EFF(eps), A, x) <= half_horizon_bound(c, EFF(eps), A, x) * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 0.5), st.integers(1, 200), st.floats(0.5, 3.0))
def test_lasting_never_above_plain_survival(eps, z, A):
    c = InversePower(1)
    x = A / z
    assert survival_s_lasting(c, EFF(eps), A, x) <= survival_s(c, A, x) * (1 + 1e-12)


def test_survival_vanishes_for_small_steps():
    c = ExpPower(2)
    vals = [survival_s_lasting(c, EFF(0.05), 2.0, 2.0 / z) for z in (10, 100, 1000, 10000)]
    assert vals[-1] < 1e-3 and vals[-1] < vals[0]


def test_witness_found_for_small_epsilon():
    w = non_monotonicity_witness(ExpPower(2), EFF(1e-3), 2.0)
    assert w is not None and w.x1 < w.x2 and w.s1 < w.s2


def test_no_witness_without_lasting_effect():
    # eps = 0 and log-concave p: s_A is non-increasing in x
    assert non_monotonicity_witness(ExpPower(2), EFF(0.0), 2.0, z_max=500) is None


def test_power_decay():
    eff = LastingEffect(0.2, PowerDecay(2.0))
    assert eff.penalty(3.0) == pytest.approx(1.8)


def test_arum_step_retention_examples():
    arum = ArumSpec(1.0, LinearCost(1.0), NormalNoise())
    assert arum_step_retention(arum, EFF(0.0), 1.0, 5) == pytest.approx(0.5, abs=1e-15)
    assert arum_step_retention(arum, EFF(0.2), 0.5, 2) == pytest.approx(0.6554217, abs=1e-7)
    assert arum_step_retention(arum, EFF(0.7), 0.8, 1) == pytest.approx(arum.stay_probability(0.8))
