import math

import numpy as np
import pytest

from uistop.errors import DomainError
from uistop.estimation import (
    BUY_NOW_HIT,
    BUY_NOW_REJECTED,
    KEEP_WAITING,
    SequentialDecision,
    critical_value,
    estimate,
    sequential_decision,
    test_drift as drift_test,
)


def constructed_path(n, mean, var, seed=0, x0=346.0):
    """Weekly wages whose log increments have exactly the given mean and sample variance."""
    e = np.random.default_rng(seed).standard_normal(n)
    e = (e - e.mean()) / e.std(ddof=1)
    z = mean + math.sqrt(var) * e
    y = math.log(x0) + np.concatenate([[0.0], np.cumsum(z)])
    return np.arange(n + 1, dtype=float), np.exp(y)


def test_constructed_path_estimates():
    t, w = constructed_path(54, 0.0005994, 0.0003723)
    est = estimate(t, w)
    assert est.n == 54 and est.T == 54.0
    assert est.a_hat == pytest.approx(0.0005994, rel=1e-10)
    assert est.sigma2_hat == pytest.approx(0.0003723, rel=1e-10)
    assert est.mu_hat == pytest.approx(0.00078555, rel=1e-9)
    assert est.var_a_hat == pytest.approx(0.0003723 / 54, rel=1e-10)
    assert est.as_dict()["mu_hat"] == est.mu_hat


def test_non_unit_spacing():
    t, w = constructed_path(40, 0.001, 0.0004)
    est = estimate(t * 0.5, w)
    # same increments on half-week steps: drift and variance per week double
    assert est.a_hat == pytest.approx(0.002, rel=1e-10)
    assert est.sigma2_hat == pytest.approx(0.0008, rel=1e-10)


def test_drift_estimate_telescopes():
    t, w = constructed_path(30, 0.001, 0.0004)
    w2 = w.copy()
    w2[1:-1] *= np.exp(np.random.default_rng(1).normal(0, 0.05, 29))
    assert estimate(t, w2).a_hat == pytest.approx(estimate(t, w).a_hat, rel=1e-12)
    assert estimate(t, w2).sigma2_hat != pytest.approx(estimate(t, w).sigma2_hat)


def test_estimator_variances_by_simulation():
    rng = np.random.default_rng(7)
    a, s2, n = 0.0002, 0.0004, 100
    z = rng.normal(a, math.sqrt(s2), (4000, n))
    y = np.concatenate([np.zeros((4000, 1)), np.cumsum(z, axis=1)], axis=1)
    t = np.arange(n + 1, dtype=float)
    reps = [estimate(t, np.exp(row)) for row in y]
    a_hats = np.array([r.a_hat for r in reps])
    s2_hats = np.array([r.sigma2_hat for r in reps])
    assert a_hats.var(ddof=1) == pytest.approx(s2 / n, rel=0.1)
    assert s2_hats.var(ddof=1) == pytest.approx(2 * s2 ** 2 / (n - 1), rel=0.1)
    assert s2_hats.mean() == pytest.approx(s2, rel=0.01)


@pytest.mark.parametrize(
    "times, wages",
    [([0, 1], [1, 2]), ([0, 1, 2], [1, 0, 2]), ([0, 1, 3], [1, 2, 3]), ([0, 1, 2], [1, 2]), ([0, 2, 1], [1, 1, 1])],
)
def test_estimate_rejects_bad_input(times, wages):
    with pytest.raises(DomainError):
        estimate(times, wages)


def test_critical_values():
    assert critical_value(0.05) == pytest.approx(1.6448536269514722, rel=1e-12)
    assert critical_value(0.05, 10) == pytest.approx(1.8124611228107335, rel=1e-12)
    with pytest.raises(DomainError):
        critical_value(0.0)
    with pytest.raises(DomainError):
        critical_value(0.7)


def test_drift_test_both_variants():
    t, w = constructed_path(54, -0.01, 0.0004)
    known = drift_test(t, w, 0.05, sigma=0.02)
    assert known.variant == "normal"
    assert known.statistic == pytest.approx(-0.54, rel=1e-10)
    assert known.threshold == pytest.approx(-1.6448536 * 0.02 * math.sqrt(54), rel=1e-7)
    assert known.reject
    est = drift_test(t, w, 0.05)
    assert est.variant == "t"
    assert est.threshold == pytest.approx(-critical_value(0.05, 53) * math.sqrt(0.0004 * 54), rel=1e-9)
    assert est.reject
    up = drift_test(*constructed_path(54, 0.001, 0.0004), 0.05)
    assert not up.reject
    with pytest.raises(DomainError):
        drift_test(t, w, 0.05, sigma=0.0)


def test_constant_path_t_variant_rejects():
    # zero variance makes the threshold 0 and a zero displacement sits on it
    res = drift_test([0, 1, 2, 3], [5, 5, 5, 5], 0.05)
    assert res.threshold == 0.0 and res.reject


def rising_path(b, weeks, x0=346.0):
    """Log-wage climbs to ``b`` exactly at ``weeks`` with a small zig-zag on the way."""
    k = np.arange(weeks + 1)
    slope = math.log(b / x0) / weeks
    y = math.log(x0) + slope * k + 0.5 * slope * np.where(k % 2, 1.0, -1.0) * (k < weeks) * (k > 0)
    y[-1] = math.log(b) + 1e-9
    return list(zip(k.astype(float), np.exp(y)))


@pytest.mark.parametrize("sigma", [None, 0.02])
def test_sequential_hit_at_week_54(sigma):
    b = 352.37050
    obs = rising_path(b, 54)
    assert all(w < b for _, w in obs[:-1])
    d = sequential_decision(obs, b, 0.05, sigma)
    assert d.action == BUY_NOW_HIT
    assert d.week == 54.0


def test_sequential_immediate_when_above_threshold():
    d = sequential_decision([(0.0, 400.0), (1.0, 300.0)], 352.37, 0.05)
    assert d == type(d)(BUY_NOW_HIT, 0.0)


def test_sequential_stream_ends_waiting():
    obs = rising_path(352.37, 54)[:20]
    d = sequential_decision(obs, 352.37, 0.05, 0.02)
    assert d.action == KEEP_WAITING and d.week == 19.0
    with pytest.raises(DomainError):
        sequential_decision([], 352.37, 0.05)


def test_sequential_matches_batch_test():
    t, w = constructed_path(60, -0.008, 0.0004, seed=3)
    state = SequentialDecision(1e6, 0.05)
    for k in range(len(t)):
        d = state.observe(t[k], w[k])
        if k >= 2:
            batch = drift_test(t[: k + 1], w[: k + 1], 0.05)
            assert (d.action == BUY_NOW_REJECTED) == batch.reject
        if d.action != KEEP_WAITING:
            break
    assert state.decision is not None
    # once decided the state is frozen
    assert state.observe(999.0, 1.0) == state.decision


def test_sequential_rejects_bad_grid():
    state = SequentialDecision(400.0, 0.05)
    state.observe(0.0, 346.0)
    state.observe(1.0, 347.0)
    with pytest.raises(DomainError):
        state.observe(3.0, 348.0)
    with pytest.raises(DomainError):
        SequentialDecision(0.0, 0.05)


def test_negative_drift_always_rejected_before_hitting():
    # a = -0.005 per week from about 200 against b* = 352: the test should always fire first
    rng = np.random.default_rng(2025)
    b, sigma, weeks = 352.37, 0.02, 520
    y = math.log(200.0) + np.concatenate(
        [np.zeros((1000, 1)), np.cumsum(rng.normal(-0.005, sigma, (1000, weeks)), axis=1)], axis=1
    )
    wages = np.exp(y)
    weeks_axis = np.arange(weeks + 1, dtype=float)
    actions = [sequential_decision(zip(weeks_axis, row), b, 0.05, sigma).action for row in wages]
    assert actions.count(BUY_NOW_REJECTED) == 1000
