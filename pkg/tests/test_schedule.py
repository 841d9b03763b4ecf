import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uistop.errors import DomainError
from uistop.schedule import (
    FRENCH_DELTA,
    FRENCH_H0,
    FRENCH_S0,
    BenefitSchedule,
    beta_closed_form,
    beta_from_schedule,
    discounted_benefit_H,
    discounted_benefit_H_exact,
    lambda1_mean_matching,
    lambda1_tail,
    schedule_beta,
)

EXAMPLE = BenefitSchedule.piecewise(0.574, 34.7, 0.0094)


def test_french_preset_values():
    s = BenefitSchedule.french()
    assert s.h0 == 0.574
    assert FRENCH_S0 == pytest.approx(34.6667, abs=1e-4)
    # a 15% cut every four months
    assert math.exp(-52 / 3 * FRENCH_DELTA) == pytest.approx(0.85, rel=1e-12)
    assert lambda1_mean_matching() == pytest.approx(0.0110, abs=5e-5)
    assert lambda1_tail() == pytest.approx(0.0253, abs=5e-5)
    # P(spell > 91 weeks) is 10% under the tail calibration
    assert math.exp(-lambda1_tail() * 91) == pytest.approx(0.1, rel=1e-12)


def test_rate_shape():
    s = EXAMPLE
    assert s.rate(0.0) == 0.574
    assert s.rate(34.7) == 0.574
    assert s.rate(34.7 + 10) == pytest.approx(0.574 * math.exp(-0.094))
    tab = BenefitSchedule.tabulated([[0, 0.6], [10, 0.6], [20, 0.2]])
    np.testing.assert_allclose(tab.rate([0, 5, 15, 20, 20.5, 100]), [0.6, 0.6, 0.4, 0.2, 0.0, 0.0])


def test_H_trivial_cases():
    assert discounted_benefit_H(EXAMPLE, 0.0, 0.0004) == 0.0
    flat = BenefitSchedule.piecewise(1.0, math.inf, 1.0)
    assert discounted_benefit_H(flat, 10.0, 0.0) == pytest.approx(10.0, rel=1e-13)
    assert discounted_benefit_H_exact(flat, 10.0, 0.0) == 10.0


def test_H_quadrature_matches_antiderivative():
    q = discounted_benefit_H(EXAMPLE, 91.0, 0.0004)
    exact = discounted_benefit_H_exact(EXAMPLE, 91.0, 0.0004)
    # independent hand evaluation of the two pieces
    hand = 0.574 * (1 - math.exp(-0.0004 * 34.7)) / 0.0004 + 0.574 * math.exp(-0.0004 * 34.7) * (
        1 - math.exp(-(0.0004 + 0.0094) * (91 - 34.7))
    ) / (0.0004 + 0.0094)
    assert exact == pytest.approx(hand, rel=1e-14)
    assert q == pytest.approx(exact, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    t=st.floats(0.0, 500.0),
    r=st.floats(0.0, 0.01),
    s0=st.floats(0.0, 100.0),
    delta=st.floats(1e-4, 0.5),
)
def test_H_quadrature_vs_exact_random(t, r, s0, delta):
    s = BenefitSchedule.piecewise(0.5, s0, delta)
    assert discounted_benefit_H(s, t, r) == pytest.approx(discounted_benefit_H_exact(s, t, r), rel=1e-10, abs=1e-13)


def test_H_nondecreasing_and_bounded():
    ts = np.linspace(0, 2000, 60)
    hs = [discounted_benefit_H_exact(EXAMPLE, t, 0.0004) for t in ts]
    assert np.all(np.diff(hs) >= 0)
    total = 0.574 * (1 - math.exp(-0.0004 * 34.7)) / 0.0004 + 0.574 * math.exp(-0.0004 * 34.7) / 0.0098
    assert hs[-1] <= total


def test_H_rejects_negative_inputs():
    with pytest.raises(DomainError):
        discounted_benefit_H(EXAMPLE, -1.0, 0.0)
    with pytest.raises(DomainError):
        discounted_benefit_H(EXAMPLE, 1.0, -0.1)


def test_beta_trivial_and_extreme_cases():
    flat = BenefitSchedule.piecewise(1.0, math.inf, 1.0)
    assert beta_from_schedule(flat, 0.01, 0.0) == pytest.approx(100.0, rel=1e-10)
    h0, r, l1, d = 0.574, 0.0004, 0.011, 0.0094
    assert beta_closed_form(h0, math.inf, d, l1, r) == pytest.approx(h0 / l1 * (1 - r / (r + l1)), rel=1e-14)
    assert beta_closed_form(h0, 0.0, d, l1, r) == pytest.approx(h0 / l1 * (1 - (r + d) / (r + l1 + d)), rel=1e-14)
    assert beta_closed_form(h0, 0.0, 1e12, l1, r) < 1e-12


@pytest.mark.parametrize("lambda1", [0.0110, 0.0253])
def test_beta_example_closed_form_vs_quadrature(lambda1):
    closed = beta_closed_form(0.574, 34.7, 0.0094, lambda1, 0.0004)
    quad = beta_from_schedule(EXAMPLE, lambda1, 0.0004)
    assert closed > 0
    assert quad == pytest.approx(closed, rel=1e-10)


def test_beta_closed_form_vs_quadrature_100_draws():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        h0 = rng.uniform(0.1, 1.0)
        s0 = rng.choice([rng.uniform(0, 80), 0.0, math.inf])
        d = rng.uniform(1e-3, 0.2)
        l1 = rng.uniform(0.005, 0.1)
        r = rng.uniform(0, 0.005)
        s = BenefitSchedule.piecewise(h0, s0, d)
        assert beta_from_schedule(s, l1, r) == pytest.approx(beta_closed_form(h0, s0, d, l1, r), rel=1e-10)


def test_beta_monotone_in_r_and_delta():
    rng = np.random.default_rng(7)
    for _ in range(20):
        h0, s0, d = rng.uniform(0.2, 1), rng.uniform(0, 60), rng.uniform(1e-3, 0.1)
        l1, r = rng.uniform(0.005, 0.05), rng.uniform(0, 0.005)
        base = beta_closed_form(h0, s0, d, l1, r)
        assert beta_closed_form(h0, s0, d, l1, r + 1e-5) <= base
        assert beta_closed_form(h0, s0, d + 1e-5, l1, r) <= base


def test_tabulated_beta():
    # a flat table long enough to look like an endless benefit
    tab = BenefitSchedule.tabulated([[0.0, 0.5], [1e5, 0.5]])
    assert beta_from_schedule(tab, 0.02, 0.001) == pytest.approx(0.5 / 0.021, rel=1e-9)
    # zero benefit beyond the table
    short = BenefitSchedule.tabulated([[0.0, 1.0], [10.0, 1.0]])
    hand = (1 - math.exp(-0.05 * 10)) / 0.05 * 1.0  # lambda1 = 0.05, r = 0: E[min(T, 10)]
    assert beta_from_schedule(short, 0.05, 0.0) == pytest.approx(hand, rel=1e-9)
    assert schedule_beta(short, 0.05, 0.0) == pytest.approx(hand, rel=1e-9)


@pytest.mark.parametrize(
    "kwargs",
    [dict(h0=0.0, s0=1, delta=1), dict(h0=1.2, s0=1, delta=1), dict(h0=0.5, s0=-1, delta=1), dict(h0=0.5, s0=1, delta=0)],
)
def test_piecewise_validation(kwargs):
    with pytest.raises(DomainError):
        BenefitSchedule.piecewise(**kwargs)


def test_tabulated_validation():
    with pytest.raises(DomainError):
        BenefitSchedule.tabulated([[0, 1], [0, 1]])
    with pytest.raises(DomainError):
        BenefitSchedule.tabulated([[0, 1], [1, -0.1]])
    with pytest.raises(DomainError):
        BenefitSchedule.tabulated([[0, 1]])


def test_beta_rejects_bad_lambda1():
    with pytest.raises(DomainError):
        beta_from_schedule(EXAMPLE, 0.0, 0.0)
    with pytest.raises(DomainError):
        beta_closed_form(0.5, 1.0, 1.0, -1.0, 0.0)


def test_mapping_round_trip():
    for s in (EXAMPLE, BenefitSchedule.piecewise(1.0, math.inf, 0.1), BenefitSchedule.tabulated([[0, 1], [5, 0.5]])):
        assert BenefitSchedule.from_mapping(s.to_mapping()) == s
    assert BenefitSchedule.from_mapping({"h0": FRENCH_H0, "delta": FRENCH_DELTA}).s0 == math.inf
