import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trialreturn import (
    MarketParams,
    ReturnKind,
    ReturnRule,
    expected_trial_utility,
    first_choice,
    second_choice,
    solve_behavior,
    third_choice,
    thresholds,
)
from trialreturn.behavior import purchase_shares
from trialreturn.oracle import trial_utility_quadrature
from conftest import markets


def test_third_choice_examples(reference):
    rule = third_choice(reference, 0.25)
    assert rule.kind is ReturnKind.THRESHOLD
    assert rule.beta_bar == pytest.approx(0.5, abs=1e-15)
    assert third_choice(reference, -0.75).kind is ReturnKind.ALL_KEEP
    assert third_choice(reference, 1.25).kind is ReturnKind.ALL_RETURN


def test_return_rule_rejects_bad_threshold():
    with pytest.raises(ValueError):
        ReturnRule(ReturnKind.THRESHOLD, 1.0)
    with pytest.raises(ValueError):
        ReturnRule(ReturnKind.ALL_KEEP, 0.3)


def test_trial_utility_examples(reference):
    assert expected_trial_utility(reference, 0.25) == pytest.approx(1.0, abs=1e-15)
    # Frozen against the quadrature oracle.
    assert expected_trial_utility(reference, 0.6) == pytest.approx(0.855625, abs=1e-12)
    assert trial_utility_quadrature(reference, 0.6) == pytest.approx(0.855625, abs=1e-9)
    assert expected_trial_utility(reference, -0.75) == pytest.approx(0.5 * 2.0 + 0.75)


def test_second_choice_examples(reference, high_cost):
    assert second_choice(high_cost, 0.5)
    assert not second_choice(high_cost, 0.5 + 1e-6)
    assert not second_choice(reference, 0.3)
    assert second_choice(reference, 0.2)
    assert second_choice(reference, 0.25)


def test_first_choice_examples(reference):
    assert first_choice(reference, 1.0, False)
    assert not first_choice(reference, 1.01, False)
    assert first_choice(reference, 0.2, True)


@pytest.mark.parametrize(
    "p1, visits, tries, kind, shares",
    [
        (0.25, True, True, ReturnKind.THRESHOLD, (0.625, 0.375)),
        (1.0, True, False, ReturnKind.ALL_RETURN, (0.25, 0.75)),
        (2.0, False, False, ReturnKind.ALL_RETURN, (0.0, 1.0)),
    ],
)
def test_solve_behavior_examples(reference, p1, visits, tries, kind, shares):
    prof = solve_behavior(reference, p1)
    assert (prof.visits, prof.tries_if_misfit) == (visits, tries)
    if p1 != 1.0:
        assert prof.return_rule.kind is kind
    assert (prof.share_buy_p1, prof.share_buy_p2) == pytest.approx(shares, abs=1e-15)


def test_price_one_rule(reference):
    # 1.0 lies between the threshold landmarks, so the rule is a threshold one.
    rule = solve_behavior(reference, 1.0).return_rule
    assert rule.kind is ReturnKind.THRESHOLD and rule.beta_bar == pytest.approx(0.875)


def test_purchase_shares_clamps():
    assert purchase_shares(0.3, True, True, -0.2) == (1.0, 0.0, 0.0)
    s1, s2, ret = purchase_shares(0.3, True, True, 1.7)
    assert (s1, s2, ret) == pytest.approx((0.3, 0.7, 0.7))


@given(markets())
@settings(max_examples=15, deadline=None)
def test_behavior_partitions_price_axis(m):
    th = thresholds(m)
    for p1 in np.linspace(-m.v1, th.full_return + m.v1, 10_000):
        prof = solve_behavior(m, float(p1))
        assert prof.share_buy_p1 + prof.share_buy_p2 == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= prof.return_mass <= 1.0 - m.alpha + 1e-12
        if not prof.visits:
            assert (prof.share_buy_p1, prof.return_mass) == (0.0, 0.0)
        if prof.visits and not prof.tries_if_misfit:
            assert prof.share_buy_p1 == pytest.approx(m.alpha)


@given(markets(), st.floats(0.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_closed_form_matches_quadrature(m, u):
    th = thresholds(m)
    p1 = th.full_keep + u * (th.full_return - th.full_keep)
    assert expected_trial_utility(m, p1) == pytest.approx(
        trial_utility_quadrature(m, p1), abs=1e-9 * max(1.0, m.v1)
    )


@given(markets())
@settings(max_examples=100, deadline=None)
def test_trial_utility_convex_and_decreasing(m):
    th = thresholds(m)
    ps = np.linspace(th.full_keep, th.full_return, 401)
    u = np.array([expected_trial_utility(m, float(p)) for p in ps])
    assert np.all(np.diff(u) <= 1e-12 * max(1.0, m.v1))
    assert np.all(u[:-2] - 2 * u[1:-1] + u[2:] >= -1e-10 * max(1.0, m.v1))


@given(markets())
def test_trial_utility_continuous_at_landmarks(m):
    th = thresholds(m)
    eps = 1e-9 * m.v1
    for p in (th.full_keep, th.full_return):
        assert expected_trial_utility(m, p - eps) == pytest.approx(
            expected_trial_utility(m, p + eps), abs=1e-7 * max(1.0, m.v1)
        )


@given(markets(case="II"))
def test_indifference_at_try_landmark(m):
    p = thresholds(m).indifferent_trial
    assert abs(expected_trial_utility(m, p) - m.outside_utility) < 1e-12 * max(1.0, m.v1)


def test_ties_favor_retailer():
    m = MarketParams(2.0, 1.0, 0.0, 0.25, 0.125)
    th = thresholds(m)
    assert first_choice(m, th.visit_limit, False)
    assert second_choice(m, th.indifferent_trial)
    assert third_choice(m, th.full_keep).kind is ReturnKind.ALL_KEEP
