import math

import pytest
from hypothesis import given

from trialreturn import (
    CaseLabel,
    MarketParams,
    OrderingViolation,
    OutOfRange,
    case_of,
    thresholds,
    validate,
)
from conftest import markets


def test_reference_market_is_valid(reference):
    assert validate(reference) is reference


@pytest.mark.parametrize(
    "kwargs, err, field",
    [
        (dict(v1=1.0, v2=1.0), OrderingViolation, "v1"),
        (dict(v1=1.0, v2=2.0), OrderingViolation, "v1"),
        (dict(alpha=1.0), OutOfRange, "alpha"),
        (dict(alpha=0.0), OutOfRange, "alpha"),
        (dict(r=0.0), OutOfRange, "r"),
        (dict(r=1.0), OutOfRange, "r"),
        (dict(v2=0.0, v1=1.0), OutOfRange, "v2"),
        (dict(p2_bar=-0.1), OutOfRange, "p2_bar"),
        (dict(p2_bar=1.5), OutOfRange, "p2_bar"),
        (dict(v1=float("nan")), OutOfRange, "v1"),
        (dict(r=float("inf")), OutOfRange, "r"),
    ],
)
def test_invalid_markets(kwargs, err, field):
    base = dict(v1=2.0, v2=1.0, p2_bar=0.0, alpha=0.25, r=0.125)
    base.update(kwargs)
    with pytest.raises(err) as info:
        validate(MarketParams(**base))
    assert info.value.field == field


def test_ordering_message():
    with pytest.raises(OrderingViolation, match="v1 must exceed v2"):
        validate(MarketParams(1.0, 2.0, 0.0, 0.25, 0.125))


def test_p2_alias_and_int_coercion():
    m = MarketParams.from_mapping({"v1": 2, "v2": 1, "p2": 0, "alpha": 0.25, "r": 0.125})
    assert m == MarketParams(2.0, 1.0, 0.0, 0.25, 0.125)
    assert isinstance(MarketParams(2, 1, 0, 0.5, 0.5).v1, float)


@pytest.mark.parametrize(
    "r, expected",
    [(0.5, CaseLabel.HIGH_RETURN_COST), (0.125, CaseLabel.LOW_RETURN_COST), (0.499999, CaseLabel.LOW_RETURN_COST)],
)
def test_case_boundary(reference, r, expected):
    assert case_of(MarketParams(2.0, 1.0, 0.0, 0.25, r)) is expected
    assert expected.value in ("CaseI", "CaseII")


def test_reference_landmarks(reference):
    th = thresholds(reference)
    assert th.full_keep == pytest.approx(-0.75, abs=1e-15)
    assert th.indifferent_trial == pytest.approx(0.25, abs=1e-15)
    assert th.visit_limit == pytest.approx(1.0, abs=1e-15)
    assert th.full_return == pytest.approx(1.25, abs=1e-15)
    assert th.half_value == pytest.approx(0.0, abs=1e-15)
    assert th.return_threshold(th.full_keep) == pytest.approx(0.0, abs=1e-15)
    assert th.return_threshold(th.indifferent_trial) == pytest.approx(1 - math.sqrt(0.25), abs=1e-15)


@given(markets())
def test_return_threshold_hits_zero_and_one(m):
    th = thresholds(m)
    assert th.return_threshold(th.full_keep) == pytest.approx(0.0, abs=1e-12)
    assert th.return_threshold(th.full_return) == pytest.approx(1.0, abs=1e-12)
    assert th.return_threshold(th.indifferent_trial) == pytest.approx(1 - math.sqrt(2 * m.r), abs=1e-12)


@given(markets())
def test_landmark_order(m):
    th = thresholds(m)
    assert th.full_keep < th.full_return
    assert th.half_value < th.visit_limit < th.full_return
    if case_of(m) is CaseLabel.LOW_RETURN_COST:
        assert th.full_keep < th.indifferent_trial < th.visit_limit
    else:
        assert th.half_value <= th.full_keep + 1e-12 * m.v1
