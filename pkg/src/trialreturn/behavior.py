"""Backward induction over the customer's three decisions.

The customer first decides whether to visit the store, then (if the product
does not fit) whether to take it home on trial, and finally, after learning
their tolerance ``beta``, whether to keep it or return it. Each stage is
solved from the last one backwards; indifference is always resolved in the
retailer's favor (visit, try, keep).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from trialreturn.market import CaseLabel, MarketParams, case_of, thresholds


class ReturnKind(str, Enum):
    ALL_KEEP = "AllKeep"
    ALL_RETURN = "AllReturn"
    THRESHOLD = "ThresholdReturn"


@dataclass(frozen=True)
class ReturnRule:
    kind: ReturnKind
    beta_bar: float | None = None

    def __post_init__(self) -> None:
        if self.kind is ReturnKind.THRESHOLD:
            if self.beta_bar is None or not 0.0 < self.beta_bar < 1.0:
                raise ValueError(f"threshold rule needs beta_bar in (0, 1), got {self.beta_bar}")
        elif self.beta_bar is not None:
            raise ValueError(f"{self.kind.value} carries no threshold")


@dataclass(frozen=True)
class BehaviorProfile:
    visits: bool
    tries_if_misfit: bool
    return_rule: ReturnRule
    share_buy_p1: float
    share_buy_p2: float
    return_mass: float
    expected_utility: float

    def to_dict(self) -> dict:
        return {
            "visits": self.visits,
            "tries_if_misfit": self.tries_if_misfit,
            "return_rule": self.return_rule.kind.value,
            "beta_bar": self.return_rule.beta_bar,
            "share_buy_p1": self.share_buy_p1,
            "share_buy_p2": self.share_buy_p2,
            "return_mass": self.return_mass,
            "expected_utility": self.expected_utility,
        }


def third_choice(params: MarketParams, p1: float) -> ReturnRule:
    """Keep/return rule of a customer holding the product on trial."""
    th = thresholds(params)
    tol = th.tolerance()
    if p1 <= th.full_keep + tol:
        return ReturnRule(ReturnKind.ALL_KEEP)
    if p1 >= th.full_return - tol:
        return ReturnRule(ReturnKind.ALL_RETURN)
    return ReturnRule(ReturnKind.THRESHOLD, th.return_threshold(p1))


def expected_trial_utility(params: MarketParams, p1: float) -> float:
    """Expected utility of trying the product, before ``beta`` is observed."""
    rule = third_choice(params, p1)
    after_return = params.outside_utility - params.return_cost
    if rule.kind is ReturnKind.ALL_KEEP:
        return 0.5 * params.v1 - p1
    if rule.kind is ReturnKind.ALL_RETURN:
        return after_return
    b = rule.beta_bar
    mean_kept = (1.0 + b) / 2.0
    return (1.0 - b) * (mean_kept * params.v1 - p1) + b * after_return


def second_choice(params: MarketParams, p1: float) -> bool:
    """Whether a misfit customer takes the product home on trial."""
    th = thresholds(params)
    tol = th.tolerance()
    if case_of(params) is CaseLabel.HIGH_RETURN_COST:
        return p1 <= th.half_value + tol
    return p1 <= th.indifferent_trial + tol


def first_choice(params: MarketParams, p1: float, tries_if_misfit: bool) -> bool:
    """Whether customers visit the store, given the trial decision below."""
    stay_home = params.outside_utility
    if tries_if_misfit:
        misfit = expected_trial_utility(params, p1)
    else:
        misfit = stay_home
    visit = params.alpha * (params.v1 - p1) + (1.0 - params.alpha) * misfit
    return visit >= stay_home - thresholds(params).tolerance()


def purchase_shares(
    alpha: float, visits: bool, tries: bool, beta_bar: float
) -> tuple[float, float, float]:
    """(share buying product 1, share buying product 2, returned mass)."""
    if not visits:
        return 0.0, 1.0, 0.0
    if not tries:
        return alpha, 1.0 - alpha, 0.0
    returned = (1.0 - alpha) * min(max(beta_bar, 0.0), 1.0)
    return 1.0 - returned, returned, returned


def solve_behavior(params: MarketParams, p1: float) -> BehaviorProfile:
    rule = third_choice(params, p1)
    tries = second_choice(params, p1)
    visits = first_choice(params, p1, tries)

    if rule.kind is ReturnKind.ALL_KEEP:
        beta_bar = 0.0
    elif rule.kind is ReturnKind.ALL_RETURN:
        beta_bar = 1.0
    else:
        beta_bar = rule.beta_bar
    share1, share2, returned = purchase_shares(params.alpha, visits, tries, beta_bar)

    stay_home = params.outside_utility
    if not visits:
        utility = stay_home
    else:
        misfit = expected_trial_utility(params, p1) if tries else stay_home
        utility = params.alpha * (params.v1 - p1) + (1.0 - params.alpha) * misfit

    return BehaviorProfile(
        visits=visits,
        tries_if_misfit=tries,
        return_rule=rule,
        share_buy_p1=share1,
        share_buy_p2=share2,
        return_mass=returned,
        expected_utility=utility,
    )
