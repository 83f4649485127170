"""Retailer profit and the optimal in-store price.

Selling and store costs are zero, so profit is revenue: ``p1`` from every
in-store buyer plus ``p2_bar`` from every online buyer, minus the return fees
the retailer reimburses when it runs a coverage policy.

Profit is piecewise in ``p1``: linear on the keep-all and no-trial stretches,
a concave quadratic on the partial-return stretch, flat once nobody visits.
The optimum therefore lies on a short list of candidate prices, which the
optimizers below enumerate and compare.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from trialreturn.behavior import BehaviorProfile, ReturnKind, solve_behavior
from trialreturn.market import (
    CaseLabel,
    MarketParams,
    WrongCase,
    case_of,
    thresholds,
)

# Interior maximizer counts as interior only if it clears the corner by this
# much (relative to v1); closer calls go to the corner.
INTERIOR_RTOL = 1e-9
# Candidate profits closer than this (relative) are ties; ties go to the
# lower price.
PROFIT_RTOL = 1e-12


class Regime(str, Enum):
    KEEP_ALL = "Pi1"
    ONLINE_ONLY = "Pi2bar"
    NO_TRIAL = "Pi3"
    PARTIAL_RETURN = "Pi4"


class Region(str, Enum):
    """Regime of an optimum, with the partial-return regime split by how
    the optimum was reached (corner landmark or interior maximizer)."""

    KEEP_ALL = "Pi1"
    ONLINE_ONLY = "Pi2bar"
    NO_TRIAL = "Pi3"
    CORNER = "Pi4C"
    INTERIOR = "Pi4I"


@dataclass(frozen=True)
class ProfitQuote:
    p1: float
    profit: float
    regime: Regime
    component_p1_sales: float
    component_p2_sales: float
    return_cost_borne_by_retailer: float = 0.0
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "p1": self.p1,
            "profit": self.profit,
            "regime": self.regime.value,
            "component_p1_sales": self.component_p1_sales,
            "component_p2_sales": self.component_p2_sales,
            "return_cost_borne_by_retailer": self.return_cost_borne_by_retailer,
        }


@dataclass(frozen=True)
class PricingSolution:
    optimal_p1: float
    optimal_profit: float
    regime: Regime
    behavior: BehaviorProfile
    candidates: list[ProfitQuote]
    interior_maximizer_used: bool
    coverage: bool = False

    @property
    def region(self) -> Region:
        if self.regime is Regime.PARTIAL_RETURN:
            return Region.INTERIOR if self.interior_maximizer_used else Region.CORNER
        return Region(self.regime.value)

    def to_dict(self) -> dict:
        return {
            "optimal_p1": self.optimal_p1,
            "optimal_profit": self.optimal_profit,
            "regime": self.regime.value,
            "region": self.region.value,
            "interior_maximizer_used": self.interior_maximizer_used,
            "coverage": self.coverage,
            "behavior": self.behavior.to_dict(),
            "candidates": [q.to_dict() for q in self.candidates],
        }


@dataclass(frozen=True)
class CoverageComparison:
    profit_no_coverage: float
    profit_with_coverage: float
    recommend_coverage: bool
    optimal_p1_each: tuple[float, float]
    behavior_unchanged: bool
    flat_charge_profit: float
    solutions: tuple[PricingSolution, PricingSolution] = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "profit_no_coverage": self.profit_no_coverage,
            "profit_with_coverage": self.profit_with_coverage,
            "recommend_coverage": self.recommend_coverage,
            "optimal_p1_each": list(self.optimal_p1_each),
            "behavior_unchanged": self.behavior_unchanged,
            "flat_charge_profit": self.flat_charge_profit,
            "no_coverage": self.solutions[0].to_dict(),
            "with_coverage": self.solutions[1].to_dict(),
        }


def customer_side(params: MarketParams, coverage: bool) -> MarketParams:
    """Params as customers see them: a covered return costs them nothing."""
    if coverage:
        return dataclasses.replace(params, r=0.0)
    return params


def regime_of(profile: BehaviorProfile) -> Regime:
    if not profile.visits:
        return Regime.ONLINE_ONLY
    if not profile.tries_if_misfit:
        return Regime.NO_TRIAL
    if profile.return_rule.kind is ReturnKind.ALL_KEEP:
        return Regime.KEEP_ALL
    return Regime.PARTIAL_RETURN


def quote_from_profile(
    params: MarketParams, p1: float, profile: BehaviorProfile, coverage: bool, label: str = ""
) -> ProfitQuote:
    sales1 = profile.share_buy_p1 * p1
    sales2 = profile.share_buy_p2 * params.p2_bar
    refunds = profile.return_mass * params.return_cost if coverage else 0.0
    return ProfitQuote(
        p1=p1,
        profit=sales1 + sales2 - refunds,
        regime=regime_of(profile),
        component_p1_sales=sales1,
        component_p2_sales=sales2,
        return_cost_borne_by_retailer=refunds,
        label=label,
    )


def profit_at(params: MarketParams, p1: float, coverage: bool = False, label: str = "") -> ProfitQuote:
    profile = solve_behavior(customer_side(params, coverage), p1)
    return quote_from_profile(params, p1, profile, coverage, label)


_REGIME_CODES = (Regime.KEEP_ALL, Regime.ONLINE_ONLY, Regime.NO_TRIAL, Regime.PARTIAL_RETURN)


def profit_grid(
    params: MarketParams, prices: np.ndarray, coverage: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`profit_at` over an array of prices.

    Returns the profits and integer regime codes (indices into
    ``Regime`` members in declaration order).
    """
    p = np.asarray(prices, dtype=float)
    cust = customer_side(params, coverage)
    th = thresholds(cust)
    tol = th.tolerance()
    v1, alpha = params.v1, params.alpha
    stay_home = cust.outside_utility
    after_return = stay_home - cust.return_cost

    keep_all = p <= th.full_keep + tol
    return_all = ~keep_all & (p >= th.full_return - tol)
    beta_bar = np.where(keep_all, 0.0, np.where(return_all, 1.0, th.return_threshold(p)))

    if case_of(cust) is CaseLabel.HIGH_RETURN_COST:
        tries = p <= th.half_value + tol
    else:
        tries = p <= th.indifferent_trial + tol

    trial_utility = np.where(
        keep_all,
        0.5 * v1 - p,
        (1.0 - beta_bar) * ((1.0 + beta_bar) / 2.0 * v1 - p) + beta_bar * after_return,
    )
    misfit = np.where(tries, trial_utility, stay_home)
    visits = alpha * (v1 - p) + (1.0 - alpha) * misfit >= stay_home - tol

    returned = np.where(visits & tries, (1.0 - alpha) * beta_bar, 0.0)
    share1 = np.where(visits, np.where(tries, 1.0 - returned, alpha), 0.0)
    share2 = 1.0 - share1
    profit = share1 * p + share2 * params.p2_bar
    if coverage:
        profit = profit - returned * params.return_cost

    codes = np.where(
        ~visits, 1, np.where(~tries, 2, np.where(keep_all, 0, 3))
    ).astype(np.int8)
    return profit, codes


def regime_from_code(code: int) -> Regime:
    return _REGIME_CODES[int(code)]


def _require_low_cost(params: MarketParams) -> None:
    if case_of(params) is not CaseLabel.LOW_RETURN_COST:
        raise WrongCase(f"requires r < 1/2 (got r={params.r})")


def _require_high_cost(params: MarketParams) -> None:
    if case_of(params) is not CaseLabel.HIGH_RETURN_COST:
        raise WrongCase(f"requires r >= 1/2 (got r={params.r})")


def interior_maximizer(params: MarketParams) -> float:
    """Unconstrained maximizer of the partial-return profit quadratic."""
    _require_low_cost(params)
    a = params.alpha
    return (a * params.v1 + (1 - a) * ((1 + params.r) * params.v1 - params.v2 + 2 * params.p2_bar)) / (
        2 * (1 - a)
    )


def corner_gap(params: MarketParams) -> float:
    """Distance from the try/no-try landmark up to the interior maximizer.

    Negative means the quadratic peaks inside the partial-return stretch.
    """
    return interior_maximizer(params) - thresholds(params).indifferent_trial


def interior_vs_corner(params: MarketParams) -> bool:
    """True when the partial-return optimum is interior rather than the corner."""
    return corner_gap(params) < -INTERIOR_RTOL * max(1.0, params.v1)


def _best(quotes: list[ProfitQuote]) -> ProfitQuote:
    best = None
    for q in sorted(quotes, key=lambda q: q.p1):
        if best is None or q.profit > best.profit + PROFIT_RTOL * max(1.0, abs(best.profit)):
            best = q
    return best


def _solution(
    params: MarketParams, quotes: list[ProfitQuote], interior_label: str | None, coverage: bool
) -> PricingSolution:
    best = _best(quotes)
    return PricingSolution(
        optimal_p1=best.p1,
        optimal_profit=best.profit,
        regime=best.regime,
        behavior=solve_behavior(customer_side(params, coverage), best.p1),
        candidates=quotes,
        interior_maximizer_used=interior_label is not None and best.label == interior_label,
        coverage=coverage,
    )


def optimize_case1(params: MarketParams) -> PricingSolution:
    """Optimum when returns are expensive (``r >= 1/2``).

    Only two prices compete: the highest price at which misfits still try
    (and all keep), and the highest price at which customers still visit.
    """
    _require_high_cost(params)
    th = thresholds(params)
    quotes = []
    if th.half_value > 0:
        quotes.append(profit_at(params, th.half_value, label="half_value"))
    quotes.append(profit_at(params, th.visit_limit, label="visit_limit"))
    return _solution(params, quotes, None, coverage=False)


def optimize_case2(params: MarketParams) -> PricingSolution:
    """Optimum when returns are cheap (``r < 1/2``)."""
    _require_low_cost(params)
    th = thresholds(params)
    quotes = []
    if th.full_keep > 0:
        quotes.append(profit_at(params, th.full_keep, label="full_keep"))
    if interior_vs_corner(params):
        peak, label = interior_maximizer(params), "interior"
    else:
        peak, label = th.indifferent_trial, "indifferent_trial"
    if peak > 0:
        quotes.append(profit_at(params, peak, label=label))
    quotes.append(profit_at(params, th.visit_limit, label="visit_limit"))
    return _solution(params, quotes, "interior", coverage=False)


def covered_maximizer(params: MarketParams) -> float:
    """Peak of the covered-policy profit quadratic.

    Under coverage every visiting misfit tries; profit on the trial stretch
    is ``gamma*p1 + (1-gamma)*p2_bar - (1-alpha)*beta_bar*r*v1`` with the
    return threshold computed at zero customer return cost.
    """
    a = params.alpha
    return (params.v1 / (1 - a) - params.r * params.v1 - params.v2 + 2 * params.p2_bar) / 2


def no_visit_price(params: MarketParams) -> float:
    """A representative price at which nobody visits the store."""
    return thresholds(params).visit_limit + params.v1


def optimize_covered(params: MarketParams) -> PricingSolution:
    """Optimum when the retailer reimburses every return fee."""
    th = thresholds(customer_side(params, True))
    quotes = []
    peak = covered_maximizer(params)
    if 0 < peak < th.visit_limit - th.tolerance():
        quotes.append(profit_at(params, peak, coverage=True, label="interior"))
    quotes.append(profit_at(params, th.visit_limit, coverage=True, label="visit_limit"))
    quotes.append(profit_at(params, no_visit_price(params), coverage=True, label="no_visit"))
    return _solution(params, quotes, "interior", coverage=True)


def optimize(params: MarketParams, coverage: bool = False) -> PricingSolution:
    if coverage:
        return optimize_covered(params)
    if case_of(params) is CaseLabel.HIGH_RETURN_COST:
        return optimize_case1(params)
    return optimize_case2(params)


def _flat_charge_profit(params: MarketParams) -> float:
    # Alternative accounting: one flat fee r*v1 whenever any customer returns.
    cust = customer_side(params, True)
    th = thresholds(cust)
    prices = [th.visit_limit, no_visit_price(params)]
    a = params.alpha
    revenue_peak = (a * params.v1 + (1 - a) * (params.v1 - params.v2 + 2 * params.p2_bar)) / (2 * (1 - a))
    if 0 < revenue_peak < th.visit_limit:
        prices.append(revenue_peak)
    best = -np.inf
    for p in prices:
        profile = solve_behavior(cust, p)
        revenue = profile.share_buy_p1 * p + profile.share_buy_p2 * params.p2_bar
        charge = params.return_cost if profile.return_mass > 0 else 0.0
        best = max(best, revenue - charge)
    return float(best)


def compare_coverage(params: MarketParams) -> CoverageComparison:
    """Optimize with and without reimbursing return fees and compare."""
    plain = optimize(params)
    covered = optimize_covered(params)
    b0, b1 = plain.behavior, covered.behavior
    unchanged = (
        b0.visits == b1.visits
        and b0.tries_if_misfit == b1.tries_if_misfit
        and b0.share_buy_p1 == b1.share_buy_p1
        and b0.return_mass == b1.return_mass
    )
    return CoverageComparison(
        profit_no_coverage=plain.optimal_profit,
        profit_with_coverage=covered.optimal_profit,
        recommend_coverage=covered.optimal_profit > plain.optimal_profit,
        optimal_p1_each=(plain.optimal_p1, covered.optimal_p1),
        behavior_unchanged=unchanged,
        flat_charge_profit=_flat_charge_profit(params),
        solutions=(plain, covered),
    )
