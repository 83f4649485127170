"""Oracle-vs-closed-form check suite behind the ``verify`` command."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from trialreturn.behavior import ReturnKind, expected_trial_utility, purchase_shares, solve_behavior
from trialreturn.market import CaseLabel, MarketParams, case_of, thresholds
from trialreturn.oracle import (
    SimConfig,
    expected_outcome,
    grid_search_optimum,
    simulate,
    trial_utility_quadrature,
)
from trialreturn.pricing import customer_side, interior_maximizer, optimize, quote_from_profile

# A statistical check whose 3-sigma half-width exceeds this (relative to the
# quantity's scale) is reported inconclusive instead of pass/fail.
CI_LIMIT = 0.01
EXACT_RTOL = 1e-9
OPTIMUM_PROFIT_TOL = 1e-6

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    observed: float
    expected: float
    tolerance: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class VerificationReport:
    market: MarketParams
    config: SimConfig
    coverage: bool
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def to_dict(self) -> dict:
        counts = {s: sum(c.status == s for c in self.checks) for s in (PASS, FAIL, INCONCLUSIVE)}
        return {
            "market": self.market.to_dict(),
            "config": dataclasses.asdict(self.config),
            "coverage": self.coverage,
            "passed": self.passed,
            "counts": counts,
            "checks": [c.to_dict() for c in self.checks],
        }


def probe_prices(params: MarketParams, coverage: bool = False) -> dict[str, float]:
    """Positive landmarks, the optimum and (cheap returns) a partial-return price."""
    th = thresholds(customer_side(params, coverage))
    probes = {k: v for k, v in th.as_dict().items() if v > 0}
    if case_of(params) is CaseLabel.LOW_RETURN_COST and not coverage:
        probes["interior"] = interior_maximizer(params)
    lo = max(th.full_keep, 0.0)
    if th.indifferent_trial > lo and case_of(customer_side(params, coverage)) is CaseLabel.LOW_RETURN_COST:
        probes["partial_return_mid"] = 0.5 * (lo + th.indifferent_trial)
    probes["optimum"] = optimize(params, coverage).optimal_p1
    return dict(sorted(probes.items(), key=lambda kv: (kv[1], kv[0])))


def _closed_form(params: MarketParams, p1: float, coverage: bool, beta_shift: float):
    profile = solve_behavior(customer_side(params, coverage), p1)
    if beta_shift:
        kind = profile.return_rule.kind
        base = {ReturnKind.ALL_KEEP: 0.0, ReturnKind.ALL_RETURN: 1.0}.get(kind, profile.return_rule.beta_bar)
        s1, s2, ret = purchase_shares(
            params.alpha, profile.visits, profile.tries_if_misfit, base + beta_shift
        )
        profile = dataclasses.replace(profile, share_buy_p1=s1, share_buy_p2=s2, return_mass=ret)
    return profile, quote_from_profile(params, p1, profile, coverage)


def _statistical(name: str, est: float, se: float, expected: float, scale: float) -> Check:
    half = 3.0 * se
    if se == 0.0:
        ok = abs(est - expected) <= 1e-12 * max(1.0, scale)
        return Check(name, PASS if ok else FAIL, est, expected, 0.0)
    if half > CI_LIMIT * max(1.0, scale):
        return Check(name, INCONCLUSIVE, est, expected, half)
    return Check(name, PASS if abs(est - expected) <= half else FAIL, est, expected, half)


def _exact(name: str, observed: float, expected: float, tol: float) -> Check:
    return Check(name, PASS if abs(observed - expected) <= tol else FAIL, observed, expected, tol)


def run_verification(
    params: MarketParams,
    config: SimConfig | None = None,
    coverage: bool = False,
    beta_shift: float = 0.0,
) -> VerificationReport:
    """Compare every closed form against the oracle at the probe prices.

    ``beta_shift`` perturbs the return threshold on the closed-form side only;
    it exists to confirm that the suite notices a wrong threshold.
    """
    config = config or SimConfig()
    cust = customer_side(params, coverage)
    scale = params.v1
    tol = EXACT_RTOL * max(1.0, scale)
    checks: list[Check] = []

    for label, p1 in probe_prices(params, coverage).items():
        profile, quote = _closed_form(params, p1, coverage, beta_shift)
        sim = simulate(params, p1, config, coverage)
        checks.append(_statistical(f"share_p1@{label}", sim.est_share_p1, sim.se_share_p1, profile.share_buy_p1, 1.0))
        checks.append(
            _statistical(f"return_mass@{label}", sim.est_return_mass, sim.se_return_mass, profile.return_mass, 1.0)
        )
        checks.append(_statistical(f"profit_mc@{label}", sim.est_profit, sim.se_profit, quote.profit, scale))

        exact = expected_outcome(params, p1, config, coverage)
        checks.append(_exact(f"profit_exact@{label}", exact.profit, quote.profit, tol))
        if profile.return_rule.kind is ReturnKind.THRESHOLD:
            checks.append(
                _exact(
                    f"trial_utility@{label}",
                    trial_utility_quadrature(cust, p1, config.quadrature_points),
                    expected_trial_utility(cust, p1),
                    tol,
                )
            )

    sol = optimize(params, coverage)
    g_price, g_profit = grid_search_optimum(params, config, coverage)
    checks.append(_exact("optimum_profit", g_profit, sol.optimal_profit, OPTIMUM_PROFIT_TOL))
    if sol.behavior.visits:
        checks.append(_exact("optimum_price", g_price, sol.optimal_p1, config.grid_step(params)))
    else:
        # Every no-visit price earns the same; only the regime can be compared.
        no_visit = not solve_behavior(cust, g_price).visits
        checks.append(Check("optimum_price", PASS if no_visit else FAIL, g_price, sol.optimal_p1, float("inf")))
    return VerificationReport(params, config, coverage, checks)
