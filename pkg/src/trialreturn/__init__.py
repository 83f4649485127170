"""Trial-and-return omnichannel pricing: customer backward induction, optimal
in-store price, region maps, and a Monte Carlo / grid-search oracle."""

from trialreturn.behavior import (
    BehaviorProfile,
    ReturnKind,
    ReturnRule,
    expected_trial_utility,
    first_choice,
    second_choice,
    solve_behavior,
    third_choice,
)
from trialreturn.market import (
    CaseLabel,
    MarketError,
    MarketParams,
    OrderingViolation,
    OutOfRange,
    Thresholds,
    WrongCase,
    case_of,
    thresholds,
    validate,
)
from trialreturn.oracle import SimConfig, SimResult, grid_search_optimum, simulate
from trialreturn.pricing import (
    CoverageComparison,
    PricingSolution,
    ProfitQuote,
    Regime,
    Region,
    compare_coverage,
    interior_maximizer,
    interior_vs_corner,
    optimize,
    optimize_case1,
    optimize_case2,
    profit_at,
)
from trialreturn.sweep import ProfitCurve, RegionMap, profit_curve, render, sweep_alpha_r, sweep_alpha_valueratio

__version__ = "0.1.0"
