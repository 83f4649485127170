"""Independent verification engine.

Nothing here calls the customer-behavior closed forms. Customers are replayed
one by one from raw payoffs: nature draws fit and tolerance, the keep/return
choice compares the two payoffs directly, and the look-ahead values used for
the try and visit choices are integrals over tolerance computed numerically.

The grid search is the brute-force counterpart of the pricing optimizers: it
scans the analytic profit on a dense price grid that also contains every
landmark price exactly, since profit jumps at landmarks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from trialreturn.market import MarketParams, thresholds
from trialreturn.pricing import customer_side, profit_grid

CHUNK_SIZE = 1 << 16
# Look-ahead values within this (relative) distance count as indifference.
LOOKAHEAD_RTOL = 1e-10


class InvalidConfig(ValueError):
    pass


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TRIALRETURN_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SimConfig:
    n_customers: int = 1_000_000
    seed: int = 42
    # None means 1e-4 * v1 for the market at hand.
    price_grid_step: float | None = None
    quadrature_points: int = 10_000
    workers: int = 1

    def __post_init__(self) -> None:
        if int(self.n_customers) != self.n_customers or self.n_customers < 1:
            raise InvalidConfig(f"n_customers must be a positive integer (got {self.n_customers!r})")
        if self.price_grid_step is not None and not self.price_grid_step > 0:
            raise InvalidConfig(f"price_grid_step must be > 0 (got {self.price_grid_step!r})")
        if self.quadrature_points < 100:
            raise InvalidConfig(f"quadrature_points must be >= 100 (got {self.quadrature_points!r})")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer (got {self.seed!r})")
        if self.workers < 1:
            raise InvalidConfig(f"workers must be >= 1 (got {self.workers!r})")

    def grid_step(self, params: MarketParams) -> float:
        if self.price_grid_step is None:
            return 1e-4 * params.v1
        return self.price_grid_step


@dataclass(frozen=True)
class SimResult:
    est_share_p1: float
    se_share_p1: float
    est_share_p2: float
    se_share_p2: float
    est_return_mass: float
    se_return_mass: float
    est_profit: float
    se_profit: float
    n: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ExpectedOutcome:
    """Population averages obtained by integrating over tolerance."""

    visits: bool
    tries: bool
    trial_utility: float
    share_p1: float
    share_p2: float
    return_mass: float
    profit: float


# -- raw payoffs ----------------------------------------------------------


def _keep_payoff(cp: MarketParams, p1: float, beta):
    return beta * cp.v1 - p1


def _return_payoff(cp: MarketParams) -> float:
    return cp.v2 - cp.p2_bar - cp.r * cp.v1


def _stay_home(cp: MarketParams) -> float:
    return cp.v2 - cp.p2_bar


def _kink(cp: MarketParams, p1: float) -> float | None:
    """Tolerance where keeping and returning pay the same, if inside (0, 1)."""
    gap = lambda b: _keep_payoff(cp, p1, b) - _return_payoff(cp)
    lo, hi = gap(0.0), gap(1.0)
    if lo >= 0 or hi <= 0:
        return None
    return brentq(gap, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _piecewise_midpoint(f, breaks: list[float], n: int) -> float:
    # Composite midpoint rule on each piece; exact for piecewise-linear f
    # whose kinks are in ``breaks``.
    total = 0.0
    width = breaks[-1] - breaks[0]
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        m = max(1, int(round(n * (b - a) / width)))
        h = (b - a) / m
        nodes = a + h * (np.arange(m) + 0.5)
        total += h * math.fsum(f(nodes))
    return total


def _breaks(cp: MarketParams, p1: float) -> list[float]:
    k = _kink(cp, p1)
    return [0.0, 1.0] if k is None else [0.0, k, 1.0]


def trial_utility_quadrature(params: MarketParams, p1: float, n_points: int = 10_000) -> float:
    """Expected utility of a trial by numerical integration over tolerance."""
    ret = _return_payoff(params)
    f = lambda b: np.maximum(_keep_payoff(params, p1, b), ret)
    return _piecewise_midpoint(f, _breaks(params, p1), n_points)


def _keep_fraction(cp: MarketParams, p1: float, n_points: int) -> float:
    ret = _return_payoff(cp)
    f = lambda b: (_keep_payoff(cp, p1, b) >= ret).astype(float)
    return _piecewise_midpoint(f, _breaks(cp, p1), n_points)


def _lookahead(cp: MarketParams, p1: float, n_points: int) -> tuple[bool, bool, float]:
    tol = LOOKAHEAD_RTOL * max(1.0, cp.v1)
    home = _stay_home(cp)
    trial = trial_utility_quadrature(cp, p1, n_points)
    tries = trial >= home - tol
    misfit = trial if tries else home
    visit_value = cp.alpha * (cp.v1 - p1) + (1 - cp.alpha) * misfit
    return tries, visit_value >= home - tol, trial


def expected_outcome(
    params: MarketParams, p1: float, config: SimConfig | None = None, coverage: bool = False
) -> ExpectedOutcome:
    config = config or SimConfig()
    cp = customer_side(params, coverage)
    n = config.quadrature_points
    tries, visits, trial = _lookahead(cp, p1, n)
    a = params.alpha
    if not visits:
        share1, returned = 0.0, 0.0
    elif not tries:
        share1, returned = a, 0.0
    else:
        kept = _keep_fraction(cp, p1, n)
        share1, returned = a + (1 - a) * kept, (1 - a) * (1 - kept)
    share2 = 1.0 - share1
    profit = share1 * p1 + share2 * params.p2_bar
    if coverage:
        profit -= returned * params.r * params.v1
    return ExpectedOutcome(visits, tries, trial, share1, share2, returned, profit)


# -- Monte Carlo ----------------------------------------------------------


def _chunk_counts(
    cp: MarketParams, p1: float, tries: bool, seed: int, index: int, size: int
) -> tuple[int, int]:
    """(buyers of product 1, returners) among one chunk of customers."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    fit = rng.random(size) < cp.alpha
    beta = rng.random(size)  # [0, 1)
    if not tries:
        return int(fit.sum()), 0
    keep = _keep_payoff(cp, p1, beta) >= _return_payoff(cp)
    buy1 = fit | keep
    return int(buy1.sum()), int((~buy1).sum())


def _se(counts: list[int], values: list[float], n: int) -> tuple[float, float]:
    mean = math.fsum(c * x for c, x in zip(counts, values)) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(c * (x - mean) ** 2 for c, x in zip(counts, values)) / (n - 1)
    return mean, math.sqrt(var / n)


def simulate(
    params: MarketParams, p1: float, config: SimConfig | None = None, coverage: bool = False
) -> SimResult:
    """Monte Carlo replay of the customer game at price ``p1``."""
    config = config or SimConfig()
    cp = customer_side(params, coverage)
    n = int(config.n_customers)
    tries, visits, _ = _lookahead(cp, p1, config.quadrature_points)

    if not visits:
        n1 = n_ret = 0
    else:
        sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]
        job = lambda i: _chunk_counts(cp, p1, tries, config.seed, i, sizes[i])
        if config.workers > 1 and len(sizes) > 1:
            with ThreadPoolExecutor(config.workers) as pool:
                parts = list(pool.map(job, range(len(sizes))))
        else:
            parts = [job(i) for i in range(len(sizes))]
        n1 = sum(p[0] for p in parts)
        n_ret = sum(p[1] for p in parts)

    n2 = n - n1
    share1, se1 = _se([n1, n2], [1.0, 0.0], n)
    share2, se2 = _se([n1, n2], [0.0, 1.0], n)
    ret, se_ret = _se([n_ret, n - n_ret], [1.0, 0.0], n)
    fee = params.r * params.v1 if coverage else 0.0
    profit, se_profit = _se(
        [n1, n2 - n_ret, n_ret], [p1, params.p2_bar, params.p2_bar - fee], n
    )
    return SimResult(share1, se1, share2, se2, ret, se_ret, profit, se_profit, n, config.seed)


# -- brute-force price search ---------------------------------------------


def landmark_prices(params: MarketParams, coverage: bool = False) -> list[float]:
    marks = set(thresholds(params).as_dict().values())
    if coverage:
        marks |= set(thresholds(customer_side(params, True)).as_dict().values())
    return sorted(marks)


def grid_search_optimum(
    params: MarketParams, config: SimConfig | None = None, coverage: bool = False
) -> tuple[float, float]:
    """Argmax of profit over a dense grid on (0, full-return price + v1].

    Every positive landmark inside the window is added to the grid. Ties go
    to the lowest price.
    """
    config = config or SimConfig()
    step = config.grid_step(params)
    hi = thresholds(params).full_return + params.v1
    count = max(1, int(math.floor(hi / step)))
    grid = step * np.arange(1, count + 1, dtype=float)
    marks = [p for p in landmark_prices(params, coverage) if 0 < p <= hi]
    prices = np.unique(np.concatenate([grid[grid <= hi], np.asarray(marks, dtype=float)]))
    profits, _ = profit_grid(params, prices, coverage)
    best = int(np.argmax(profits))
    return float(prices[best]), float(profits[best])
