"""Market primitives: the exogenous parameter tuple and its price landmarks.

A market is described by the values of the in-store product (``v1``) and the
online substitute (``v2``), the substitute's fixed online price (``p2_bar``),
the probability that the in-store product fits on inspection (``alpha``) and
the return cost expressed as a fraction of ``v1`` (``r``).

Every downstream computation is driven by five price landmarks at which
customer behavior changes. They are reported even when negative; whether a
landmark is a feasible price is decided by the pricing solver.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Mapping

# Relative slack used when comparing a price against a landmark. Prices that
# sit on a landmark up to rounding are treated as sitting exactly on it.
LANDMARK_RTOL = 1e-12


class MarketError(ValueError):
    """Base class for invalid market inputs."""


class OutOfRange(MarketError):
    def __init__(self, field: str, value: float, bound: str):
        self.field = field
        self.value = value
        super().__init__(f"{field} must satisfy {bound} (got {value!r})")


class OrderingViolation(MarketError):
    def __init__(self, v1: float, v2: float):
        self.field = "v1"
        super().__init__(f"v1 must exceed v2 (got v1={v1!r}, v2={v2!r})")


class WrongCase(MarketError):
    """Raised when an operation is called for the other return-cost case."""


class CaseLabel(str, Enum):
    HIGH_RETURN_COST = "CaseI"
    LOW_RETURN_COST = "CaseII"


@dataclass(frozen=True)
class MarketParams:
    v1: float
    v2: float
    p2_bar: float
    alpha: float
    r: float

    def __post_init__(self) -> None:
        for name in ("v1", "v2", "p2_bar", "alpha", "r"):
            value = getattr(self, name)
            if isinstance(value, int) and not isinstance(value, bool):
                object.__setattr__(self, name, float(value))

    @property
    def outside_utility(self) -> float:
        """Utility of buying the substitute online without visiting."""
        return self.v2 - self.p2_bar

    @property
    def return_cost(self) -> float:
        return self.r * self.v1

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "MarketParams":
        """Build (unvalidated) params, accepting ``p2`` as an alias of ``p2_bar``."""
        p2 = data["p2_bar"] if "p2_bar" in data else data["p2"]
        return cls(
            v1=float(data["v1"]),
            v2=float(data["v2"]),
            p2_bar=float(p2),
            alpha=float(data["alpha"]),
            r=float(data["r"]),
        )


def validate(params: MarketParams) -> MarketParams:
    """Check the parameter ranges and return the params unchanged.

    Raises:
        OutOfRange: a field is non-finite or outside its admissible interval.
        OrderingViolation: ``v1 <= v2``.
    """
    for name in ("v1", "v2", "p2_bar", "alpha", "r"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise OutOfRange(name, value, "a finite real value")
    if params.v2 <= 0:
        raise OutOfRange("v2", params.v2, "v2 > 0")
    if params.v1 <= params.v2:
        raise OrderingViolation(params.v1, params.v2)
    if not 0 < params.alpha < 1:
        raise OutOfRange("alpha", params.alpha, "0 < alpha < 1")
    if not 0 < params.r < 1:
        raise OutOfRange("r", params.r, "0 < r < 1")
    if not 0 <= params.p2_bar <= params.v2:
        raise OutOfRange("p2_bar", params.p2_bar, "0 <= p2_bar <= v2")
    return params


def case_of(params: MarketParams) -> CaseLabel:
    if params.r >= 0.5:
        return CaseLabel.HIGH_RETURN_COST
    return CaseLabel.LOW_RETURN_COST


@dataclass(frozen=True)
class Thresholds:
    """Price landmarks of one market.

    Attributes:
        full_keep: highest price at which every trial customer keeps the
            product (return threshold equals 0).
        indifferent_trial: price at which a misfit customer is indifferent
            between trying and buying the substitute, when returns are cheap.
        half_value: price at which trying and keeping for sure is worth the
            same as buying the substitute.
        visit_limit: highest price at which customers still visit the store.
        full_return: lowest price at which every trial customer returns
            (return threshold equals 1).
    """

    v1: float
    offset: float
    full_keep: float
    indifferent_trial: float
    half_value: float
    visit_limit: float
    full_return: float

    def return_threshold(self, p1: float) -> float:
        """Tolerance below which a trial customer returns the product.

        Affine in ``p1`` with slope ``1 / v1``; not clamped.
        """
        return (p1 - self.offset) / self.v1

    def mean_kept_tolerance(self, p1: float) -> float:
        return (1.0 + self.return_threshold(p1)) / 2.0

    def tolerance(self) -> float:
        return LANDMARK_RTOL * max(1.0, self.v1)

    def as_dict(self) -> dict[str, float]:
        return {
            "full_keep": self.full_keep,
            "indifferent_trial": self.indifferent_trial,
            "half_value": self.half_value,
            "visit_limit": self.visit_limit,
            "full_return": self.full_return,
        }


def thresholds(params: MarketParams) -> Thresholds:
    v1 = params.v1
    # Price at which the return threshold is zero; every landmark is this
    # offset shifted by a multiple of v1.
    offset = params.r * v1 - params.v2 + params.p2_bar
    base = params.p2_bar - params.v2
    return Thresholds(
        v1=v1,
        offset=offset,
        full_keep=offset,
        indifferent_trial=(1.0 + params.r - math.sqrt(2.0 * params.r)) * v1 + base,
        half_value=0.5 * v1 + base,
        visit_limit=v1 + base,
        full_return=(1.0 + params.r) * v1 + base,
    )
