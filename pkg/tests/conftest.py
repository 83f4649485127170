import numpy as np
import pytest
from hypothesis import strategies as st

from trialreturn import MarketParams

REFERENCE = MarketParams(v1=2.0, v2=1.0, p2_bar=0.0, alpha=0.25, r=0.125)
HIGH_COST = MarketParams(v1=3.0, v2=1.0, p2_bar=0.0, alpha=0.2, r=0.6)


def draw_market(rng: np.random.Generator, case: str) -> MarketParams:
    """One random admissible market in the requested return-cost case."""
    v2 = rng.uniform(0.2, 3.0)
    v1 = v2 * rng.uniform(1.05, 8.0)
    r = rng.uniform(0.5, 0.98) if case == "I" else rng.uniform(0.02, 0.49)
    return MarketParams(v1, v2, v2 * rng.uniform(0.0, 1.0), rng.uniform(0.02, 0.98), r)


@st.composite
def markets(draw, case=None):
    v2 = draw(st.floats(0.2, 3.0))
    v1 = v2 * draw(st.floats(1.05, 8.0))
    p2 = v2 * draw(st.floats(0.0, 1.0))
    alpha = draw(st.floats(0.02, 0.98))
    if case is None:
        case = draw(st.sampled_from(["I", "II"]))
    r = draw(st.floats(0.5, 0.98)) if case == "I" else draw(st.floats(0.02, 0.49))
    return MarketParams(v1, v2, p2, alpha, r)


@pytest.fixture
def reference():
    return REFERENCE


@pytest.fixture
def high_cost():
    return HIGH_COST
