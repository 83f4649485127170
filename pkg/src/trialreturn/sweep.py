"""Parameter sweeps (region maps) and profit-vs-price curves, plus renderers.

Region maps solve the pricing problem on every cell of a 2-D parameter grid
and record which regime the optimum falls in. Profit curves sample the profit
function along the price axis with every landmark included as an exact
sample, so jumps show up where they really are.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union
from xml.sax.saxutils import escape

import numpy as np

from trialreturn.market import CaseLabel, MarketParams, WrongCase, case_of, thresholds, validate
from trialreturn.pricing import (
    Region,
    Regime,
    interior_maximizer,
    interior_vs_corner,
    optimize,
    profit_grid,
    regime_from_code,
)

EDGE = 1e-3


class InvalidGrid(ValueError):
    pass


class UnsupportedFormat(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".12g")


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class Cell:
    x: float
    y: float
    region: Region
    optimal_p1: float
    optimal_profit: float


@dataclass
class RegionMap:
    axis_x: Axis
    axis_y: Axis
    fixed_params: dict[str, float]
    cells: list[Cell]

    def grid(self) -> list[list[Cell]]:
        """Cells as rows (one per y value), each ordered by x."""
        nx = self.axis_x.steps
        return [self.cells[i : i + nx] for i in range(0, len(self.cells), nx)]

    def count(self, *regions: Region) -> int:
        return sum(1 for c in self.cells if c.region in regions)


@dataclass
class ProfitCurve:
    params: MarketParams
    samples: list[tuple[float, float, Regime]]
    landmarks: dict[str, float]
    peak: float | None = None
    meta: dict = field(default_factory=dict)


def _unit_axis(name: str, lo: float, hi: float, steps: int) -> Axis:
    if not (0.0 <= lo <= hi <= 1.0):
        raise InvalidGrid(f"{name} bounds must satisfy 0 <= lo <= hi <= 1 (got {lo}, {hi})")
    if steps < 1:
        raise InvalidGrid(f"{name} needs at least one step (got {steps})")
    return Axis(name, max(lo, EDGE), min(hi, 1.0 - EDGE), int(steps))


def _run_cells(
    axis_x: Axis,
    axis_y: Axis,
    make: Callable[[float, float], MarketParams],
    workers: int,
) -> list[Cell]:
    xs, ys = axis_x.values(), axis_y.values()

    def row(y: float) -> list[Cell]:
        out = []
        for x in xs:
            sol = optimize(make(float(x), float(y)))
            out.append(Cell(float(x), float(y), sol.region, sol.optimal_p1, sol.optimal_profit))
        return out

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, ys))
    else:
        rows = [row(y) for y in ys]
    return [c for r in rows for c in r]


def sweep_alpha_r(
    v1: float,
    v2: float,
    p2_bar: float,
    steps_alpha: int = 100,
    steps_r: int = 100,
    alpha_range: tuple[float, float] = (0.0, 1.0),
    r_range: tuple[float, float] = (0.0, 1.0),
    workers: int = 1,
) -> RegionMap:
    """Optimal regime on the (fit probability, return cost) plane."""
    ax = _unit_axis("alpha", *alpha_range, steps_alpha)
    ay = _unit_axis("r", *r_range, steps_r)
    validate(MarketParams(v1, v2, p2_bar, ax.lo, ay.lo))
    make = lambda a, r: MarketParams(v1, v2, p2_bar, a, r)
    cells = _run_cells(ax, ay, make, workers)
    return RegionMap(ax, ay, {"v1": v1, "v2": v2, "p2_bar": p2_bar}, cells)


def sweep_alpha_valueratio(
    p2_bar: float,
    v2: float,
    r: float,
    steps_alpha: int = 200,
    steps_ratio: int = 200,
    alpha_range: tuple[float, float] = (0.0, 1.0),
    ratio_range: tuple[float, float] = (1.01, 10.0),
    workers: int = 1,
) -> RegionMap:
    """Optimal regime on the (fit probability, v1/v2) plane, high return cost."""
    if r < 0.5:
        raise WrongCase(f"value-ratio sweep requires r >= 1/2 (got r={r})")
    ax = _unit_axis("alpha", *alpha_range, steps_alpha)
    lo, hi = ratio_range
    if not 1.0 < lo <= hi or steps_ratio < 1:
        raise InvalidGrid(f"v1/v2 bounds must satisfy 1 < lo <= hi (got {lo}, {hi})")
    ay = Axis("v1_over_v2", float(lo), float(hi), int(steps_ratio))
    validate(MarketParams(lo * v2, v2, p2_bar, ax.lo, r))
    make = lambda a, k: MarketParams(k * v2, v2, p2_bar, a, r)
    cells = _run_cells(ax, ay, make, workers)
    return RegionMap(ax, ay, {"v2": v2, "p2_bar": p2_bar, "r": r}, cells)


def profit_curve(
    params: MarketParams,
    lo: float | None = None,
    hi: float | None = None,
    samples: int = 400,
) -> ProfitCurve:
    th = thresholds(params)
    lo = 0.0 if lo is None else lo
    hi = th.full_return + 0.25 * params.v1 if hi is None else hi
    if not hi > lo or samples < 2:
        raise InvalidGrid(f"need lo < hi and samples >= 2 (got {lo}, {hi}, {samples})")
    marks = {k: v for k, v in th.as_dict().items() if lo <= v <= hi}
    peak = None
    # Only an interior maximizer is a visible peak; otherwise the quadratic
    # is still rising where the partial-return stretch ends.
    if case_of(params) is CaseLabel.LOW_RETURN_COST and interior_vs_corner(params):
        p_star = interior_maximizer(params)
        if lo <= p_star <= hi:
            peak = p_star
    extra = list(marks.values()) + ([peak] if peak is not None else [])
    prices = np.unique(np.concatenate([np.linspace(lo, hi, samples), np.asarray(extra, dtype=float)]))
    profits, codes = profit_grid(params, prices)
    rows = [(float(p), float(v), regime_from_code(c)) for p, v, c in zip(prices, profits, codes)]
    return ProfitCurve(params, rows, marks, peak)


# -- rendering ------------------------------------------------------------

REGION_COLORS = {
    "Pi1": "#4e79a7",
    "Pi2bar": "#bab0ac",
    "Pi3": "#f28e2b",
    "Pi4": "#59a14f",
    "Pi4C": "#59a14f",
    "Pi4I": "#b07aa1",
}


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def region_map_csv(rmap: RegionMap) -> str:
    header = [rmap.axis_x.name, rmap.axis_y.name, "regime", "optimal_p1", "optimal_profit"]
    rows = [
        [fmt(c.x), fmt(c.y), c.region.value, fmt(c.optimal_p1), fmt(c.optimal_profit)]
        for c in rmap.cells
    ]
    return _csv(header, rows)


def profit_curve_csv(curve: ProfitCurve) -> str:
    rows = [[fmt(p), fmt(v), g.value] for p, v, g in curve.samples]
    return _csv(["p1", "profit", "regime"], rows)


def parse_csv(text: str) -> list[dict[str, float | str]]:
    """Read a rendered CSV back; numeric columns become floats."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append({k: (v if k == "regime" else float(v)) for k, v in rec.items()})
    return out


def _svg_doc(width: int, height: int, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def region_map_svg(rmap: RegionMap) -> str:
    nx, ny = rmap.axis_x.steps, rmap.axis_y.steps
    left, top, plot = 70, 40, 500
    cw, ch = plot / nx, plot / ny
    xs = {v: i for i, v in enumerate(rmap.axis_x.values())}
    ys = {v: j for j, v in enumerate(rmap.axis_y.values())}
    fixed = ", ".join(f"{k}={fmt(v)}" for k, v in rmap.fixed_params.items())
    body = [f'<text x="{left}" y="24" font-size="14">Optimal regime ({escape(fixed)})</text>']
    for c in rmap.cells:
        i, j = xs[c.x], ys[c.y]
        x = left + i * cw
        y = top + (ny - 1 - j) * ch
        body.append(
            f'<rect class="cell" x="{x:.3f}" y="{y:.3f}" width="{cw:.3f}" height="{ch:.3f}" '
            f'fill="{REGION_COLORS[c.region.value]}" data-regime="{c.region.value}"/>'
        )
    body.append(
        f'<rect x="{left}" y="{top}" width="{plot}" height="{plot}" fill="none" stroke="black"/>'
    )
    ax, ay = rmap.axis_x, rmap.axis_y
    body.append(f'<text x="{left}" y="{top + plot + 18}">{fmt(ax.lo)}</text>')
    body.append(f'<text x="{left + plot}" y="{top + plot + 18}" text-anchor="end">{fmt(ax.hi)}</text>')
    body.append(
        f'<text x="{left + plot / 2}" y="{top + plot + 34}" text-anchor="middle">{escape(ax.name)}</text>'
    )
    body.append(f'<text x="{left - 6}" y="{top + plot}" text-anchor="end">{fmt(ay.lo)}</text>')
    body.append(f'<text x="{left - 6}" y="{top + 10}" text-anchor="end">{fmt(ay.hi)}</text>')
    body.append(
        f'<text x="{left - 40}" y="{top + plot / 2}" text-anchor="middle" '
        f'transform="rotate(-90 {left - 40} {top + plot / 2})">{escape(ay.name)}</text>'
    )
    lx = left + plot + 20
    for k, region in enumerate(Region):
        y = top + 20 * k
        n = rmap.count(region)
        body.append(
            f'<rect class="legend" x="{lx}" y="{y}" width="14" height="14" fill="{REGION_COLORS[region.value]}"/>'
        )
        body.append(f'<text x="{lx + 20}" y="{y + 12}">{region.value} ({n})</text>')
    return _svg_doc(left + plot + 130, top + plot + 50, body)


def profit_curve_svg(curve: ProfitCurve) -> str:
    left, top, pw, ph = 60, 40, 560, 360
    ps = np.array([s[0] for s in curve.samples])
    vs = np.array([s[1] for s in curve.samples])
    x0, x1 = float(ps.min()), float(ps.max())
    y0, y1 = float(min(vs.min(), 0.0)), float(vs.max())
    if y1 <= y0:
        y1 = y0 + 1.0
    sx = lambda p: left + (p - x0) / (x1 - x0) * pw
    sy = lambda v: top + ph - (v - y0) / (y1 - y0) * ph

    segments: list[tuple[Regime, list[tuple[float, float]]]] = []
    for p, v, g in curve.samples:
        if not segments or segments[-1][0] is not g:
            segments.append((g, []))
        segments[-1][1].append((p, v))

    params = ", ".join(f"{k}={fmt(v)}" for k, v in curve.params.to_dict().items())
    body = [f'<text x="{left}" y="24" font-size="14">Retailer profit vs p1 ({escape(params)})</text>']
    body.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for name, price in sorted(curve.landmarks.items(), key=lambda kv: kv[1]):
        x = sx(price)
        body.append(
            f'<line class="landmark" x1="{x:.3f}" y1="{top}" x2="{x:.3f}" y2="{top + ph}" '
            f'stroke="#888" stroke-dasharray="4 3"/>'
        )
        body.append(
            f'<text x="{x:.3f}" y="{top + ph + 14}" font-size="9" text-anchor="end" '
            f'transform="rotate(-45 {x:.3f} {top + ph + 14})">{escape(name)}={fmt(price)}</text>'
        )
    for regime, pts in segments:
        coords = " ".join(f"{sx(p):.3f},{sy(v):.3f}" for p, v in pts)
        color = REGION_COLORS[regime.value]
        body.append(
            f'<polyline class="segment" data-regime="{regime.value}" points="{coords}" '
            f'fill="none" stroke="{color}" stroke-width="2"/>'
        )
        mp, mv = pts[len(pts) // 2]
        body.append(
            f'<text class="segment-label" x="{sx(mp):.3f}" y="{sy(mv) - 6:.3f}" '
            f'fill="{color}">{regime.value}</text>'
        )
    if curve.peak is not None:
        body.append(
            f'<text class="peak" x="{sx(curve.peak):.3f}" y="{top + 14}" text-anchor="middle">'
            f"interior peak p1={fmt(curve.peak)}</text>"
        )
    body.append(f'<text x="{left}" y="{top + ph + 60}">{fmt(x0)}</text>')
    body.append(f'<text x="{left + pw}" y="{top + ph + 60}" text-anchor="end">{fmt(x1)}</text>')
    body.append(f'<text x="{left - 6}" y="{top + ph}" text-anchor="end">{fmt(y0)}</text>')
    body.append(f'<text x="{left - 6}" y="{top + 10}" text-anchor="end">{fmt(y1)}</text>')
    return _svg_doc(left + pw + 40, top + ph + 80, body)


def render(obj: Union[RegionMap, ProfitCurve], fmt_name: str) -> str:
    kind = fmt_name.lower()
    if kind not in ("csv", "svg"):
        raise UnsupportedFormat(f"unsupported format {fmt_name!r}; use csv or svg")
    if isinstance(obj, RegionMap):
        return region_map_csv(obj) if kind == "csv" else region_map_svg(obj)
    if isinstance(obj, ProfitCurve):
        return profit_curve_csv(obj) if kind == "csv" else profit_curve_svg(obj)
    raise TypeError(f"cannot render {type(obj).__name__}")
