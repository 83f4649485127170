"""Command-line entry point.

Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 output I/O error.
Options may also come from a JSON file given with ``--config``; flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path
from typing import Any

from trialreturn.market import MarketError, MarketParams, case_of, validate
from trialreturn.oracle import InvalidConfig, SimConfig, default_workers, simulate
from trialreturn.pricing import compare_coverage, optimize, profit_at
from trialreturn.sweep import (
    InvalidGrid,
    UnsupportedFormat,
    fmt,
    profit_curve,
    render,
    sweep_alpha_r,
    sweep_alpha_valueratio,
)
from trialreturn.verify import run_verification

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3

REFERENCE_MARKET = {"v1": 2.0, "v2": 1.0, "p2": 0.0, "alpha": 0.25, "r": 0.125}


class InputError(Exception):
    pass


class Options:
    """Flag values layered over a JSON config file over built-in defaults."""

    def __init__(self, args: argparse.Namespace, config: dict[str, Any]):
        self._args = args
        self._config = config

    def get(self, key: str, default: Any = None) -> Any:
        value = getattr(self._args, key, None)
        if value is not None:
            return value
        market = self._config.get("market", {})
        if key in self._config:
            return self._config[key]
        if key in market:
            return market[key]
        if key == "p2" and "p2_bar" in market:
            return market["p2_bar"]
        if key == "p2" and "p2_bar" in self._config:
            return self._config["p2_bar"]
        return default


def _load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config file must hold a JSON object")
    return data


def _market(opts: Options) -> MarketParams:
    values = {k: opts.get(k, REFERENCE_MARKET[k]) for k in REFERENCE_MARKET}
    try:
        params = MarketParams.from_mapping(values)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad market value: {exc}") from exc
    return validate(params)


def _sim_config(opts: Options) -> SimConfig:
    return SimConfig(
        n_customers=int(opts.get("n", 1_000_000)),
        seed=int(opts.get("seed", 42)),
        price_grid_step=opts.get("grid_step"),
        quadrature_points=int(opts.get("quadrature_points", 10_000)),
        workers=int(opts.get("workers", default_workers())),
    )


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _emit(opts: Options, payload: dict, summary: str) -> None:
    out = opts.get("output")
    if out:
        _write(out, _dump(payload))
    print(_dump(payload) if opts.get("json") else summary, end="" if opts.get("json") else "\n")


def cmd_solve(opts: Options) -> int:
    params = _market(opts)
    sol = optimize(params)
    payload = {"market": params.to_dict(), "case": case_of(params).value, **sol.to_dict()}
    lines = [
        f"case {case_of(params).value}: optimal p1={fmt(sol.optimal_p1)} "
        f"profit={fmt(sol.optimal_profit)} regime={sol.region.value}",
        "candidates:",
    ]
    for q in sol.candidates:
        lines.append(f"  {q.label:<18} p1={fmt(q.p1):<16} profit={fmt(q.profit):<16} {q.regime.value}")
    _emit(opts, payload, "\n".join(lines))
    return EXIT_OK


def cmd_profit(opts: Options) -> int:
    params = _market(opts)
    price = opts.get("price")
    if price is None:
        raise InputError("profit needs --price")
    coverage = bool(opts.get("coverage", False))
    quote = profit_at(params, float(price), coverage)
    _emit(
        opts,
        {"market": params.to_dict(), "coverage": coverage, **quote.to_dict()},
        f"p1={fmt(quote.p1)} profit={fmt(quote.profit)} regime={quote.regime.value}",
    )
    return EXIT_OK


def cmd_simulate(opts: Options) -> int:
    params = _market(opts)
    price = opts.get("price")
    if price is None:
        raise InputError("simulate needs --price")
    config = _sim_config(opts)
    coverage = bool(opts.get("coverage", False))
    res = simulate(params, float(price), config, coverage)
    summary = (
        f"n={res.n} seed={res.seed} share_p1={fmt(res.est_share_p1)}±{fmt(res.se_share_p1)} "
        f"profit={fmt(res.est_profit)}±{fmt(res.se_profit)}"
    )
    _emit(opts, {"market": params.to_dict(), "p1": float(price), "coverage": coverage, **res.to_dict()}, summary)
    return EXIT_OK


def _format_for(opts: Options, default: str) -> str:
    name = opts.get("format")
    if name:
        return name
    out = opts.get("output")
    if out and Path(out).suffix.lower() in (".csv", ".svg"):
        return Path(out).suffix[1:].lower()
    return default


def cmd_sweep(opts: Options) -> int:
    plane = opts.get("plane", "alpha-r")
    steps = int(opts.get("steps", 100))
    sx, sy = int(opts.get("steps_x", steps)), int(opts.get("steps_y", steps))
    workers = int(opts.get("workers", default_workers()))
    base = {k: opts.get(k, REFERENCE_MARKET[k]) for k in REFERENCE_MARKET}
    if plane == "alpha-r":
        rmap = sweep_alpha_r(float(base["v1"]), float(base["v2"]), float(base["p2"]), sx, sy, workers=workers)
    elif plane == "alpha-ratio":
        ratio = (float(opts.get("ratio_lo", 1.01)), float(opts.get("ratio_hi", 10.0)))
        rmap = sweep_alpha_valueratio(
            float(base["p2"]), float(base["v2"]), float(base["r"]), sx, sy, ratio_range=ratio, workers=workers
        )
    else:
        raise InputError(f"unknown plane {plane!r}; use alpha-r or alpha-ratio")
    text = render(rmap, _format_for(opts, "csv"))
    counts = Counter(c.region.value for c in rmap.cells)
    summary = f"{len(rmap.cells)} cells: " + " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    out = opts.get("output")
    if out:
        _write(out, text)
        print(summary)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_curve(opts: Options) -> int:
    params = _market(opts)
    lo, hi = opts.get("lo"), opts.get("hi")
    curve = profit_curve(
        params,
        None if lo is None else float(lo),
        None if hi is None else float(hi),
        int(opts.get("samples", 400)),
    )
    text = render(curve, _format_for(opts, "csv"))
    out = opts.get("output")
    if out:
        _write(out, text)
        marks = " ".join(f"{k}={fmt(v)}" for k, v in curve.landmarks.items())
        print(f"{len(curve.samples)} samples; landmarks: {marks}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_coverage(opts: Options) -> int:
    params = _market(opts)
    cmp = compare_coverage(params)
    summary = (
        f"profit without coverage={fmt(cmp.profit_no_coverage)} at p1={fmt(cmp.optimal_p1_each[0])}; "
        f"with coverage={fmt(cmp.profit_with_coverage)} at p1={fmt(cmp.optimal_p1_each[1])}; "
        f"recommend_coverage={str(cmp.recommend_coverage).lower()}"
    )
    _emit(opts, {"market": params.to_dict(), **cmp.to_dict()}, summary)
    return EXIT_OK


def cmd_verify(opts: Options) -> int:
    params = _market(opts)
    report = run_verification(
        params, _sim_config(opts), bool(opts.get("coverage", False)), float(opts.get("inject_fault", 0.0))
    )
    data = report.to_dict()
    out = opts.get("output")
    if out:
        _write(out, _dump(data))
    if opts.get("json"):
        sys.stdout.write(_dump(data))
    else:
        for c in report.checks:
            print(f"{c.status:<12} {c.name:<34} observed={fmt(c.observed)} expected={fmt(c.expected)}")
        counts = " ".join(f"{k}={v}" for k, v in data["counts"].items())
        print(f"{'PASSED' if report.passed else 'FAILED'}: {counts}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def _add_market(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("market")
    g.add_argument("--v1", type=float, help="value of the in-store product")
    g.add_argument("--v2", type=float, help="value of the online substitute")
    g.add_argument("--p2", type=float, help="online price of the substitute")
    g.add_argument("--alpha", type=float, help="fit probability")
    g.add_argument("--r", type=float, help="return cost as a fraction of v1")


def _add_sim(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of simulated customers (default 1e6)")
    p.add_argument("--seed", type=int, help="random seed (default 42)")
    p.add_argument("--grid-step", dest="grid_step", type=float, help="price grid step (default 1e-4*v1)")
    p.add_argument("--quadrature-points", dest="quadrature_points", type=int)
    p.add_argument("--workers", type=int, help="worker threads (default $TRIALRETURN_WORKERS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trialreturn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("-o", "--output", help="output path")
        p.add_argument("--json", action="store_true", default=None, help="print JSON")
        return p

    p = command("solve", "optimal in-store price")
    _add_market(p)

    p = command("profit", "profit at a given price")
    _add_market(p)
    p.add_argument("--price", type=float)
    p.add_argument("--coverage", action="store_true", default=None)

    p = command("simulate", "Monte Carlo replay at a given price")
    _add_market(p)
    _add_sim(p)
    p.add_argument("--price", type=float)
    p.add_argument("--coverage", action="store_true", default=None)

    p = command("sweep", "region map over a parameter plane")
    _add_market(p)
    p.add_argument("--plane", choices=["alpha-r", "alpha-ratio"])
    p.add_argument("--steps", type=int)
    p.add_argument("--steps-x", dest="steps_x", type=int)
    p.add_argument("--steps-y", dest="steps_y", type=int)
    p.add_argument("--ratio-lo", dest="ratio_lo", type=float)
    p.add_argument("--ratio-hi", dest="ratio_hi", type=float)
    p.add_argument("--format", choices=["csv", "svg"])
    p.add_argument("--workers", type=int)

    p = command("curve", "profit as a function of price")
    _add_market(p)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--format", choices=["csv", "svg"])

    p = command("coverage", "compare reimbursing return fees with not doing so")
    _add_market(p)

    p = command("verify", "check closed forms against the simulation oracle")
    _add_market(p)
    _add_sim(p)
    p.add_argument("--coverage", action="store_true", default=None)
    p.add_argument("--inject-fault", dest="inject_fault", type=float, help=argparse.SUPPRESS)
    return parser


COMMANDS = {
    "solve": cmd_solve,
    "profit": cmd_profit,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "curve": cmd_curve,
    "coverage": cmd_coverage,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args, _load_config(args.config))
        return COMMANDS[args.command](opts)
    except (InputError, MarketError, InvalidGrid, InvalidConfig, UnsupportedFormat) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (TypeError, ValueError) as exc:
        print(f"error: invalid option value: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
