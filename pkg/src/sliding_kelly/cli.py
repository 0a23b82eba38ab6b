"""Command-line entry points: ``backtest``, ``solve`` and ``flip``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

from .backtest import BacktestReport, RunSpec, run_backtest
from .market_data import (
    ReturnWindow,
    append_cash_asset,
    compute_returns,
    flip_prices,
    load_price_csv,
    write_price_csv,
)
from .solver import DidNotConverge, SolverConfig, solve_log_optimal

log = logging.getLogger("sliding_kelly")

ALIGNMENT_NOTE = (
    "sliding strategies use the last M in-sample returns as their first window; "
    "all strategies cover the same out-of-sample stages"
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _iso_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _windows(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes) or len(set(sizes)) != len(sizes):
        raise argparse.ArgumentTypeError("window sizes must be positive and distinct")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sliding-kelly", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    bt = sub.add_parser("backtest", help="classical vs sliding-window log-optimal backtest")
    bt.add_argument("--prices", required=True, type=Path)
    bt.add_argument("--split", required=True, type=_iso_date, help="last in-sample date")
    bt.add_argument("--windows", type=_windows, default=(5, 10, 30, 60, 100))
    bt.add_argument("--rf", type=float, default=0.0, help="per-period risk-free rate")
    bt.add_argument("--v0", type=float, default=1.0)
    bt.add_argument("--cash-rate", type=float, default=None, help="append a riskless asset")
    bt.add_argument("--report", required=True, type=Path, help="JSON report path")
    bt.add_argument("--series", required=True, type=Path, help="directory for series CSVs")
    bt.add_argument("--flip", action="store_true", help="use flipped upside-down prices")
    bt.set_defaults(func=cmd_backtest)

    sv = sub.add_parser("solve", help="single log-optimal solve over a date range")
    sv.add_argument("--prices", required=True, type=Path)
    sv.add_argument("--from", dest="start", type=_iso_date, default=None)
    sv.add_argument("--to", dest="end", type=_iso_date, default=None)
    sv.add_argument("--cash-rate", type=float, default=None)
    sv.set_defaults(func=cmd_solve)

    fl = sub.add_parser("flip", help="write flipped upside-down prices")
    fl.add_argument("--prices", required=True, type=Path)
    fl.add_argument("--out", required=True, type=Path)
    fl.set_defaults(func=cmd_flip)
    return parser


# --- report rendering -------------------------------------------------------


def report_to_dict(report: BacktestReport, config: dict, series_paths: dict) -> dict:
    strategies = []
    for s in report.strategies:
        strategies.append(
            {
                "name": s.name,
                "window": s.window,
                "weights_final": [float(w) for w in s.schedule.weights[-1]],
                "max_solver_gap": float(s.schedule.gaps.max()),
                "metrics": s.metrics.to_dict(),
                "runtime_secs": s.runtime_secs,
            }
        )
    return {
        "config": config,
        "strategies": strategies,
        "series_paths": series_paths,
    }


_ROWS = [
    ("Maximum percentage drawdown d*", "max_drawdown", "pct"),
    ("Cumulative rate of return (V(N)-V0)/V0", "cumulative_return", "pct"),
    ("Realized log-growth log(V(N)/V(0))", "realized_log_growth", "pct"),
    ("Volatility (annualized)", "annualized_volatility", "pct"),
    ("Sharpe ratio sqrt(N)*SR", "sharpe_n_period", "ratio"),
    ("Sharpe ratio sqrt(252)*SR", "sharpe_annualized", "ratio"),
]


def _fmt(value, kind: str) -> str:
    if value is None:
        return "n/a"
    if kind == "pct":
        return f"{100 * value:.2f}%"
    return f"{value:.3f}"


def _table(title: str, headers: list[str], columns: list[dict]) -> str:
    body = [[label] + [_fmt(c["metrics"][key], kind) for c in columns] for label, key, kind in _ROWS]
    body.append(["Running time (secs)"] + [f"{c['runtime_secs']:.3f}" for c in columns])
    rows = [[""] + headers] + body
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = [title, "-" * (sum(widths) + 3 * (len(widths) - 1))]
    for r in rows:
        lines.append(" | ".join(cell.ljust(w) if i == 0 else cell.rjust(w)
                                for i, (cell, w) in enumerate(zip(r, widths))))
    return "\n".join(lines)


def render_tables(doc: dict) -> str:
    """Text tables (classical, then sliding windows largest-first) from a report dict."""
    classical = [s for s in doc["strategies"] if s["window"] is None]
    sliding = sorted(
        (s for s in doc["strategies"] if s["window"] is not None),
        key=lambda s: -s["window"],
    )
    parts = []
    if classical:
        weights = ", ".join(f"{w:.4f}" for w in classical[0]["weights_final"])
        parts.append(_table(f"Classical log-optimal portfolio K* = [{weights}]", ["classical"], classical))
    if sliding:
        parts.append(
            _table(
                "Log-optimal portfolio with sliding window approach",
                [f"M={s['window']}" for s in sliding],
                sliding,
            )
        )
    return "\n\n".join(parts) + "\n"


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_series(report: BacktestReport, directory: Path) -> dict:
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    equity = directory / "equity.csv"
    curves = [s.curve.values for s in report.strategies]
    _write_csv(
        equity,
        ["date", *(s.name for s in report.strategies)],
        ([d.isoformat(), *(repr(float(c[t])) for c in curves)] for t, d in enumerate(report.dates)),
    )
    paths["equity"] = str(equity)
    for s in report.strategies:
        if s.window is None:
            continue
        target = directory / f"weights_M{s.window}.csv"
        _write_csv(
            target,
            ["date", *report.assets],
            (
                [d.isoformat(), *(repr(float(w)) for w in row)]
                for d, row in zip(report.weight_dates, s.schedule.weights)
            ),
        )
        paths[s.name] = str(target)
    return paths


# --- commands ---------------------------------------------------------------


def cmd_backtest(args: argparse.Namespace) -> int:
    prices = load_price_csv(args.prices)
    if args.flip:
        prices = flip_prices(prices)
    if not prices.dates[0] <= args.split <= prices.dates[-1]:
        raise ValueError(
            f"split {args.split} outside price range {prices.dates[0]}..{prices.dates[-1]}"
        )
    spec = RunSpec(
        split=args.split,
        windows=args.windows,
        risk_free=args.rf,
        v0=args.v0,
        cash_rate=args.cash_rate,
    )
    report = run_backtest(prices, spec)
    series_paths = write_series(report, args.series)
    config = {
        "prices": str(args.prices),
        "flip": bool(args.flip),
        "split": args.split.isoformat(),
        "windows": list(spec.windows),
        "rf": spec.risk_free,
        "v0": spec.v0,
        "cash_rate": spec.cash_rate,
        "assets": list(report.assets),
        "insample_returns": report.insample_returns,
        "out_of_sample_start": report.dates[0].isoformat(),
        "out_of_sample_end": report.dates[-1].isoformat(),
        "gap_tolerance": spec.solver.gap_tolerance,
        "alignment": ALIGNMENT_NOTE,
    }
    doc = report_to_dict(report, config, series_paths)
    args.report.parent.mkdir(parents=True, exist_ok=True)
    args.report.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    tables = render_tables(doc)
    args.report.with_suffix(".txt").write_text(tables, encoding="utf-8")
    sys.stdout.write(tables)
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    if args.start and args.end and args.start > args.end:
        raise ValueError(f"--from {args.start} is after --to {args.end}")
    prices = load_price_csv(args.prices).between(args.start, args.end)
    returns = compute_returns(prices)
    if args.cash_rate is not None:
        returns = append_cash_asset(returns, args.cash_rate)
    try:
        result = solve_log_optimal(ReturnWindow(returns.returns), SolverConfig())
        status = "converged"
    except DidNotConverge as exc:
        result = exc.result
        status = "NOT converged"
    width = max(len(a) for a in returns.assets)
    print(f"returns: {len(returns)} ({prices.dates[0]} .. {prices.dates[-1]})")
    for asset, w in zip(returns.assets, result.weights):
        print(f"  {asset.ljust(width)}  {w:.6f}")
    print(f"objective: {result.objective:.10g}")
    print(f"gap: {result.gap:.3e}")
    print(f"iterations: {result.iterations} ({status})")
    return 0 if result.converged else 1


def cmd_flip(args: argparse.Namespace) -> int:
    write_price_csv(flip_prices(load_price_csv(args.prices)), args.out)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"sliding-kelly: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
