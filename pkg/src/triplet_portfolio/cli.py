"""Command-line entry point.

    triplet-portfolio analyze --input prices.csv --out results \
        [--intervals 1..10] [--grid 100] [--dfa-order 1] [--scales 5:auto] \
        [--from 2013-01-04] [--to 2018-04-27] [--covariance sample|population] \
        [--gamma 1.0] [--heron standard|paper] [--config settings.toml]

Every flag can also come from an environment variable with the
TRIPLET_PORTFOLIO_ prefix (e.g. TRIPLET_PORTFOLIO_GRID=200) or from a
TOML/JSON config file passed via --config. Precedence: command line
over environment over config file over built-in defaults.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from pathlib import Path

from .analysis import AnalysisConfig, run_analysis
from .errors import DataError, PortfolioError, StageError

ENV_PREFIX = "TRIPLET_PORTFOLIO_"

_DEFAULTS = {
    "intervals": "1..10",
    "grid": "100",
    "dfa_order": "1",
    "scales": "5:auto",
    "covariance": "sample",
    "gamma": "1.0",
    "heron": "standard",
}

_OPTION_KEYS = (
    "input", "out", "intervals", "grid", "dfa_order", "scales",
    "from", "to", "covariance", "gamma", "heron",
)


def parse_intervals(spec: str) -> tuple[int, ...]:
    """Parse '1..10', '1,2,5', or '3' into a tuple of interval lengths."""
    spec = spec.strip()
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            values = tuple(range(int(lo), int(hi) + 1))
        else:
            values = tuple(int(part) for part in spec.split(","))
    except ValueError:
        raise DataError(f"could not parse intervals {spec!r}; use '1..10' or '1,2,5'") from None
    if not values:
        raise DataError(f"intervals {spec!r} is empty")
    return values


def parse_scales(spec: str) -> tuple[int, int | None, int]:
    """Parse 'MIN:MAX[:COUNT]' where MAX may be 'auto' (a quarter of the series).

    Returns (min_scale, max_scale_or_None, scale_count).
    """
    parts = spec.strip().split(":")
    if len(parts) not in (2, 3):
        raise DataError(f"could not parse scales {spec!r}; use 'MIN:MAX' or 'MIN:MAX:COUNT'")
    try:
        min_scale = int(parts[0])
        max_scale = None if parts[1] == "auto" else int(parts[1])
        count = int(parts[2]) if len(parts) == 3 else 20
    except ValueError:
        raise DataError(f"could not parse scales {spec!r}") from None
    return min_scale, max_scale, count


def _parse_date(value: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value.strip())
    except ValueError:
        raise DataError(f"could not parse date {value!r}; use ISO format YYYY-MM-DD") from None


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise DataError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"could not parse JSON config {path}: {exc}") from exc
    elif p.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise DataError(f"could not parse TOML config {path}: {exc}") from exc
    else:
        raise DataError(f"config file must end in .toml or .json, got {path}")
    if not isinstance(data, dict):
        raise DataError(f"config file {path} must hold a table of options")
    unknown = set(data) - set(_OPTION_KEYS)
    if unknown:
        raise DataError(f"unknown config keys {sorted(unknown)}; valid keys: {_OPTION_KEYS}")
    return {k: str(v) for k, v in data.items()}


def _merged_options(args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS)
    config_path = args.config or os.environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        merged.update(_load_config_file(config_path))
    for key in _OPTION_KEYS:
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            merged[key] = env_value
    cli_values = {
        "input": args.input,
        "out": args.out,
        "intervals": args.intervals,
        "grid": args.grid,
        "dfa_order": args.dfa_order,
        "scales": args.scales,
        "from": args.from_date,
        "to": args.to_date,
        "covariance": args.covariance,
        "gamma": args.gamma,
        "heron": args.heron,
    }
    merged.update({k: v for k, v in cli_values.items() if v is not None})
    return merged


def build_config(options: dict) -> AnalysisConfig:
    """Turn merged string options into a validated AnalysisConfig."""
    if "input" not in options:
        raise DataError("missing required option: input (price CSV path)")
    if "out" not in options:
        raise DataError("missing required option: out (output directory)")
    min_scale, max_scale, count = parse_scales(options["scales"])
    start = _parse_date(options["from"]) if "from" in options else None
    end = _parse_date(options["to"]) if "to" in options else None
    date_range = (start, end) if (start is not None or end is not None) else None
    heron = options["heron"]
    if heron not in ("standard", "paper"):
        raise DataError(f"heron must be 'standard' or 'paper', got {heron!r}")
    try:
        grid = int(options["grid"])
        dfa_order = int(options["dfa_order"])
        gamma = float(options["gamma"])
    except ValueError as exc:
        raise DataError(f"bad numeric option: {exc}") from None
    return AnalysisConfig(
        input_path=Path(options["input"]),
        output_dir=Path(options["out"]),
        intervals=parse_intervals(options["intervals"]),
        date_range=date_range,
        grid_resolution=grid,
        poly_order=dfa_order,
        min_scale=min_scale,
        max_scale=max_scale,
        scale_count=count,
        covariance_mode=options["covariance"],
        risk_aversion=gamma,
        heron_convention="thirds" if heron == "paper" else "standard",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triplet-portfolio",
        description=(
            "Portfolio analysis over the return/volatility/persistence triplet: "
            "local optima by simplex grid search, balanced optima from the "
            "triangle they span, and the closed-form constrained optimum."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    analyze = sub.add_parser("analyze", help="run the full analysis pipeline")
    analyze.add_argument("--input", help="price CSV (header: date,<asset>,...)")
    analyze.add_argument("--out", help="output directory for the report files")
    analyze.add_argument("--intervals", help="interval lengths, e.g. 1..10 or 1,2,5 (default 1..10)")
    analyze.add_argument("--grid", help="simplex grid resolution q (default 100)")
    analyze.add_argument("--dfa-order", dest="dfa_order", help="detrending polynomial order (default 1)")
    analyze.add_argument(
        "--scales", help="fluctuation window grid MIN:MAX[:COUNT]; MAX=auto caps at a quarter of the series (default 5:auto)"
    )
    analyze.add_argument("--from", dest="from_date", help="first date to keep (ISO)")
    analyze.add_argument("--to", dest="to_date", help="last date to keep (ISO)")
    analyze.add_argument("--covariance", choices=["sample", "population"], help="normalizer (default sample)")
    analyze.add_argument("--gamma", help="risk-aversion coefficient in the objective (default 1.0)")
    analyze.add_argument(
        "--heron",
        choices=["standard", "paper"],
        help="inradius convention: 'standard' semi-perimeter, or the perimeter/3 "
        "variant 'paper' kept for comparison (usually fails with a negative radicand)",
    )
    analyze.add_argument("--config", help="TOML or JSON file with any of the above options")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command != "analyze":  # pragma: no cover - argparse enforces this
        parser.error(f"unknown command {args.command!r}")
    try:
        config = build_config(_merged_options(args))
        report = run_analysis(config)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except PortfolioError as exc:
        print(f"error [config] {exc}", file=sys.stderr)
        return 1
    print(f"analysis complete: {len(report.blocks)} interval block(s)")
    print(f"report written to {config.output_dir}")
    for name in report.written_files:
        print(f"  {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
