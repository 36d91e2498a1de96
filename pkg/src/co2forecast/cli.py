"""Command-line entry point: ``co2forecast {ingest,evaluate,forecast}``.

Exit codes: 0 success, 1 internal error, 2 bad input or usage.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import report
from .cart import TreeParams
from .core import CHRONOLOGICAL, RANDOM
from .errors import ForecastError, NonConvergenceWarning
from .ingest import (EmissionSeries, extract_series, looks_like_series_csv,
                     parse_worldbank_csv, read_series_csv, series_to_csv)
from .svr import Kernel, SvrParams

SPLITS = {"random": RANDOM, "chronological": CHRONOLOGICAL}


class UsageError(ForecastError):
    pass


def _span(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None


def load_series(path: str, country: str, years: tuple[int, int]) -> EmissionSeries:
    data = Path(path).read_bytes()
    if looks_like_series_csv(data):
        return read_series_csv(data, country_code=country)
    return extract_series(parse_worldbank_csv(data), country, *years)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="World Bank wide CSV or a year,value series file")
    p.add_argument("--country", default="CAN", help="ISO3 country code (default CAN)")
    p.add_argument("--years", type=_span, default=(1960, 2018), metavar="A:B",
                   help="training window, inclusive (default 1960:2018)")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratio", type=float, default=0.9, help="train fraction (default 0.9)")
    p.add_argument("--split", choices=sorted(SPLITS), default="random")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--models", default=",".join(report.MODEL_NAMES),
                   help="comma list: linear,tree,forest,svm")
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--forest-seed", type=int, default=None,
                   help="defaults to --seed")
    p.add_argument("--kernel", choices=["rbf", "linear"], default="rbf")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--C", dest="svr_c", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="co2forecast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="extract one country's series from a World Bank CSV")
    _add_data_args(p)
    p.add_argument("--out", help="series CSV to write (default: stdout)")

    p = sub.add_parser("evaluate", help="score the four models on a held-out split")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--out", help="directory to write metrics.csv into")

    p = sub.add_parser("forecast", help="train, score and forecast; write table, chart, manifest")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--horizon", type=_span, default=(2019, 2030), metavar="A:B")
    p.add_argument("--refit-full", action=argparse.BooleanOptionalAction, default=True,
                   help="refit on the whole series before forecasting")
    p.add_argument("--allow-overlap", action="store_true",
                   help="permit a horizon that starts inside the data")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.add_argument("--from-manifest", metavar="PATH", help="replay a previous run")
    return parser


def config_from_args(args: argparse.Namespace) -> report.PipelineConfig:
    try:
        models = report.resolve_models(args.models.split(","))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return report.PipelineConfig(
        country_code=args.country,
        years=args.years,
        horizon=getattr(args, "horizon", (2019, 2030)),
        ratio=args.ratio,
        strategy=SPLITS[args.split],
        seed=args.seed,
        models=models,
        refit_full=getattr(args, "refit_full", True),
        allow_overlap=getattr(args, "allow_overlap", False),
        tree_params=TreeParams(args.max_depth, args.min_samples_split, args.min_samples_leaf),
        n_trees=args.n_trees,
        bootstrap=not args.no_bootstrap,
        forest_seed=args.forest_seed,
        svr_params=SvrParams(args.svr_c, args.epsilon, args.tol),
        svr_kernel=Kernel(args.kernel, args.gamma),
        input=args.input or "",
    )


def _require_input(args) -> str:
    if not args.input:
        raise UsageError("--input is required")
    return args.input


def cmd_ingest(args) -> int:
    series = load_series(_require_input(args), args.country, args.years)
    if series.dropped_years:
        print(f"{series.country_code}: dropped {len(series.dropped_years)} year(s) with no usable "
              f"value: {', '.join(map(str, series.dropped_years))}", file=sys.stderr)
    payload = series_to_csv(series)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return 0


def cmd_evaluate(args) -> int:
    config = config_from_args(args)
    series = load_series(_require_input(args), args.country, args.years)
    metrics, split = report.evaluate_pipeline(series, config)
    payload = report.emit_metrics_csv(metrics)
    sys.stdout.write(payload.decode("ascii"))
    print(f"train={split.train.n} test={split.test.n} strategy={split.strategy}", file=sys.stderr)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_bytes(payload)
    return 0


def cmd_forecast(args) -> int:
    if args.from_manifest:
        manifest = report.RunManifest.from_text(Path(args.from_manifest).read_text("utf-8"))
        config, series = report.config_from_manifest(manifest)
    else:
        config = config_from_args(args)
        series = load_series(_require_input(args), args.country, args.years)
    result = report.run_pipeline(series, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "forecast.csv").write_bytes(report.emit_table_csv(result.table))
    (out / "metrics.csv").write_bytes(report.emit_metrics_csv(result.metrics))
    (out / "chart.svg").write_bytes(report.emit_chart_svg(result.series, result.table))
    (out / "manifest.txt").write_bytes(result.manifest.to_bytes())
    print(f"wrote forecast.csv, metrics.csv, chart.svg, manifest.txt to {out}", file=sys.stderr)
    return 0


COMMANDS = {"ingest": cmd_ingest, "evaluate": cmd_evaluate, "forecast": cmd_forecast}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonConvergenceWarning)
            code = COMMANDS[args.command](args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except (ForecastError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
