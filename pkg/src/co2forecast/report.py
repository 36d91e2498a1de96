"""Train, score and forecast with all four models; render table, chart and manifest."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence
from xml.sax.saxutils import escape

from . import cart, forest, linreg, svr
from .cart import TreeParams
from .core import RANDOM, STRATEGIES, MetricsReport, Split, evaluate, split_dataset
from .errors import HorizonBeforeData, ManifestError
from .ingest import EmissionSeries, series_from_points, series_to_csv
from .svr import Kernel, SvrParams

TOOLKIT = "co2forecast 0.1.0"
MODEL_NAMES = ("LinearRegression", "DecisionTree", "RandomForest", "SVM")
MODEL_ALIASES = {
    "linear": "LinearRegression", "lr": "LinearRegression", "linearregression": "LinearRegression",
    "tree": "DecisionTree", "dt": "DecisionTree", "decisiontree": "DecisionTree",
    "forest": "RandomForest", "rf": "RandomForest", "randomforest": "RandomForest",
    "svm": "SVM", "svr": "SVM",
}


def resolve_models(names: Sequence[str]) -> tuple[str, ...]:
    wanted = set()
    for name in names:
        key = name.strip().lower()
        if key not in MODEL_ALIASES:
            raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
        wanted.add(MODEL_ALIASES[key])
    return tuple(m for m in MODEL_NAMES if m in wanted)


@dataclass(frozen=True)
class PipelineConfig:
    country_code: str = "CAN"
    years: tuple[int, int] = (1960, 2018)
    horizon: tuple[int, int] = (2019, 2030)
    ratio: float = 0.9
    strategy: str = RANDOM
    seed: int = 42
    models: tuple[str, ...] = MODEL_NAMES
    refit_full: bool = True
    allow_overlap: bool = False
    tree_params: TreeParams = field(default_factory=TreeParams)
    n_trees: int = 100
    bootstrap: bool = True
    forest_seed: Optional[int] = None  # None: reuse the split seed
    svr_params: SvrParams = field(default_factory=SvrParams)
    svr_kernel: Kernel = field(default_factory=Kernel)
    input: str = ""

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown split strategy {self.strategy!r}")
        if self.years[0] > self.years[1] or self.horizon[0] > self.horizon[1] + 1:
            raise ValueError("year ranges must be ascending")
        bad = [m for m in self.models if m not in MODEL_NAMES]
        if bad or not self.models:
            raise ValueError(f"bad model selection {self.models!r}")

    @property
    def effective_forest_seed(self) -> int:
        return self.seed if self.forest_seed is None else self.forest_seed


@dataclass(frozen=True)
class ForecastTable:
    years: tuple[int, ...]
    columns: dict[str, tuple[float, ...]]

    def __post_init__(self):
        if any(b != a + 1 for a, b in zip(self.years, self.years[1:])):
            raise ValueError("horizon years must be contiguous and ascending")
        for name, col in self.columns.items():
            if len(col) != len(self.years):
                raise ValueError(f"column {name} has {len(col)} values for {len(self.years)} years")


@dataclass(frozen=True)
class PipelineResult:
    metrics: dict[str, MetricsReport]
    table: ForecastTable
    manifest: "RunManifest"
    models: dict[str, object]
    split: Split
    series: EmissionSeries


_FITTERS: dict[str, Callable] = {
    "LinearRegression": lambda data, cfg: linreg.fit_linear(data),
    "DecisionTree": lambda data, cfg: cart.fit_tree(data, cfg.tree_params),
    "RandomForest": lambda data, cfg: forest.fit_forest(
        data, cfg.n_trees, cfg.bootstrap, cfg.effective_forest_seed, cfg.tree_params),
    "SVM": lambda data, cfg: svr.fit_svr(data, cfg.svr_params, cfg.svr_kernel),
}

_PREDICTORS: dict[str, Callable[[object, float], float]] = {
    "LinearRegression": linreg.predict_linear,
    "DecisionTree": cart.predict_tree,
    "RandomForest": forest.predict_forest,
    "SVM": svr.predict_svr,
}

_SERIALIZERS = {
    "LinearRegression": linreg.to_fields,
    "DecisionTree": cart.to_fields,
    "RandomForest": forest.to_fields,
    "SVM": svr.to_fields,
}

_DESERIALIZERS = {
    "LinearRegression": linreg.from_fields,
    "DecisionTree": cart.from_fields,
    "RandomForest": forest.from_fields,
    "SVM": svr.from_fields,
}


def predict(name: str, model, x: float) -> float:
    return _PREDICTORS[name](model, x)


def window(series: EmissionSeries, years: tuple[int, int]) -> EmissionSeries:
    lo, hi = years
    points = tuple(p for p in series.points if lo <= p[0] <= hi)
    dropped = tuple(y for y in series.dropped_years if lo <= y <= hi)
    return replace(series, points=points, dropped_years=dropped)


def fit_models(data, config: PipelineConfig) -> dict[str, object]:
    return {name: _FITTERS[name](data, config) for name in config.models}


def score_models(models: Mapping[str, object], test) -> dict[str, MetricsReport]:
    out = {}
    for name, model in models.items():
        preds = [predict(name, model, float(x)) for x in test.xs]
        out[name] = evaluate(test.ys, preds)
    return out


def evaluate_pipeline(series: EmissionSeries, config: PipelineConfig):
    """Split and score every selected model without forecasting."""
    data = window(series, config.years).to_dataset()
    split = split_dataset(data, config.ratio, config.strategy, config.seed)
    models = fit_models(split.train, config)
    return score_models(models, split.test), split


def run_pipeline(series: EmissionSeries, config: PipelineConfig | None = None) -> PipelineResult:
    config = config or PipelineConfig()
    used = window(series, config.years)
    if not used.points:
        raise ValueError(f"no data inside {config.years[0]}-{config.years[1]}")
    last_year = used.points[-1][0]
    if config.horizon[0] <= last_year and not config.allow_overlap:
        raise HorizonBeforeData(
            f"horizon starts at {config.horizon[0]} but data runs to {last_year}")
    data = used.to_dataset()
    split = split_dataset(data, config.ratio, config.strategy, config.seed)
    trained = fit_models(split.train, config)
    metrics = score_models(trained, split.test)
    final = fit_models(data, config) if config.refit_full else trained

    years = tuple(range(config.horizon[0], config.horizon[1] + 1))
    columns = {name: tuple(predict(name, final[name], float(y)) for y in years)
               for name in config.models}
    table = ForecastTable(years, columns)
    manifest = build_manifest(config, used, metrics, final)
    return PipelineResult(metrics, table, manifest, final, split, used)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def emit_table_csv(table: ForecastTable) -> bytes:
    lines = [",".join(["Year", *table.columns])]
    for r, year in enumerate(table.years):
        lines.append(",".join([str(year), *(_fmt(col[r]) for col in table.columns.values())]))
    return ("\n".join(lines) + "\n").encode("ascii")


def emit_metrics_csv(metrics: Mapping[str, MetricsReport]) -> bytes:
    lines = ["model,r2,mae,rmse,mse,n"]
    for name, m in metrics.items():
        lines.append(f"{name},{_fmt(m.r2)},{_fmt(m.mae)},{_fmt(m.rmse)},{_fmt(m.mse)},{m.n}")
    return ("\n".join(lines) + "\n").encode("ascii")


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class RunManifest:
    entries: tuple[tuple[str, str], ...]

    def get(self, key: str, default: str | None = None) -> str | None:
        return dict(self.entries).get(key, default)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.entries)

    def to_bytes(self) -> bytes:
        return self.to_text().encode("utf-8")

    @classmethod
    def from_text(cls, text: str) -> "RunManifest":
        entries = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ManifestError(f"manifest line {line_no} has no '='")
            entries.append((key.strip(), value))
        return cls(tuple(entries))


def fingerprint(series: EmissionSeries) -> str:
    return "sha256:" + hashlib.sha256(series_to_csv(series)).hexdigest()


def _bool(v: bool) -> str:
    return "true" if v else "false"


def config_entries(config: PipelineConfig) -> list[tuple[str, str]]:
    tp, sp, k = config.tree_params, config.svr_params, config.svr_kernel
    return [
        ("toolkit", TOOLKIT),
        ("input", config.input),
        ("country_code", config.country_code),
        ("years", f"{config.years[0]}:{config.years[1]}"),
        ("horizon", f"{config.horizon[0]}:{config.horizon[1]}"),
        ("allow_overlap", _bool(config.allow_overlap)),
        ("split.ratio", repr(config.ratio)),
        ("split.strategy", config.strategy),
        ("split.seed", str(config.seed)),
        ("refit_full", _bool(config.refit_full)),
        ("models", ",".join(config.models)),
        ("params.tree.max_depth", "none" if tp.max_depth is None else str(tp.max_depth)),
        ("params.tree.min_samples_split", str(tp.min_samples_split)),
        ("params.tree.min_samples_leaf", str(tp.min_samples_leaf)),
        ("params.forest.n_trees", str(config.n_trees)),
        ("params.forest.bootstrap", _bool(config.bootstrap)),
        ("params.forest.seed", str(config.effective_forest_seed)),
        ("params.svm.kernel", k.kind),
        ("params.svm.gamma", repr(k.gamma)),
        ("params.svm.C", repr(sp.C)),
        ("params.svm.epsilon", repr(sp.epsilon)),
        ("params.svm.tol", repr(sp.tol)),
        ("params.svm.max_passes", "none" if sp.max_passes is None else str(sp.max_passes)),
    ]


def build_manifest(config: PipelineConfig, series: EmissionSeries,
                   metrics: Mapping[str, MetricsReport], models: Mapping[str, object]) -> RunManifest:
    entries = config_entries(config)
    entries.append(("data.fingerprint", fingerprint(series)))
    entries.append(("data.points", ";".join(f"{y}:{v!r}" for y, v in series.points)))
    for name, m in metrics.items():
        for key in ("r2", "mae", "mse", "rmse"):
            entries.append((f"metrics.{name}.{key}", repr(getattr(m, key))))
        entries.append((f"metrics.{name}.n", str(m.n)))
    for name, model in models.items():
        for key, value in _SERIALIZERS[name](model).items():
            entries.append((f"model.{name}.{key}", value))
    return RunManifest(tuple(entries))


def _span(text: str) -> tuple[int, int]:
    a, _, b = text.partition(":")
    return int(a), int(b)


def config_from_manifest(manifest: RunManifest) -> tuple[PipelineConfig, EmissionSeries]:
    """Recover the configuration and data a manifest was written for."""
    m = dict(manifest.entries)
    try:
        config = PipelineConfig(
            country_code=m["country_code"],
            years=_span(m["years"]),
            horizon=_span(m["horizon"]),
            ratio=float(m["split.ratio"]),
            strategy=m["split.strategy"],
            seed=int(m["split.seed"]),
            models=tuple(m["models"].split(",")),
            refit_full=m["refit_full"] == "true",
            allow_overlap=m["allow_overlap"] == "true",
            tree_params=cart.params_from_fields({
                "max_depth": m["params.tree.max_depth"],
                "min_samples_split": m["params.tree.min_samples_split"],
                "min_samples_leaf": m["params.tree.min_samples_leaf"]}),
            n_trees=int(m["params.forest.n_trees"]),
            bootstrap=m["params.forest.bootstrap"] == "true",
            forest_seed=int(m["params.forest.seed"]),
            svr_params=SvrParams(
                C=float(m["params.svm.C"]), epsilon=float(m["params.svm.epsilon"]),
                tol=float(m["params.svm.tol"]),
                max_passes=None if m["params.svm.max_passes"] == "none"
                else int(m["params.svm.max_passes"])),
            svr_kernel=Kernel(m["params.svm.kernel"], float(m["params.svm.gamma"])),
            input=m.get("input", ""),
        )
        points = [p.split(":") for p in m["data.points"].split(";") if p]
    except KeyError as exc:
        raise ManifestError(f"manifest lacks key {exc.args[0]!r}") from None
    series = series_from_points(((int(y), float(v)) for y, v in points), config.country_code)
    if fingerprint(series) != m.get("data.fingerprint"):
        raise ManifestError("manifest data does not match its fingerprint")
    return config, series


def models_from_manifest(manifest: RunManifest) -> dict[str, object]:
    grouped: dict[str, dict[str, str]] = {}
    for key, value in manifest.entries:
        if key.startswith("model."):
            _, name, sub = key.split(".", 2)
            grouped.setdefault(name, {})[sub] = value
    return {name: _DESERIALIZERS[name](fields) for name, fields in grouped.items()}


# ---------------------------------------------------------------- chart

PALETTE = {
    "LinearRegression": "#1f77b4",
    "DecisionTree": "#ff7f0e",
    "RandomForest": "#2ca02c",
    "SVM": "#d62728",
}


@dataclass(frozen=True)
class ChartOptions:
    width: int = 800
    height: int = 450
    title: str = ""
    y_label: str = "CO2 emissions (metric tons per capita)"
    history_label: str = "Historical"


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / max(target, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if mult * mag >= raw:
            return mult * mag
    return 10 * mag


def _num(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def emit_chart_svg(series: EmissionSeries, table: Optional[ForecastTable] = None,
                   options: ChartOptions | None = None) -> bytes:
    """Standalone SVG line chart: history plus one line per forecast column."""
    if not series.points:
        raise ValueError("cannot chart an empty series")
    opt = options or ChartOptions()
    title = opt.title or f"CO2 emissions per capita {series.country_code}".strip()
    lines: list[tuple[str, str, list[tuple[float, float]]]] = [
        (opt.history_label, "#333333", [(float(y), v) for y, v in series.points])]
    if table is not None:
        for name, col in table.columns.items():
            pts = [(float(y), v) for y, v in zip(table.years, col)]
            if pts:
                lines.append((name, PALETTE.get(name, "#7f7f7f"), pts))

    xs = [x for _, _, pts in lines for x, _ in pts]
    ys = [y for _, _, pts in lines for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_lo, y_hi = min(ys), max(ys)
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else max(abs(y_hi), 1.0) * 0.1
    y_lo, y_hi = y_lo - pad, y_hi + pad
    step = _nice_step(y_hi - y_lo)
    y_lo = math.floor(y_lo / step) * step
    y_hi = math.ceil(y_hi / step) * step

    left, right, top, bottom = 70, 180, 40, 50
    pw, ph = opt.width - left - right, opt.height - top - bottom

    def sx(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{opt.width}" '
        f'height="{opt.height}" viewBox="0 0 {opt.width} {opt.height}">',
        f'<rect x="0" y="0" width="{opt.width}" height="{opt.height}" fill="#ffffff"/>',
        f'<text x="{opt.width / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
        '<g class="axes" stroke="#000000" stroke-width="1">',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/>',
        '</g>',
        '<g class="ticks" font-family="sans-serif" font-size="11">',
    ]
    first_decade = int(math.ceil(x_lo / 10.0)) * 10
    for year in range(first_decade, int(x_hi) + 1, 10):
        x = sx(year)
        out.append(f'<line x1="{_num(x)}" y1="{top + ph}" x2="{_num(x)}" y2="{top + ph + 5}" '
                   f'stroke="#000000"/>')
        out.append(f'<text x="{_num(x)}" y="{top + ph + 18}" text-anchor="middle">{year}</text>')
    n_steps = int(round((y_hi - y_lo) / step))
    for k in range(n_steps + 1):
        val = y_lo + k * step
        y = sy(val)
        out.append(f'<line x1="{left - 5}" y1="{_num(y)}" x2="{left}" y2="{_num(y)}" '
                   f'stroke="#000000"/>')
        out.append(f'<text x="{left - 8}" y="{_num(y + 4)}" text-anchor="end">{_num(val)}</text>')
    out.append('</g>')
    out.append(f'<text x="16" y="{top + ph / 2:.0f}" font-family="sans-serif" font-size="12" '
               f'text-anchor="middle" transform="rotate(-90 16 {top + ph / 2:.0f})">'
               f'{escape(opt.y_label)}</text>')
    out.append(f'<text x="{left + pw / 2:.0f}" y="{opt.height - 8}" font-family="sans-serif" '
               f'font-size="12" text-anchor="middle">Year</text>')

    for label, color, pts in lines:
        coords = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                   f'data-series="{escape(label)}" points="{coords}"/>')

    lx, ly = left + pw + 15, top + 10
    out.append('<g class="legend" font-family="sans-serif" font-size="12">')
    for k, (label, color, _) in enumerate(lines):
        y = ly + 20 * k
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{color}" '
                   f'stroke-width="3"/>')
        out.append(f'<text x="{lx + 30}" y="{y + 4}">{escape(label)}</text>')
    out.append('</g>')
    out.append('</svg>')
    return ("\n".join(out) + "\n").encode("utf-8")
