"""Per-capita CO2 emission forecasting with four from-scratch regressors."""
from ._backend import BACKEND
from .cart import TreeModel, TreeParams, fit_tree, predict_tree
from .core import Dataset, MetricsReport, Rng, Split, evaluate, rng_stream, split_dataset
from .forest import ForestModel, fit_forest, predict_forest
from .ingest import EmissionSeries, RawIndicatorFile, extract_series, parse_worldbank_csv
from .linreg import LinearModel, fit_linear, predict_linear
from .svr import Kernel, SvrModel, SvrParams, dual_objective, fit_svr, predict_svr

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dataset", "EmissionSeries", "ForestModel", "Kernel", "LinearModel",
    "MetricsReport", "RawIndicatorFile", "Rng", "Split", "SvrModel", "SvrParams",
    "TreeModel", "TreeParams", "dual_objective", "evaluate", "extract_series",
    "fit_forest", "fit_linear", "fit_svr", "fit_tree", "parse_worldbank_csv",
    "predict_forest", "predict_linear", "predict_svr", "predict_tree", "rng_stream",
    "split_dataset",
]
