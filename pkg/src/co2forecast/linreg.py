"""Least-squares straight line through (year, emission) pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import DegenerateDesign


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    slope: float
    x_center: float

    def predict(self, xs) -> np.ndarray:
        return np.array([predict_linear(self, float(x)) for x in np.atleast_1d(xs)])


def fit_linear(train: Dataset) -> LinearModel:
    """Closed-form OLS on year-centred inputs.

    Centring keeps the normal equations well conditioned for years near 2000;
    the returned intercept is converted back to raw-year coordinates.
    """
    xs, ys = train.xs, train.ys
    n = train.n
    x_bar = math.fsum(xs) / n
    y_bar = math.fsum(ys) / n
    dx = xs - x_bar
    sxx = math.fsum(dx * dx)
    if n < 2 or sxx == 0.0:
        raise DegenerateDesign("need at least two distinct x values")
    slope = math.fsum(dx * (ys - y_bar)) / sxx
    return LinearModel(intercept=y_bar - slope * x_bar, slope=slope, x_center=x_bar)


def predict_linear(model: LinearModel, x: float) -> float:
    return model.intercept + model.slope * x


def residuals(model: LinearModel, data: Dataset) -> np.ndarray:
    return data.ys - np.array([predict_linear(model, float(x)) for x in data.xs])


def to_fields(model: LinearModel) -> dict[str, str]:
    return {"kind": "linear", "intercept": repr(model.intercept),
            "slope": repr(model.slope), "x_center": repr(model.x_center)}


def from_fields(fields: dict[str, str]) -> LinearModel:
    return LinearModel(float(fields["intercept"]), float(fields["slope"]),
                       float(fields.get("x_center", "0.0")))
