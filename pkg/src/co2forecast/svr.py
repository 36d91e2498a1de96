"""Epsilon-insensitive support vector regression fitted through its dual.

The dual is written in the difference variables delta = alpha - alpha*:

    maximise  -1/2 delta' K delta - eps * sum|delta| + y' delta
    s.t.      sum(delta) = 0,  -C <= delta <= C

and solved by SMO with maximal-violating-pair selection and an exact
solution of each two-variable subproblem (a concave piecewise quadratic).
Inputs are standardised inside the model.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._backend import kernels
from .core import Dataset
from .errors import DegenerateInput, InfeasiblePoint, NonConvergenceWarning

LINEAR = "linear"
RBF = "rbf"


@dataclass(frozen=True)
class Kernel:
    kind: str = RBF
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in (LINEAR, RBF):
            raise ValueError(f"unsupported kernel {self.kind!r}")
        if self.kind == RBF and not self.gamma > 0.0:
            raise ValueError("rbf gamma must be positive")

    def __call__(self, u: float, v: float) -> float:
        if self.kind == LINEAR:
            return u * v
        d = u - v
        return math.exp(-self.gamma * d * d)

    def gram(self, z: np.ndarray) -> np.ndarray:
        if self.kind == LINEAR:
            return np.ascontiguousarray(np.outer(z, z))
        d = z[:, None] - z[None, :]
        return np.ascontiguousarray(np.exp(-self.gamma * d * d))


@dataclass(frozen=True)
class SvrParams:
    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-3
    max_passes: Optional[int] = None  # SMO update cap; None means 1000 * n

    def __post_init__(self):
        if not self.C > 0.0:
            raise ValueError("C must be positive")
        if not self.epsilon >= 0.0:
            raise ValueError("epsilon must be nonnegative")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")

    def update_cap(self, n: int) -> int:
        return 1000 * n if self.max_passes is None else self.max_passes


@dataclass(frozen=True)
class DualSolution:
    delta: np.ndarray
    grad: np.ndarray
    iterations: int
    gap: float
    history: np.ndarray


@dataclass(frozen=True)
class SvrModel:
    support_x: tuple[float, ...]
    coeffs: tuple[float, ...]
    support_index: tuple[int, ...]
    bias: float
    kernel: Kernel
    x_anchor: float
    x_offset: float
    x_std: float
    params: SvrParams
    converged: bool = True
    iterations: int = 0
    gap: float = 0.0

    @property
    def x_mean(self) -> float:
        return self.x_anchor + self.x_offset

    def standardize(self, x: float) -> float:
        return ((x - self.x_anchor) - self.x_offset) / self.x_std

    def dual_vector(self, n: int) -> np.ndarray:
        delta = np.zeros(n)
        delta[list(self.support_index)] = self.coeffs
        return delta

    def predict(self, xs) -> np.ndarray:
        return np.array([predict_svr(self, float(x)) for x in np.atleast_1d(xs)])


def standardization(xs: np.ndarray) -> tuple[float, float, float]:
    """``(anchor, offset, std)`` with mean = anchor + offset.

    Centring on the first sample before removing the residual mean makes the
    standardised values bit-identical under any exactly representable shift
    of the inputs (e.g. whole years).
    """
    n = xs.size
    anchor = float(xs[0])
    rel = xs - anchor
    offset = math.fsum(rel) / n
    std = math.sqrt(math.fsum((rel - offset) ** 2) / n)
    return anchor, offset, std


def standardize(xs: np.ndarray, anchor: float, offset: float, std: float) -> np.ndarray:
    return ((np.asarray(xs, dtype=np.float64) - anchor) - offset) / std


def solve_dual(z: np.ndarray, y: np.ndarray, params: SvrParams, kernel: Kernel,
               start: Optional[np.ndarray] = None, history_rows: int = 0) -> DualSolution:
    """Run SMO on standardised inputs ``z``; optionally record the first updates."""
    n = z.size
    K = kernel.gram(np.asarray(z, dtype=np.float64))
    y = np.ascontiguousarray(y, dtype=np.float64)
    delta = np.zeros(n) if start is None else np.array(start, dtype=np.float64)
    grad = np.zeros(n)
    history = np.zeros((history_rows, n))
    it, gap, recorded = kernels.smo_solve(
        K, y, params.C, params.epsilon, params.tol, params.update_cap(n), delta, grad,
        history if history_rows else None)
    return DualSolution(delta, grad, int(it), float(gap), history[:recorded])


def bias_from_gradient(delta: np.ndarray, grad: np.ndarray, C: float, eps: float) -> float:
    """Mean implied bias over free support vectors, else the middle of the feasible range."""
    implied = [grad[k] - math.copysign(eps, delta[k])
               for k in range(delta.size) if 0.0 < abs(delta[k]) < C]
    if implied:
        return math.fsum(implied) / len(implied)
    lower = [grad[k] - eps if delta[k] >= 0.0 else grad[k] + eps
             for k in range(delta.size) if delta[k] < C]
    upper = [grad[k] + eps if delta[k] <= 0.0 else grad[k] - eps
             for k in range(delta.size) if delta[k] > -C]
    if lower and upper:
        return 0.5 * (max(lower) + min(upper))
    return max(lower) if lower else min(upper)


def fit_svr(train: Dataset, params: SvrParams | None = None,
            kernel: Kernel | None = None) -> SvrModel:
    params = params or SvrParams()
    kernel = kernel or Kernel()
    if train.n < 2:
        raise DegenerateInput("SVR needs at least two samples")
    anchor, offset, x_std = standardization(train.xs)
    if x_std == 0.0:
        raise DegenerateInput("all training inputs are equal")
    z = standardize(train.xs, anchor, offset, x_std)
    sol = solve_dual(z, train.ys, params, kernel)
    converged = not (sol.iterations >= params.update_cap(train.n) and sol.gap > 10 * params.tol)
    if not converged:
        warnings.warn(f"SMO stopped after {sol.iterations} updates with KKT gap {sol.gap:.3g}",
                      NonConvergenceWarning, stacklevel=2)
    support = [k for k in range(train.n) if sol.delta[k] != 0.0]
    return SvrModel(
        support_x=tuple(float(z[k]) for k in support),
        coeffs=tuple(float(sol.delta[k]) for k in support),
        support_index=tuple(support),
        bias=bias_from_gradient(sol.delta, sol.grad, params.C, params.epsilon),
        kernel=kernel,
        x_anchor=anchor,
        x_offset=offset,
        x_std=x_std,
        params=params,
        converged=converged,
        iterations=sol.iterations,
        gap=sol.gap,
    )


def predict_svr(model: SvrModel, x: float) -> float:
    z = model.standardize(x)
    acc = 0.0
    for zn, dn in zip(model.support_x, model.coeffs):
        acc += dn * model.kernel(zn, z)
    return acc + model.bias


def dual_objective(delta: Sequence[float], train: Dataset, params: SvrParams,
                   kernel: Kernel, scaling: tuple[float, float, float] | None = None) -> float:
    """Dual objective at ``delta``; raises InfeasiblePoint outside the feasible set."""
    d = np.asarray(delta, dtype=np.float64)
    if d.shape != train.ys.shape:
        raise InfeasiblePoint("coefficient vector length does not match the data")
    if np.any(np.abs(d) > params.C + params.tol) or abs(math.fsum(d)) > params.tol:
        raise InfeasiblePoint("coefficients violate the box or equality constraint")
    K = kernel.gram(standardize(train.xs, *(scaling or standardization(train.xs))))
    return float(-0.5 * d @ K @ d - params.epsilon * np.abs(d).sum() + train.ys @ d)


def model_objective(model: SvrModel, train: Dataset) -> float:
    return dual_objective(model.dual_vector(train.n), train, model.params, model.kernel,
                          (model.x_anchor, model.x_offset, model.x_std))


def to_fields(model: SvrModel) -> dict[str, str]:
    return {
        "kind": "svr", "kernel": model.kernel.kind, "gamma": repr(model.kernel.gamma),
        "C": repr(model.params.C), "epsilon": repr(model.params.epsilon),
        "tol": repr(model.params.tol), "x_mean": repr(model.x_mean),
        "x_anchor": repr(model.x_anchor), "x_offset": repr(model.x_offset),
        "x_std": repr(model.x_std), "bias": repr(model.bias),
        "support": ";".join(f"{k}:{z!r}:{d!r}" for k, z, d in
                            zip(model.support_index, model.support_x, model.coeffs)),
    }


def from_fields(fields: dict[str, str]) -> SvrModel:
    triples = [t.split(":") for t in fields["support"].split(";") if t]
    return SvrModel(
        support_x=tuple(float(z) for _, z, _ in triples),
        coeffs=tuple(float(d) for _, _, d in triples),
        support_index=tuple(int(k) for k, _, _ in triples),
        bias=float(fields["bias"]),
        kernel=Kernel(fields["kernel"], float(fields["gamma"])),
        x_anchor=float(fields["x_anchor"]),
        x_offset=float(fields["x_offset"]),
        x_std=float(fields["x_std"]),
        params=SvrParams(float(fields["C"]), float(fields["epsilon"]), float(fields["tol"])),
    )
