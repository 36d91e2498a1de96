"""Shared plumbing: a portable PRNG, train/test splitting and regression metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSplit, EmptyInput, LengthMismatch

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

RANDOM = "seeded-random"
CHRONOLOGICAL = "chronological-tail"
STRATEGIES = (RANDOM, CHRONOLOGICAL)


class Rng:
    """splitmix64 generator. Mutable: give each task its own instance."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MUL1) & MASK64
        z = ((z ^ (z >> 27)) * _MUL2) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Index in [0, bound) by plain modulo reduction."""
        return self.next() % bound


def rng_stream(seed: int, count: int) -> list[int]:
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = Rng(seed)
    return [rng.next() for _ in range(count)]


def _frozen(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = _frozen(self.xs)
        ys = _frozen(self.ys)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise LengthMismatch(f"xs has shape {xs.shape}, ys has shape {ys.shape}")
        if xs.size == 0:
            raise EmptyInput("dataset needs at least one sample")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("dataset values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    def take(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.xs[idx], self.ys[idx])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)

    def __hash__(self):
        return hash((self.xs.tobytes(), self.ys.tobytes()))


@dataclass(frozen=True)
class Split:
    train: Dataset
    test: Dataset
    train_idx: tuple[int, ...]
    test_idx: tuple[int, ...]
    ratio: float
    strategy: str
    seed: int | None


def round_half_away(value: float) -> int:
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def split_dataset(data: Dataset, ratio: float = 0.9, strategy: str = RANDOM,
                  seed: int = 42) -> Split:
    """Partition ``data`` into train/test parts of sizes round(ratio*n) and the rest.

    The random strategy runs a Fisher-Yates shuffle driven by ``Rng(seed)``;
    the chronological strategy keeps the earliest samples for training. Both
    parts come back in ascending-year order.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown split strategy {strategy!r}")
    n = data.n
    n_train = round_half_away(ratio * n)
    if n < 2 or n_train < 1 or n_train >= n:
        raise DegenerateSplit(f"ratio {ratio} on n={n} leaves an empty train or test set")

    if strategy == RANDOM:
        order = list(range(n))
        rng = Rng(seed)
        for i in range(n - 1, 0, -1):
            j = rng.below(i + 1)
            order[i], order[j] = order[j], order[i]
    else:
        order = sorted(range(n), key=lambda k: (data.xs[k], k))

    by_year = lambda k: (data.xs[k], k)  # noqa: E731
    train_idx = tuple(sorted(order[:n_train], key=by_year))
    test_idx = tuple(sorted(order[n_train:], key=by_year))
    return Split(
        train=data.take(train_idx),
        test=data.take(test_idx),
        train_idx=train_idx,
        test_idx=test_idx,
        ratio=ratio,
        strategy=strategy,
        seed=seed if strategy == RANDOM else None,
    )


@dataclass(frozen=True)
class MetricsReport:
    r2: float
    mae: float
    mse: float
    rmse: float
    n: int


def evaluate(y_true: Sequence[float], y_pred: Sequence[float]) -> MetricsReport:
    y = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_pred, dtype=np.float64)
    if y.shape != p.shape:
        raise LengthMismatch(f"{y.size} targets vs {p.size} predictions")
    if y.size == 0:
        raise EmptyInput("cannot score an empty sample")
    n = y.size
    resid = p - y
    ss_res = math.fsum(resid * resid)
    ss_tot = math.fsum((y - math.fsum(y) / n) ** 2)
    mse = ss_res / n
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return MetricsReport(r2=r2, mae=math.fsum(np.abs(resid)) / n, mse=mse,
                         rmse=math.sqrt(mse), n=n)
