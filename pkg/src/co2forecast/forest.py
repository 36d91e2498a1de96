"""Bagged ensembles of regression trees."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import cart
from .cart import TreeModel, TreeParams
from .core import Dataset, Rng, rng_stream
from .errors import EmptyTrainingSet


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]
    n_trees: int
    bootstrap: bool
    seed: int
    tree_params: TreeParams

    def predict(self, xs) -> np.ndarray:
        return np.array([predict_forest(self, float(x)) for x in np.atleast_1d(xs)])


def bootstrap_indices(tree_seed: int, n: int) -> list[int]:
    rng = Rng(tree_seed)
    return [rng.below(n) for _ in range(n)]


def fit_forest(train: Dataset, n_trees: int = 100, bootstrap: bool = True, seed: int = 42,
               tree_params: TreeParams | None = None, workers: int = 1) -> ForestModel:
    """Fit ``n_trees`` CART trees, each on its own bootstrap resample.

    Per-tree seeds are drawn up front from ``seed``, so the result does not
    depend on ``workers`` or on the order trees finish in.
    """
    if train is None or train.n == 0:
        raise EmptyTrainingSet("cannot fit a forest on zero samples")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    tree_params = tree_params or TreeParams()
    seeds = rng_stream(seed, n_trees)

    def grow(t: int) -> TreeModel:
        data = train.take(bootstrap_indices(seeds[t], train.n)) if bootstrap else train
        return cart.fit_tree(data, tree_params)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = tuple(pool.map(grow, range(n_trees)))
    else:
        trees = tuple(grow(t) for t in range(n_trees))
    return ForestModel(trees, n_trees, bootstrap, seed, tree_params)


def predict_forest(model: ForestModel, x: float) -> float:
    preds = [cart.predict_tree(tree, x) for tree in model.trees]
    lo, hi = min(preds), max(preds)
    if lo == hi:
        return lo
    return min(max(math.fsum(preds) / len(preds), lo), hi)


def to_fields(model: ForestModel) -> dict[str, str]:
    fields = cart.to_fields(model.trees[0])
    del fields["tree"]
    fields.update(kind="forest", n_trees=str(model.n_trees), seed=str(model.seed),
                  bootstrap=str(model.bootstrap).lower())
    for t, tree in enumerate(model.trees):
        fields[f"tree.{t}"] = cart.dumps(tree.root)
    return fields


def from_fields(fields: dict[str, str]) -> ForestModel:
    params = cart.params_from_fields(fields)
    n_trees = int(fields["n_trees"])
    trees = []
    for t in range(n_trees):
        root = cart.loads(fields[f"tree.{t}"])
        trees.append(TreeModel(root, params, len(cart.leaves(root))))
    return ForestModel(tuple(trees), n_trees, fields["bootstrap"] == "true",
                       int(fields["seed"]), params)
