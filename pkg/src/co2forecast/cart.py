"""Greedy binary regression trees with leaf-mean predictions."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._backend import kernels
from .core import Dataset
from .errors import EmptyTrainingSet


@dataclass(frozen=True)
class Leaf:
    value: float
    count: int


@dataclass(frozen=True)
class Internal:
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    params: TreeParams
    leaf_count: int

    def predict(self, xs) -> np.ndarray:
        return np.array([predict_tree(self, float(x)) for x in np.atleast_1d(xs)])


def node_mean(ys: np.ndarray) -> float:
    """Mean clamped to the sample range so rounding never leaves [min, max]."""
    lo, hi = float(ys.min()), float(ys.max())
    if lo == hi:
        return lo
    return min(max(math.fsum(ys) / ys.size, lo), hi)


def _midpoint(a: float, b: float) -> float:
    m = 0.5 * (a + b)
    return m if a <= m < b else a


def _grow(xs: np.ndarray, ys: np.ndarray, params: TreeParams, depth: int) -> TreeNode:
    n = ys.size
    if (n < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)
            or xs[0] == xs[-1]
            or ys.min() == ys.max()):
        return Leaf(node_mean(ys), n)
    k, _ = kernels.best_split(xs, ys, params.min_samples_leaf)
    if k < 0:
        return Leaf(node_mean(ys), n)
    return Internal(
        _midpoint(float(xs[k]), float(xs[k + 1])),
        _grow(xs[: k + 1], ys[: k + 1], params, depth + 1),
        _grow(xs[k + 1:], ys[k + 1:], params, depth + 1),
    )


def _count_leaves(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return _count_leaves(node.left) + _count_leaves(node.right)


def fit_tree(train: Dataset, params: TreeParams | None = None) -> TreeModel:
    if train is None or train.n == 0:
        raise EmptyTrainingSet("cannot grow a tree on zero samples")
    params = params or TreeParams()
    order = np.argsort(train.xs, kind="stable")
    xs = np.ascontiguousarray(train.xs[order])
    ys = np.ascontiguousarray(train.ys[order])
    root = _grow(xs, ys, params, 0)
    return TreeModel(root, params, _count_leaves(root))


def predict_tree(model: TreeModel, x: float) -> float:
    node = model.root
    while isinstance(node, Internal):
        node = node.left if x <= node.threshold else node.right
    return node.value


def depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(node.left), depth(node.right))


def leaves(node: TreeNode) -> list[Leaf]:
    if isinstance(node, Leaf):
        return [node]
    return leaves(node.left) + leaves(node.right)


def dumps(node: TreeNode) -> str:
    if isinstance(node, Leaf):
        return f"leaf({node.value!r},{node.count})"
    return f"({node.threshold!r} {dumps(node.left)} {dumps(node.right)})"


_TOKEN = re.compile(r"\s*(leaf\([^)]*\)|\(|\)|[^\s()]+)")


def loads(text: str) -> TreeNode:
    tokens = _TOKEN.findall(text)
    pos = 0

    def parse() -> TreeNode:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok.startswith("leaf("):
            value, count = tok[5:-1].split(",")
            return Leaf(float(value), int(count))
        if tok != "(":
            raise ValueError(f"unexpected token {tok!r} in tree text")
        threshold = float(tokens[pos])
        pos += 1
        left = parse()
        right = parse()
        if tokens[pos] != ")":
            raise ValueError("unbalanced tree text")
        pos += 1
        return Internal(threshold, left, right)

    root = parse()
    if pos != len(tokens):
        raise ValueError("trailing tokens in tree text")
    return root


def to_fields(model: TreeModel) -> dict[str, str]:
    p = model.params
    return {"kind": "tree", "max_depth": "none" if p.max_depth is None else str(p.max_depth),
            "min_samples_split": str(p.min_samples_split),
            "min_samples_leaf": str(p.min_samples_leaf), "tree": dumps(model.root)}


def params_from_fields(fields: dict[str, str]) -> TreeParams:
    md = fields.get("max_depth", "none")
    return TreeParams(None if md == "none" else int(md),
                      int(fields.get("min_samples_split", 2)),
                      int(fields.get("min_samples_leaf", 1)))


def from_fields(fields: dict[str, str]) -> TreeModel:
    root = loads(fields["tree"])
    return TreeModel(root, params_from_fields(fields), _count_leaves(root))
