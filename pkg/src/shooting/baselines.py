"""Random forest and gradient boosting baselines over the same tree code."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .rng import BOOTSTRAP_STREAM, TREE_STREAM, derive_seed, make_rng
from .tree import RegressionTree, TreeParams, fit_tree, predict_tree


@dataclass(frozen=True)
class RFConfig:
    n_trees: int = 100
    bootstrap: bool = True
    tree_params: TreeParams = TreeParams()
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")


@dataclass(frozen=True)
class GBMConfig:
    n_stages: int = 100
    learning_rate: float = 0.1
    tree_params: TreeParams = TreeParams(max_depth=3)
    seed: int = 0

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValueError("n_stages must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")


@dataclass(frozen=True)
class RandomForest:
    trees: tuple[RegressionTree, ...]
    n_features: int


@dataclass(frozen=True)
class GradientBoosting:
    base_value: float
    learning_rate: float
    trees: tuple[RegressionTree, ...]
    n_features: int


def fit_rf(train: Dataset, config: RFConfig = RFConfig()) -> RandomForest:
    """Bagged trees: each fits an m-row resample drawn with replacement."""
    x = train.features
    y = train.target
    m = train.n_rows
    trees = []
    for i in range(config.n_trees):
        if config.bootstrap:
            idx = make_rng(config.seed, BOOTSTRAP_STREAM, i).integers(0, m, size=m)
            xt, yt = x[idx], y[idx]
        else:
            xt, yt = x, y
        params = replace(
            config.tree_params, rng_seed=derive_seed(config.seed, TREE_STREAM, i)
        )
        trees.append(fit_tree(xt, yt, params))
    return RandomForest(tuple(trees), train.n_features)


def predict_rf(model: RandomForest, features) -> np.ndarray:
    """Mean of the tree outputs, exact so tree order cannot matter."""
    x = np.asarray(features, dtype=float)
    columns = np.column_stack([predict_tree(t, x) for t in model.trees])
    return np.array([math.fsum(row) for row in columns]) / len(model.trees)


def fit_gbm(train: Dataset, config: GBMConfig = GBMConfig()) -> GradientBoosting:
    """Stagewise residual fitting from a constant mean start."""
    x = train.features
    y = train.target
    base = float(y.mean())
    current = np.full(train.n_rows, base)
    trees = []
    for i in range(config.n_stages):
        params = replace(
            config.tree_params, rng_seed=derive_seed(config.seed, TREE_STREAM, i)
        )
        tree = fit_tree(x, y - current, params)
        trees.append(tree)
        current = current + config.learning_rate * predict_tree(tree, x)
    return GradientBoosting(base, config.learning_rate, tuple(trees), train.n_features)


def predict_gbm(model: GradientBoosting, features) -> np.ndarray:
    """Base value plus the learning-rate-scaled stage corrections in order."""
    x = np.asarray(features, dtype=float)
    out = np.full(x.shape[0], model.base_value)
    for tree in model.trees:
        out = out + model.learning_rate * predict_tree(tree, x)
    return out
