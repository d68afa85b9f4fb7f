"""Axis-aligned regression trees grown by greedy squared-error reduction.

Nodes live in flat parallel arrays rather than linked objects: fitting
appends in preorder, prediction descends all rows at once level by level.
Split ties resolve to the lowest feature index, then the lowest threshold,
so refitting on identical data reproduces the identical structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    """Growth limits. max_depth None and feature_subsample None mean unlimited/all."""

    max_depth: int | None = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    feature_subsample: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be None or >= 0")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.feature_subsample is not None and self.feature_subsample < 1:
            raise ValueError("feature_subsample must be None or >= 1")


@dataclass(frozen=True)
class RegressionTree:
    """Flat-array tree: feature[i] == LEAF marks a leaf, value[i] its mean.

    threshold is nan at leaves; left/right hold child node indices for
    internal nodes and LEAF otherwise.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    depth: int
    n_features: int

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))


def _best_split(
    x: np.ndarray, y: np.ndarray, candidates: np.ndarray, min_leaf: int
) -> tuple[int, float] | None:
    """Lowest total child SSE over (feature, midpoint threshold) pairs.

    Returns None when no candidate position keeps both children at
    min_leaf rows. SSE per side comes from prefix sums of y and y^2.
    """
    m = y.size
    total1 = float(y.sum())
    total2 = float((y * y).sum())
    best_sse = np.inf
    best: tuple[int, float] | None = None
    for f in candidates:
        xv = x[:, f]
        order = np.argsort(xv, kind="stable")
        xs = xv[order]
        ys = y[order]
        # positions p split into left = [0..p], right = [p+1..m-1]
        distinct = xs[:-1] < xs[1:]
        sizes_left = np.arange(1, m)
        feasible = distinct & (sizes_left >= min_leaf) & (m - sizes_left >= min_leaf)
        if not feasible.any():
            continue
        pos = np.nonzero(feasible)[0]
        c1 = np.cumsum(ys)[pos]
        c2 = np.cumsum(ys * ys)[pos]
        nl = pos + 1.0
        nr = m - nl
        sse = (c2 - c1 * c1 / nl) + (total2 - c2 - (total1 - c1) ** 2 / nr)
        k = int(np.argmin(sse))
        if sse[k] < best_sse:
            p = int(pos[k])
            thr = 0.5 * (xs[p] + xs[p + 1])
            if thr >= xs[p + 1]:
                # midpoint rounded up to the right value; pin to the left one
                thr = xs[p]
            best_sse = float(sse[k])
            best = (int(f), float(thr))
    return best


def fit_tree(features, targets, params: TreeParams = TreeParams()) -> RegressionTree:
    """Grow a tree top-down; every leaf predicts the mean of its rows.

    Splitting stops at max_depth, below min_samples_split, at exactly
    constant targets, or when min_samples_leaf leaves no feasible cut.
    """
    x = np.ascontiguousarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if y.ndim != 1 or y.size != x.shape[0]:
        raise ValueError("targets must be a vector matching the feature rows")
    if y.size == 0:
        raise ValueError("cannot fit a tree on zero rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    n = x.shape[1]
    sub = params.feature_subsample
    rng = None
    if sub is not None and sub < n:
        rng = np.random.default_rng(params.rng_seed)

    feat: list[int] = []
    thr: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    max_depth_seen = 0

    def new_node() -> int:
        feat.append(LEAF)
        thr.append(np.nan)
        left.append(LEAF)
        right.append(LEAF)
        value.append(0.0)
        return len(feat) - 1

    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        max_depth_seen = max(max_depth_seen, depth)
        ysub = y[idx]
        value[node] = float(ysub.mean())
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        if idx.size < params.min_samples_split:
            continue
        if ysub.min() == ysub.max():
            continue
        if rng is not None:
            candidates = np.sort(rng.choice(n, size=sub, replace=False))
        else:
            candidates = np.arange(n)
        split = _best_split(x[idx], ysub, candidates, params.min_samples_leaf)
        if split is None:
            continue
        f, t = split
        go_left = x[idx, f] <= t
        feat[node] = f
        thr[node] = t
        left_child = new_node()
        right_child = new_node()
        left[node] = left_child
        right[node] = right_child
        # push right first so preorder (left before right) pops out
        stack.append((right_child, idx[~go_left], depth + 1))
        stack.append((left_child, idx[go_left], depth + 1))

    return RegressionTree(
        feature=np.array(feat, dtype=np.int64),
        threshold=np.array(thr, dtype=float),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=float),
        depth=max_depth_seen,
        n_features=n,
    )


def predict_tree(tree: RegressionTree, features) -> np.ndarray:
    """Route each row to its leaf (<= goes left) and return leaf means."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if x.shape[1] != tree.n_features:
        raise ValueError(
            f"feature count {x.shape[1]} does not match training dimension "
            f"{tree.n_features}"
        )
    node = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(tree.depth + 1):
        internal = tree.feature[node] != LEAF
        if not internal.any():
            break
        rows = np.nonzero(internal)[0]
        at = node[rows]
        go_left = x[rows, tree.feature[at]] <= tree.threshold[at]
        node[rows] = np.where(go_left, tree.left[at], tree.right[at])
    return tree.value[node]


def training_sse(tree: RegressionTree, features, targets) -> float:
    """Sum of squared training errors, handy for stopping diagnostics."""
    pred = predict_tree(tree, features)
    resid = np.asarray(targets, dtype=float) - pred
    return float(resid @ resid)
