"""Bagged regression trees with variance-reducing splits."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import TooFewRows
from ..ingest import Dataset
from .artifact import KIND_RANDOM_FOREST, ModelArtifact

_LEAF = -1


class _TreeBuilder:
    """Grows one CART regression tree into flat node arrays."""

    def __init__(self, X: np.ndarray, y: np.ndarray, max_depth: int, min_leaf: int):
        self.X = X
        self.y = y
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(0.0)
        return len(self.feature) - 1

    def build(self, idx: np.ndarray, depth: int = 0) -> int:
        node = self._new_node()
        y = self.y[idx]
        self.value[node] = float(y.mean())
        if depth >= self.max_depth or len(idx) < 2 * self.min_leaf:
            return node
        node_sse = float(((y - y.mean()) ** 2).sum())
        if node_sse <= 0.0:
            return node
        split = self._best_split(idx, node_sse)
        if split is None:
            return node
        feat, thr = split
        mask = self.X[idx, feat] <= thr
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = self.build(idx[mask], depth + 1)
        self.right[node] = self.build(idx[~mask], depth + 1)
        return node

    def _best_split(self, idx: np.ndarray, node_sse: float):
        """Scan features in column order; strict improvement keeps ties stable."""
        best = None
        best_sse = node_sse
        y = self.y[idx]
        n = len(idx)
        counts = np.arange(self.min_leaf, n - self.min_leaf + 1)  # rows sent left
        if len(counts) == 0:
            return None
        for feat in range(self.X.shape[1]):
            x = self.X[idx, feat]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            ys = y[order]
            csum = np.cumsum(ys)
            csq = np.cumsum(ys * ys)
            # a cut between xs[i-1] and xs[i] needs distinct values there
            valid = counts[xs[counts - 1] < xs[counts]]
            if len(valid) == 0:
                continue
            left_sum = csum[valid - 1]
            left_sq = csq[valid - 1]
            left_sse = left_sq - left_sum**2 / valid
            right_sum = csum[-1] - left_sum
            right_sq = csq[-1] - left_sq
            right_sse = right_sq - right_sum**2 / (n - valid)
            sse = left_sse + right_sse
            k = int(np.argmin(sse))
            if sse[k] < best_sse - 1e-12:
                best_sse = float(sse[k])
                cut = valid[k]
                thr = float((xs[cut - 1] + xs[cut]) / 2.0)
                if thr >= xs[cut]:  # midpoint rounded up to the right value
                    thr = float(xs[cut - 1])
                best = (feat, thr)
        return best

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }


def _predict_tree(tree: Mapping, X: np.ndarray) -> np.ndarray:
    feature = tree["feature"]
    threshold = tree["threshold"]
    left = tree["left"]
    right = tree["right"]
    value = tree["value"]
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while feature[node] != _LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


def fit_random_forest(
    train: Dataset,
    trees: int = 200,
    max_depth: int = 8,
    min_leaf: int = 2,
    seed: int = 0,
) -> ModelArtifact:
    """Bootstrap-aggregated regression trees; prediction is the tree mean."""
    n = train.n_rows
    if n < 2 * min_leaf:
        raise TooFewRows(f"need at least {2 * min_leaf} rows, got {n}")
    rng = np.random.default_rng(seed)
    forest = []
    for _ in range(trees):
        idx = rng.integers(0, n, size=n)
        builder = _TreeBuilder(train.features, train.targets, max_depth, min_leaf)
        builder.build(idx)
        forest.append(builder.to_dict())
    params = {
        "trees": forest,
        "n_trees": trees,
        "max_depth": max_depth,
        "min_leaf": min_leaf,
    }
    preds = predict_forest(params, train.features)
    sse = float(((preds - train.targets) ** 2).sum())
    return ModelArtifact(
        kind=KIND_RANDOM_FOREST,
        parameters=params,
        spec=train.spec,
        seed=seed,
        training_log=(sse,),
    )


def predict_forest(parameters: Mapping, X: np.ndarray) -> np.ndarray:
    trees = parameters["trees"]
    out = np.zeros(X.shape[0])
    for tree in trees:
        out += _predict_tree(tree, X)
    return out / len(trees)
