"""Isolation forest: random-split trees scoring anomalies by path length."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError, EncodedTable

EULER_GAMMA = 0.5772156649015329


def average_path_length(m) -> float:
    """c(m) = 2 H(m-1) - 2(m-1)/m with H(i) ~ ln(i) + Euler's gamma."""
    m = float(m)
    if m <= 1.0:
        return 0.0
    return 2.0 * (np.log(m - 1.0) + EULER_GAMMA) - 2.0 * (m - 1.0) / m


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "._Node" = None
    right: "._Node" = None
    size: int = 0  # external nodes only


class IsolationForest:
    def __init__(self, trees, subsample_size, seed):
        self.trees = trees
        self.n_trees = len(trees)
        self.subsample_size = int(subsample_size)
        self.seed = int(seed)

    def path_length(self, x: np.ndarray) -> float:
        """Mean adjusted isolation depth of x over all trees."""
        total = 0.0
        for root in self.trees:
            node, depth = root, 0
            while node.feature >= 0:
                node = node.left if x[node.feature] <= node.threshold else node.right
                depth += 1
            total += depth + average_path_length(node.size)
        return total / self.n_trees

    def anomaly_score(self, x) -> float:
        """s = 2^(-E[h(x)] / c(subsample_size)), strictly inside (0, 1)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self._dim,):
            raise DataError(f"expected {self._dim}-dim vector, got shape {x.shape}")
        c = average_path_length(self.subsample_size)
        return float(2.0 ** (-self.path_length(x) / c))

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.array([self.anomaly_score(x) for x in X])


def _build_tree(X, idx, depth, limit, rng) -> _Node:
    if depth >= limit or idx.size <= 1:
        return _Node(size=idx.size)
    sub = X[idx]
    lo = sub.min(axis=0)
    hi = sub.max(axis=0)
    varying = np.flatnonzero(hi > lo)
    if varying.size == 0:  # duplicate rows
        return _Node(size=idx.size)
    f = int(varying[rng.integers(0, varying.size)])
    t = float(rng.uniform(lo[f], hi[f]))
    go_left = sub[:, f] <= t
    if go_left.all() or not go_left.any():
        # degenerate draw at the boundary; isolate the extreme point instead
        t = float((lo[f] + hi[f]) / 2.0)
        go_left = sub[:, f] <= t
    node = _Node(feature=f, threshold=t)
    node.left = _build_tree(X, idx[go_left], depth + 1, limit, rng)
    node.right = _build_tree(X, idx[~go_left], depth + 1, limit, rng)
    return node


def fit_isolation_forest(
    table: EncodedTable, n_trees: int = 100, subsample: int = 256, seed: int = 0
) -> IsolationForest:
    """Each tree grows on its own seeded subsample to depth ceil(log2(size))."""
    X = table.features
    n = X.shape[0]
    subsample = min(subsample, n)
    if subsample < 2:
        raise DataError("isolation forest needs a subsample of at least 2 rows")
    if np.all(X == X[0]):
        raise DataError("table has a single distinct row; nothing to isolate")
    root = np.random.default_rng(seed)
    limit = int(np.ceil(np.log2(subsample)))
    trees = []
    for _ in range(n_trees):
        rng = np.random.default_rng(root.integers(2**63))
        idx = rng.choice(n, size=subsample, replace=False)
        trees.append(_build_tree(X, np.sort(idx), 0, limit, rng))
    forest = IsolationForest(trees, subsample, seed)
    forest._dim = X.shape[1]
    return forest


def remove_outliers(table: EncodedTable, forest: IsolationForest, contamination: float = 0.05):
    """Drop the ceil(contamination * n) highest-scoring rows (ties: lower
    index goes first); returns (filtered table, removed indices)."""
    if not 0.0 <= contamination < 0.5:
        raise DataError(f"contamination must be in [0, 0.5), got {contamination}")
    n = table.n_rows
    quota = int(np.ceil(contamination * n))
    if quota == 0:
        return table.subset(np.arange(n)), []
    scores = forest.scores(table.features)
    # sort by (-score, index): equal scores drop the lower index first
    order = np.lexsort((np.arange(n), -scores))
    removed = sorted(int(i) for i in order[:quota])
    keep = np.setdiff1d(np.arange(n), removed)
    return table.subset(keep), removed
