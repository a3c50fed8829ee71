"""Decision tree and random forest on binned Gini split search.

Trees share one flat-array representation (feature, threshold, left, right,
value) so the explanation engines can traverse any tree-based model the
same way. Convention: x[feature] <= threshold goes left; leaves carry
feature = -1 and their value in `value`.
"""

from __future__ import annotations

import numpy as np

from .base import Classifier, ModelError

MAX_BINS = 255
_P_CLIP = 1e-6


class Tree:
    """Flat binary tree; leaf `value` semantics depend on the owner model."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add_leaf(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    def add_split(self, feature: int, threshold: float) -> int:
        self.feature.append(int(feature))
        self.threshold.append(float(threshold))
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def finalize(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=np.float64)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.value = np.asarray(self.value, dtype=np.float64)
        return self

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value per row of X."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0], dtype=np.float64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.value[node]
                continue
            go_left = X[idx, f] <= self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return out

    def leaf_paths(self):
        """(leaf_value, [(feature, threshold, goes_left), ...]) per leaf."""
        out = []
        stack = [(0, [])]
        while stack:
            node, path = stack.pop()
            f = self.feature[node]
            if f < 0:
                out.append((float(self.value[node]), path))
                continue
            t = float(self.threshold[node])
            stack.append((self.left[node], path + [(int(f), t, True)]))
            stack.append((self.right[node], path + [(int(f), t, False)]))
        return out

    def used_features(self) -> set:
        return {int(f) for f in self.feature if f >= 0}

    def to_payload(self) -> dict:
        return {
            "feature": [int(v) for v in self.feature],
            "threshold": [float(v) for v in self.threshold],
            "left": [int(v) for v in self.left],
            "right": [int(v) for v in self.right],
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Tree":
        tree = cls()
        tree.feature = list(payload["feature"])
        tree.threshold = list(payload["threshold"])
        tree.left = list(payload["left"])
        tree.right = list(payload["right"])
        tree.value = list(payload["value"])
        return tree.finalize()


def candidate_thresholds(X: np.ndarray, max_bins: int = MAX_BINS) -> list[np.ndarray]:
    """Per-feature sorted split thresholds (midpoints between distinct values)."""
    out = []
    for j in range(X.shape[1]):
        vals = np.unique(X[:, j])
        if vals.size < 2:
            out.append(np.empty(0, dtype=np.float64))
            continue
        mids = (vals[:-1] + vals[1:]) / 2.0
        if mids.size > max_bins:
            take = np.linspace(0, mids.size - 1, max_bins).round().astype(int)
            mids = mids[np.unique(take)]
        out.append(mids)
    return out


def bin_features(X: np.ndarray, thresholds: list[np.ndarray]) -> np.ndarray:
    """Bin index per cell: number of thresholds strictly below the value."""
    binned = np.empty(X.shape, dtype=np.int64)
    for j, th in enumerate(thresholds):
        binned[:, j] = np.searchsorted(th, X[:, j], side="left")
    return binned


def _best_gini_split(binned, y, idx, feature_subset, thresholds, min_leaf):
    """Best (feature, threshold_bin, impurity_decrease) over a node's rows."""
    n = idx.size
    n_pos = float(y[idx].sum())
    parent_gini = 1.0 - (n_pos / n) ** 2 - ((n - n_pos) / n) ** 2
    best = None  # (decrease, feature, bin)
    for j in feature_subset:
        th = thresholds[j]
        if th.size == 0:
            continue
        b = binned[idx, j]
        cnt = np.bincount(b, minlength=th.size + 1).astype(np.float64)
        pos = np.bincount(b, weights=y[idx], minlength=th.size + 1)
        cl = np.cumsum(cnt)[:-1]
        pl = np.cumsum(pos)[:-1]
        valid = (cl >= min_leaf) & ((n - cl) >= min_leaf)
        if not valid.any():
            continue
        cr = n - cl
        pr = n_pos - pl
        with np.errstate(divide="ignore", invalid="ignore"):
            gini_l = 1.0 - (pl / cl) ** 2 - ((cl - pl) / cl) ** 2
            gini_r = 1.0 - (pr / cr) ** 2 - ((cr - pr) / cr) ** 2
        child = (cl * gini_l + cr * gini_r) / n
        dec = np.where(valid, parent_gini - child, -np.inf)
        k = int(np.argmax(dec))
        if dec[k] > 1e-12 and (best is None or dec[k] > best[0] + 1e-15):
            best = (float(dec[k]), j, k)
    return best


def build_gini_tree(
    X, y, thresholds, binned, rng=None, max_features=None,
    max_depth=None, min_samples_split=2, min_samples_leaf=1, sample_indices=None,
) -> Tree:
    """Greedy Gini tree over pre-binned features; leaf value = class-1 share."""
    tree = Tree()
    n_features = X.shape[1]
    depth_cap = 64 if max_depth is None else max_depth
    root_idx = np.arange(X.shape[0]) if sample_indices is None else sample_indices

    def grow(idx, depth):
        n_pos = y[idx].sum()
        if (
            depth >= depth_cap
            or idx.size < min_samples_split
            or n_pos == 0
            or n_pos == idx.size
        ):
            return tree.add_leaf(n_pos / idx.size)
        if max_features is not None and max_features < n_features:
            subset = np.sort(rng.choice(n_features, size=max_features, replace=False))
        else:
            subset = range(n_features)
        best = _best_gini_split(binned, y, idx, subset, thresholds, min_samples_leaf)
        if best is None:
            return tree.add_leaf(n_pos / idx.size)
        _, j, k = best
        node = tree.add_split(j, thresholds[j][k])
        go_left = binned[idx, j] <= k
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        tree.left[node] = left
        tree.right[node] = right
        return node

    grow(root_idx, 0)
    return tree.finalize()


def _logit(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, _P_CLIP, 1.0 - _P_CLIP)
    return np.log(p / (1.0 - p))


class DecisionTreeClassifier(Classifier):
    kind = "DecisionTree"
    supports_margin = True
    tree_space = "probability"

    def __init__(self, feature_names, tree: Tree):
        super().__init__(feature_names)
        self.tree = tree

    @classmethod
    def fit(cls, table, hp):
        X, y = table.features, table.labels.astype(np.float64)
        if X.shape[0] == 0:
            raise ModelError("empty table")
        th = candidate_thresholds(X)
        binned = bin_features(X, th)
        tree = build_gini_tree(
            X, y, th, binned,
            max_depth=hp.tree_max_depth,
            min_samples_split=hp.tree_min_samples_split,
            min_samples_leaf=hp.tree_min_samples_leaf,
        )
        return cls(list(table.feature_names), tree)

    def predict_proba(self, X):
        return self.tree.predict(self._check(X))

    def decision_margin(self, X):
        return _logit(self.predict_proba(X))

    def trees(self):
        return [self.tree]

    def _payload(self):
        return {"tree": self.tree.to_payload()}

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(feature_names, Tree.from_payload(payload["tree"]))


class RandomForestClassifier(Classifier):
    kind = "RandomForest"
    supports_margin = True
    tree_space = "probability"

    def __init__(self, feature_names, trees: list[Tree]):
        super().__init__(feature_names)
        self._trees = trees

    @classmethod
    def fit(cls, table, hp):
        X, y = table.features, table.labels.astype(np.float64)
        if X.shape[0] == 0:
            raise ModelError("empty table")
        th = candidate_thresholds(X)
        binned = bin_features(X, th)
        n = X.shape[0]
        if hp.forest_max_features == "sqrt":
            max_features = max(1, int(np.sqrt(X.shape[1])))
        else:
            max_features = hp.forest_max_features
        trees = []
        root = np.random.default_rng(hp.seed)
        for t in range(hp.forest_n_trees):
            rng = np.random.default_rng(root.integers(2**63))
            idx = rng.integers(0, n, size=n) if hp.forest_bootstrap else np.arange(n)
            trees.append(
                build_gini_tree(
                    X, y, th, binned, rng=rng, max_features=max_features,
                    max_depth=hp.tree_max_depth,
                    min_samples_split=hp.tree_min_samples_split,
                    min_samples_leaf=hp.tree_min_samples_leaf,
                    sample_indices=np.sort(idx),
                )
            )
        return cls(list(table.feature_names), trees)

    def predict_proba(self, X):
        X = self._check(X)
        acc = np.zeros(X.shape[0])
        for tree in self._trees:
            acc += tree.predict(X)
        return acc / len(self._trees)

    def decision_margin(self, X):
        return _logit(self.predict_proba(X))

    def trees(self):
        return self._trees

    def _payload(self):
        return {"trees": [t.to_payload() for t in self._trees]}

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(feature_names, [Tree.from_payload(p) for p in payload["trees"]])
