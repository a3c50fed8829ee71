"""Gradient-boosted trees on logistic loss with second-order leaf weights.

Two growth policies share the histogram split search:
  - XGBStyleGBDT: depth-wise growth to a fixed max depth;
  - LGBMStyleGBDT: leaf-wise (best-gain-first) growth to a leaf budget.
"""

from __future__ import annotations

import heapq

import numpy as np

from .base import Classifier, ModelError, sigmoid
from .trees import Tree, bin_features, candidate_thresholds

_PRIOR_CLIP = 1e-6
_MIN_GAIN = 1e-12


def _hist_best_split(binned, g, h, idx, thresholds, l2, min_gain, min_child):
    """Best (gain, feature, bin) for one node, or None."""
    G = float(g[idx].sum())
    H = float(h[idx].sum())
    parent = G * G / (H + l2)
    best = None
    for j in range(binned.shape[1]):
        th = thresholds[j]
        if th.size == 0:
            continue
        b = binned[idx, j]
        cnt = np.bincount(b, minlength=th.size + 1)
        gh = np.bincount(b, weights=g[idx], minlength=th.size + 1)
        hh = np.bincount(b, weights=h[idx], minlength=th.size + 1)
        cl = np.cumsum(cnt)[:-1]
        GL = np.cumsum(gh)[:-1]
        HL = np.cumsum(hh)[:-1]
        valid = (cl >= min_child) & ((idx.size - cl) >= min_child)
        if not valid.any():
            continue
        GR = G - GL
        HR = H - HL
        gain = 0.5 * (GL * GL / (HL + l2) + GR * GR / (HR + l2) - parent) - min_gain
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > _MIN_GAIN and (best is None or gain[k] > best[0] + 1e-15):
            best = (float(gain[k]), j, k)
    return best


def _leaf_weight(g, h, idx, l2):
    return -float(g[idx].sum()) / (float(h[idx].sum()) + l2)


def _grow_depthwise(binned, g, h, thresholds, l2, min_gain, min_child, lr, max_depth):
    tree = Tree()

    def grow(idx, depth):
        best = (
            _hist_best_split(binned, g, h, idx, thresholds, l2, min_gain, min_child)
            if depth < max_depth
            else None
        )
        if best is None:
            return tree.add_leaf(lr * _leaf_weight(g, h, idx, l2))
        _, j, k = best
        node = tree.add_split(j, thresholds[j][k])
        go_left = binned[idx, j] <= k
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        tree.left[node] = left
        tree.right[node] = right
        return node

    grow(np.arange(binned.shape[0]), 0)
    return tree.finalize()


def _grow_leafwise(binned, g, h, thresholds, l2, min_gain, min_child, lr, num_leaves):
    tree = Tree()
    root_idx = np.arange(binned.shape[0])
    node_rows = {}  # tree node id -> row indices (leaves only)
    heap = []
    counter = 0

    def make_leaf(idx):
        nonlocal counter
        node = tree.add_leaf(lr * _leaf_weight(g, h, idx, l2))
        node_rows[node] = idx
        best = _hist_best_split(binned, g, h, idx, thresholds, l2, min_gain, min_child)
        if best is not None:
            heapq.heappush(heap, (-best[0], counter, node, best))
            counter += 1
        return node

    make_leaf(root_idx)
    n_leaves = 1
    while heap and n_leaves < num_leaves:
        _, _, node, (_, j, k) = heapq.heappop(heap)
        idx = node_rows.pop(node)
        # turn the leaf into a split in place
        tree.feature[node] = j
        tree.threshold[node] = float(thresholds[j][k])
        tree.value[node] = 0.0
        go_left = binned[idx, j] <= k
        tree.left[node] = make_leaf(idx[go_left])
        tree.right[node] = make_leaf(idx[~go_left])
        n_leaves += 1
    return tree.finalize()


class _GBDTBase(Classifier):
    supports_margin = True
    tree_space = "margin"
    growth = ""  # "depthwise" | "leafwise"

    def __init__(self, feature_names, base_score, trees, train_losses=None):
        super().__init__(feature_names)
        self.base_score = float(base_score)
        self._trees = trees
        self.train_losses = train_losses or []

    @classmethod
    def fit(cls, table, hp):
        hp.validate()
        X, y = table.features, table.labels.astype(np.float64)
        if X.shape[0] == 0:
            raise ModelError("empty table")
        prior = float(np.clip(y.mean(), _PRIOR_CLIP, 1.0 - _PRIOR_CLIP))
        base = float(np.log(prior / (1.0 - prior)))
        th = candidate_thresholds(X)
        binned = bin_features(X, th)
        margin = np.full(X.shape[0], base)
        trees = []
        losses = []

        def logloss(m):
            p = np.clip(sigmoid(m), 1e-12, 1 - 1e-12)
            return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))

        prev = logloss(margin)
        losses.append(prev)
        for _ in range(hp.gbdt_rounds):
            p = sigmoid(margin)
            g = p - y
            h = p * (1.0 - p)
            if cls.growth == "depthwise":
                tree = _grow_depthwise(
                    binned, g, h, th, hp.gbdt_l2, hp.gbdt_min_split_gain,
                    hp.gbdt_min_child_samples, hp.gbdt_learning_rate,
                    hp.gbdt_max_depth,
                )
            else:
                tree = _grow_leafwise(
                    binned, g, h, th, hp.gbdt_l2, hp.gbdt_min_split_gain,
                    hp.gbdt_min_child_samples, hp.gbdt_learning_rate,
                    hp.gbdt_num_leaves,
                )
            margin = margin + tree.predict(X)
            cur = logloss(margin)
            if cur > prev + 1e-9:
                raise ModelError(
                    f"{cls.kind}: training loss increased ({prev:.6g} -> {cur:.6g})"
                )
            losses.append(cur)
            prev = cur
            trees.append(tree)
        return cls(list(table.feature_names), base, trees, losses)

    def decision_margin(self, X):
        X = self._check(X)
        m = np.full(X.shape[0], self.base_score)
        for tree in self._trees:
            m += tree.predict(X)
        return m

    def predict_proba(self, X):
        return sigmoid(self.decision_margin(X))

    def trees(self):
        return self._trees

    def _payload(self):
        return {
            "base_score": self.base_score,
            "trees": [t.to_payload() for t in self._trees],
        }

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(
            feature_names,
            payload["base_score"],
            [Tree.from_payload(p) for p in payload["trees"]],
        )


class XGBStyleGBDT(_GBDTBase):
    kind = "XGBStyleGBDT"
    growth = "depthwise"


class LGBMStyleGBDT(_GBDTBase):
    kind = "LGBMStyleGBDT"
    growth = "leafwise"
