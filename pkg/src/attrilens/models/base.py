"""Shared classifier contract: fit / predict / predict_proba / decision_margin."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Fixed zoo order; argmax ties in model selection break toward the earlier entry.
MODEL_KINDS = (
    "RandomForest",
    "DecisionTree",
    "GaussianNB",
    "LogisticRegression",
    "MLP",
    "LGBMStyleGBDT",
    "LinearSVM",
    "XGBStyleGBDT",
)


class ModelError(ValueError):
    """Invalid hyperparameters, degenerate input, or shape mismatch."""


class UnsupportedKindError(ModelError):
    """Operation not defined for this model family (e.g. margin of GaussianNB)."""


@dataclass
class Hyperparams:
    """One bag for the whole zoo; each family reads only its own fields.

    Defaults mirror the mainstream libraries' documented defaults.
    """

    seed: int = 0
    # trees / forest
    tree_max_depth: int | None = None
    tree_min_samples_split: int = 2
    tree_min_samples_leaf: int = 1
    forest_n_trees: int = 100
    forest_bootstrap: bool = True
    forest_max_features: object = "sqrt"  # "sqrt" | int | None
    # gradient boosting (both variants)
    gbdt_rounds: int = 100
    gbdt_learning_rate: float = 0.1
    gbdt_max_depth: int = 6  # XGB-style depth-wise cap
    gbdt_num_leaves: int = 31  # LGBM-style leaf budget
    gbdt_l2: float = 1.0
    gbdt_min_split_gain: float = 0.0
    gbdt_min_child_samples: int = 20
    # linear models
    logistic_l2: float = 1.0
    logistic_tol: float = 1e-8
    logistic_max_iter: int = 100
    svm_c: float = 1.0
    svm_epochs: int = 1000
    # MLP
    mlp_hidden: int = 64
    mlp_epochs: int = 200
    mlp_learning_rate: float = 1e-3
    # GaussianNB
    nb_var_smoothing: float = 1e-9

    def validate(self):
        checks = [
            (self.forest_n_trees >= 1, "forest_n_trees >= 1"),
            (self.gbdt_rounds >= 0, "gbdt_rounds >= 0"),
            (self.gbdt_learning_rate > 0, "gbdt_learning_rate > 0"),
            (self.gbdt_max_depth >= 1, "gbdt_max_depth >= 1"),
            (self.gbdt_num_leaves >= 2, "gbdt_num_leaves >= 2"),
            (self.gbdt_l2 >= 0, "gbdt_l2 >= 0"),
            (self.gbdt_min_split_gain >= 0, "gbdt_min_split_gain >= 0"),
            (self.logistic_l2 >= 0, "logistic_l2 >= 0"),
            (self.svm_c > 0, "svm_c > 0"),
            (self.mlp_hidden >= 1, "mlp_hidden >= 1"),
            (self.mlp_epochs >= 1, "mlp_epochs >= 1"),
            (self.tree_min_samples_split >= 2, "tree_min_samples_split >= 2"),
            (self.tree_min_samples_leaf >= 1, "tree_min_samples_leaf >= 1"),
        ]
        for ok, what in checks:
            if not ok:
                raise ModelError(f"hyperparameter out of range: expected {what}")
        return self


class Classifier:
    """Binary classifier over an ordered feature list; classes are (0, 1).

    predict_proba returns P(label = 1); predict thresholds it at 0.5.
    Margin-capable families expose decision_margin, an additive raw score
    monotonically linked to the probability.
    """

    kind: str = ""
    supports_margin: bool = False
    tree_space: str | None = None  # "probability" | "margin" for tree families

    def __init__(self, feature_names):
        self.feature_names = list(feature_names)
        self.classes = (0, 1)

    def _check(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.feature_names):
            raise ModelError(
                f"expected {len(self.feature_names)} features, got {X.shape[1]}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def decision_margin(self, X) -> np.ndarray:
        raise UnsupportedKindError(f"{self.kind} has no additive decision margin")

    def trees(self):
        """Tree list for tree-based families; None otherwise."""
        return None

    # -- serialization ------------------------------------------------------

    def _payload(self) -> dict:
        raise NotImplementedError

    @classmethod
    def _restore(cls, feature_names, payload) -> "Classifier":
        raise NotImplementedError

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "feature_names": list(self.feature_names),
            "classes": [0, 1],
            "params": self._payload(),
        }


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
