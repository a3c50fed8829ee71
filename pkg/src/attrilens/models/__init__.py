"""Eight-classifier zoo behind one train/predict contract."""

from __future__ import annotations

import json

import numpy as np

from .base import (
    MODEL_KINDS,
    Classifier,
    Hyperparams,
    ModelError,
    UnsupportedKindError,
    sigmoid,
)
from .bayes import GaussianNBClassifier
from .boosting import LGBMStyleGBDT, XGBStyleGBDT
from .linear import LinearSVMClassifier, LogisticRegressionClassifier
from .mlp import MLPClassifier
from .trees import DecisionTreeClassifier, RandomForestClassifier, Tree

_REGISTRY = {
    "RandomForest": RandomForestClassifier,
    "DecisionTree": DecisionTreeClassifier,
    "GaussianNB": GaussianNBClassifier,
    "LogisticRegression": LogisticRegressionClassifier,
    "MLP": MLPClassifier,
    "LGBMStyleGBDT": LGBMStyleGBDT,
    "LinearSVM": LinearSVMClassifier,
    "XGBStyleGBDT": XGBStyleGBDT,
}

ARTIFACT_FORMAT = "attrilens-model/1"


def fit(kind: str, table, hp: Hyperparams | None = None) -> Classifier:
    if kind not in _REGISTRY:
        raise ModelError(f"unknown model kind {kind!r}")
    if np.unique(table.labels).size < 2:
        raise ModelError("training data contains a single class")
    hp = (hp or Hyperparams()).validate()
    return _REGISTRY[kind].fit(table, hp)


def save_model(model: Classifier, path):
    """Versioned, self-describing JSON artifact; floats round-trip exactly."""
    doc = {"format": ARTIFACT_FORMAT}
    doc.update(model.to_payload())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> Classifier:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot load model artifact {path}: {exc}") from exc
    if doc.get("format") != ARTIFACT_FORMAT:
        raise ModelError(
            f"model artifact {path}: unsupported format {doc.get('format')!r}"
        )
    kind = doc.get("kind")
    if kind not in _REGISTRY:
        raise ModelError(f"model artifact {path}: unknown kind {kind!r}")
    return _REGISTRY[kind]._restore(doc["feature_names"], doc["params"])


__all__ = [
    "MODEL_KINDS",
    "ARTIFACT_FORMAT",
    "Classifier",
    "Hyperparams",
    "ModelError",
    "UnsupportedKindError",
    "Tree",
    "fit",
    "save_model",
    "load_model",
    "sigmoid",
    "DecisionTreeClassifier",
    "RandomForestClassifier",
    "GaussianNBClassifier",
    "LogisticRegressionClassifier",
    "MLPClassifier",
    "LGBMStyleGBDT",
    "LinearSVMClassifier",
    "XGBStyleGBDT",
]
