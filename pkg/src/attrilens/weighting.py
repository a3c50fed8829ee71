"""Scalar feature emphasis: multiply designated columns before training."""

from __future__ import annotations

import numpy as np

from .data import DataError, EncodedTable

DEFAULT_WEIGHTS = {"StockOptionLevel": 2.0, "JobLevel": 2.0}


def validate_weights(weights: dict, feature_names) -> dict:
    for name, w in weights.items():
        if name not in feature_names:
            raise DataError(f"unknown feature {name!r} in weight map")
        if not (isinstance(w, (int, float)) and w > 0):
            raise DataError(f"weight for {name!r} must be a positive number, got {w!r}")
    return {k: float(v) for k, v in weights.items()}


def apply_feature_weights(table: EncodedTable, weights: dict) -> EncodedTable:
    weights = validate_weights(weights, table.feature_names)
    feats = table.features.copy()
    for name, w in weights.items():
        feats[:, table.feature_names.index(name)] *= w
    return EncodedTable(feats, table.labels.copy(), list(table.feature_names), list(table.column_kinds))


def apply_weights_vector(x: np.ndarray, feature_names, weights: dict) -> np.ndarray:
    """Same scaling for a single instance at prediction time."""
    weights = validate_weights(weights, feature_names)
    out = np.asarray(x, dtype=np.float64).copy()
    for name, w in weights.items():
        out[list(feature_names).index(name)] *= w
    return out


def parse_weight_spec(spec: str) -> dict:
    """Parse "name=value[,name=value...]" CLI syntax."""
    weights = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DataError(f"bad weight entry {part!r}; expected name=value")
        name, _, value = part.partition("=")
        try:
            weights[name.strip()] = float(value)
        except ValueError:
            raise DataError(f"bad weight value in {part!r}") from None
    return weights
