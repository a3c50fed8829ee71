"""Metrics, stratified k-fold cross-validation, and best-model selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import models
from .data import DataError, EncodedTable
from .isoforest import fit_isolation_forest, remove_outliers
from .models import Hyperparams
from .resample import adasyn, smote, smote_tomek
from .weighting import apply_feature_weights


@dataclass
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None = None
    roc_points: list = None


@dataclass
class PipelineFlags:
    outlier_detect: bool = False
    imblearn: bool = False
    imblearn_method: str = "smote"  # smote | adasyn | smote_tomek
    weighted_feature: bool = False
    weights: dict = field(default_factory=dict)
    contamination: float = 0.05
    iso_trees: int = 100
    iso_subsample: int = 256
    smote_k: int = 5


@dataclass
class ModelSelectionReport:
    per_model: dict  # kind -> mean CV accuracy
    best_kind: str
    best_accuracy: float
    refit: models.Classifier
    pipeline_flags: PipelineFlags
    removed_outliers: list = field(default_factory=list)
    resample_report: object = None


def k_fold_indices(n: int, k: int, labels=None, seed: int = 0, stratified: bool = True):
    """Deterministic fold partition of [0, n); sizes differ by at most 1.

    Stratified folds keep each class's per-fold count within 1 row.
    """
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds n={n}")
    rng = np.random.default_rng(seed)
    if stratified:
        labels = np.asarray(labels)
        fold_of = np.empty(n, dtype=np.int64)
        start = 0  # rotates which folds absorb each class's remainder rows
        for cls in np.unique(labels):
            idx = np.flatnonzero(labels == cls)
            if idx.size < k:
                raise DataError(f"class {cls} has {idx.size} rows, fewer than k={k}")
            idx = idx[rng.permutation(idx.size)]
            fold_of[idx] = (np.arange(idx.size) + start) % k
            start = (start + idx.size) % k
    else:
        perm = rng.permutation(n)
        fold_of = np.empty(n, dtype=np.int64)
        fold_of[perm] = np.arange(n) % k
    out = []
    everything = np.arange(n)
    for f in range(k):
        valid = everything[fold_of == f]
        train = everything[fold_of != f]
        out.append((train, valid))
    return out


def cross_val_score(
    kind: str, table: EncodedTable, k: int = 9, hp: Hyperparams | None = None,
    seed: int = 0, stratified: bool = True,
) -> float:
    """Mean validation accuracy over k folds."""
    hp = hp or Hyperparams()
    folds = k_fold_indices(table.n_rows, k, table.labels, seed=seed, stratified=stratified)
    accs = []
    for train_idx, valid_idx in folds:
        model = models.fit(kind, table.subset(train_idx), hp)
        pred = model.predict(table.features[valid_idx])
        accs.append(float(np.mean(pred == table.labels[valid_idx])))
    return float(np.mean(accs))


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise DataError("y_true and y_pred lengths differ")
    return ConfusionMatrix(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
    )


def roc_curve(y_true, scores):
    """ROC points from the tie-grouped score-threshold sweep; (0,0) to (1,1)."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC needs both classes present")
    order = np.argsort(-scores, kind="stable")
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            if y_true[order[j]] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    dedup = [points[0]]
    for p in points[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    return dedup


def auc_from_roc(points) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return float(area)


def metrics(cm: ConfusionMatrix, scores=None, y_true=None) -> MetricsReport:
    """accuracy/precision/recall/F1 from counts; trapezoidal AUC if scores
    and labels are supplied. F1 is 0 when precision + recall is 0."""
    if cm.total == 0:
        raise DataError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if (cm.tp + cm.fp) else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if (precision + recall) > 0
        else 0.0
    )
    auc = None
    roc = None
    if scores is not None:
        if y_true is None:
            raise DataError("AUC needs y_true alongside scores")
        roc = roc_curve(y_true, scores)
        auc = auc_from_roc(roc)
    return MetricsReport(accuracy, precision, recall, f1, auc, roc)


def prepare_training_table(table: EncodedTable, flags: PipelineFlags, seed: int = 0):
    """Apply the conditional blocks in order: outliers, resampling, weights."""
    removed = []
    resample_report = None
    if flags.outlier_detect:
        forest = fit_isolation_forest(
            table, n_trees=flags.iso_trees, subsample=flags.iso_subsample, seed=seed + 101
        )
        table, removed = remove_outliers(table, forest, flags.contamination)
        if table.n_rows == 0:
            raise DataError("outlier removal emptied the training table")
    if flags.imblearn:
        method = {"smote": smote, "adasyn": adasyn, "smote_tomek": smote_tomek}.get(
            flags.imblearn_method
        )
        if method is None:
            raise DataError(f"unknown resampling method {flags.imblearn_method!r}")
        table, resample_report = method(table, k=flags.smote_k, seed=seed + 202)
    if flags.weighted_feature and flags.weights:
        table = apply_feature_weights(table, flags.weights)
    return table, removed, resample_report


def select_best(
    table: EncodedTable,
    flags: PipelineFlags | None = None,
    k: int = 9,
    hp_by_kind: dict | None = None,
    seed: int = 0,
    kinds=models.MODEL_KINDS,
) -> ModelSelectionReport:
    """Cross-validate every kind on the processed training table, keep the
    argmax (earlier-listed kind wins ties), and refit it on the whole table."""
    flags = flags or PipelineFlags()
    hp_by_kind = hp_by_kind or {}
    processed, removed, resample_report = prepare_training_table(table, flags, seed=seed)
    per_model = {}
    best_kind = None
    best_acc = -1.0
    for kind in kinds:
        hp = hp_by_kind.get(kind, Hyperparams(seed=seed))
        acc = cross_val_score(kind, processed, k=k, hp=hp, seed=seed + 303)
        per_model[kind] = acc
        if acc > best_acc:
            best_acc = acc
            best_kind = kind
    refit = models.fit(best_kind, processed, hp_by_kind.get(best_kind, Hyperparams(seed=seed)))
    return ModelSelectionReport(
        per_model=per_model,
        best_kind=best_kind,
        best_accuracy=best_acc,
        refit=refit,
        pipeline_flags=flags,
        removed_outliers=removed,
        resample_report=resample_report,
    )
