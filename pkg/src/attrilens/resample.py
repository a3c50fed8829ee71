"""Class rebalancing: SMOTE, ADASYN, and the SMOTE+Tomek hybrid.

All neighbor searches use Euclidean distance on the encoded features with
ties broken toward the lower row index, so outputs are reproducible bit
for bit given (table, k, seed).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import DataError, EncodedTable


@dataclass
class ResampleReport:
    method: str  # "SMOTE" | "ADASYN" | "SMOTE_TOMEK"
    synthetic_count: int
    removed_count: int
    final_class_counts: tuple[int, int]  # (negatives, positives)
    note: str = ""


def _pairwise_sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    return np.maximum(aa[:, None] + bb[None, :] - 2.0 * (A @ B.T), 0.0)


def _knn_indices(points: np.ndarray, pool: np.ndarray, k: int, exclude_self=False):
    """k nearest pool indices per point, ties by lower pool index."""
    d2 = _pairwise_sq_dists(points, pool)
    if exclude_self:
        np.fill_diagonal(d2, np.inf)
    # stable argsort on distance keeps lower indices first among ties
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def _classes(table: EncodedTable):
    neg, pos = table.class_counts()
    if neg == 0 or pos == 0:
        raise DataError("resampling needs both classes present")
    minority = 1 if pos <= neg else 0
    return minority, min(pos, neg), max(pos, neg)


def _round_categoricals(rows: np.ndarray, table: EncodedTable) -> np.ndarray:
    for j, kind in enumerate(table.column_kinds):
        if kind == "categorical":
            rows[:, j] = np.round(rows[:, j])
    return rows


def _interpolate(minority_rows, neighbor_idx, donors, counts, rng, table):
    """Synthetic rows: x + u (x_nn - x) per allocation in `counts`."""
    synth = []
    for i, c in enumerate(counts):
        for _ in range(int(c)):
            nn = neighbor_idx[i][rng.integers(0, neighbor_idx.shape[1])]
            u = rng.random()
            synth.append(minority_rows[i] + u * (donors[nn] - minority_rows[i]))
    if not synth:
        return np.empty((0, table.n_features))
    return _round_categoricals(np.asarray(synth), table)


def _append(table: EncodedTable, synth: np.ndarray, label: int) -> EncodedTable:
    feats = np.vstack([table.features, synth])
    labels = np.concatenate([table.labels, np.full(len(synth), label, dtype=np.int64)])
    return EncodedTable(feats, labels, list(table.feature_names), list(table.column_kinds))


def smote(table: EncodedTable, k: int = 5, seed: int = 0):
    """Oversample the minority to exact parity by segment interpolation."""
    minority, n_min, n_maj = _classes(table)
    deficit = n_maj - n_min
    if deficit == 0:
        report = ResampleReport("SMOTE", 0, 0, table.class_counts())
        return table.subset(np.arange(table.n_rows)), report
    if n_min < k + 1:
        raise DataError(f"minority class has {n_min} rows; SMOTE needs at least k+1={k + 1}")
    rng = np.random.default_rng(seed)
    min_idx = np.flatnonzero(table.labels == minority)
    rows = table.features[min_idx]
    nn = _knn_indices(rows, rows, k, exclude_self=True)
    base = deficit // n_min
    extra = deficit - base * n_min
    counts = np.full(n_min, base, dtype=np.int64)
    counts[rng.choice(n_min, size=extra, replace=False)] += 1
    synth = _interpolate(rows, nn, rows, counts, rng, table)
    out = _append(table, synth, minority)
    return out, ResampleReport("SMOTE", len(synth), 0, out.class_counts())


def adasyn(table: EncodedTable, k: int = 5, seed: int = 0):
    """Density-adaptive oversampling; allocation follows each minority row's
    share of majority points among its k nearest neighbors over all rows."""
    minority, n_min, n_maj = _classes(table)
    deficit = n_maj - n_min
    if deficit == 0:
        report = ResampleReport("ADASYN", 0, 0, table.class_counts())
        return table.subset(np.arange(table.n_rows)), report
    if n_min < k + 1:
        raise DataError(f"minority class has {n_min} rows; ADASYN needs at least k+1={k + 1}")
    rng = np.random.default_rng(seed)
    min_idx = np.flatnonzero(table.labels == minority)
    rows = table.features[min_idx]
    all_nn = _knn_indices(rows, table.features, k + 1, exclude_self=False)
    note = ""
    ratios = np.empty(n_min)
    for i, neigh in enumerate(all_nn):
        neigh = [n for n in neigh if n != min_idx[i]][:k]
        ratios[i] = np.mean(table.labels[neigh] != minority)
    total = ratios.sum()
    if total == 0.0:
        note = "all minority neighborhoods pure; fell back to uniform SMOTE allocation"
        warnings.warn("ADASYN: " + note)
        weights = np.full(n_min, 1.0 / n_min)
    else:
        weights = ratios / total
    counts = np.floor(weights * deficit + 0.5).astype(np.int64)
    nn = _knn_indices(rows, rows, k, exclude_self=True)
    synth = _interpolate(rows, nn, rows, counts, rng, table)
    out = _append(table, synth, minority)
    return out, ResampleReport("ADASYN", len(synth), 0, out.class_counts(), note)


def tomek_links(table: EncodedTable) -> list[tuple[int, int]]:
    """All opposite-class mutual-nearest-neighbor pairs, each reported once
    as (lower index, higher index)."""
    if table.n_rows < 2:
        return []
    neg, pos = table.class_counts()
    if neg == 0 or pos == 0:
        return []
    d2 = _pairwise_sq_dists(table.features, table.features)
    np.fill_diagonal(d2, np.inf)
    nn = np.argmin(d2, axis=1)  # argmin takes the lowest index among ties
    links = []
    for a in range(table.n_rows):
        b = int(nn[a])
        if a < b and nn[b] == a and table.labels[a] != table.labels[b]:
            links.append((a, b))
    return links


def smote_tomek(table: EncodedTable, k: int = 5, seed: int = 0):
    """SMOTE to parity, then drop both endpoints of every Tomek link."""
    balanced, rep = smote(table, k=k, seed=seed)
    links = tomek_links(balanced)
    drop = sorted({i for pair in links for i in pair})
    keep = np.setdiff1d(np.arange(balanced.n_rows), drop)
    out = balanced.subset(keep)
    return out, ResampleReport(
        "SMOTE_TOMEK", rep.synthetic_count, len(drop), out.class_counts()
    )
