"""Tabular ingestion: CSV loading, ordinal encoding, splitting, correlation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_DROP = ("Over18", "EmployeeCount", "EmployeeNumber", "StandardHours")
DEFAULT_TARGET = "Attrition"
MAX_CATEGORICAL_CARDINALITY = 64


class DataError(ValueError):
    """Raised for malformed or inconsistent tabular input."""


@dataclass
class RawTable:
    """Parsed CSV: header plus rows of per-column-typed cells (str or float)."""

    column_names: list[str]
    rows: list[list]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        j = self.column_names.index(name)
        return [row[j] for row in self.rows]


@dataclass
class CategoryCodebook:
    """Ordered text->code mappings for every categorical column.

    Codes are assigned by first appearance and are consecutive from 0.
    """

    columns: dict[str, list[str]] = field(default_factory=dict)

    def encode(self, column: str, text: str) -> int:
        try:
            return self.columns[column].index(text)
        except ValueError:
            raise DataError(f"unknown category {text!r} for column {column!r}") from None

    def decode(self, column: str, code: int) -> str:
        values = self.columns[column]
        if not 0 <= code < len(values):
            raise DataError(f"code {code} out of range for column {column!r}")
        return values[code]

    def __contains__(self, column: str) -> bool:
        return column in self.columns


@dataclass
class EncodedTable:
    """Numeric feature matrix with labels and per-column metadata."""

    features: np.ndarray  # (n_rows, n_features) float64
    labels: np.ndarray  # (n_rows,) int, values in {0, 1}
    feature_names: list[str]
    column_kinds: list[str]  # "numeric" | "categorical", aligned with feature_names

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DataError("features and labels disagree on row count")
        if len(self.feature_names) != len(set(self.feature_names)):
            raise DataError("duplicate feature names")
        if len(self.feature_names) != self.features.shape[1]:
            raise DataError("feature_names length mismatch")
        if len(self.column_kinds) != len(self.feature_names):
            raise DataError("column_kinds length mismatch")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise DataError(f"unknown feature {name!r}") from None

    def subset(self, indices) -> "EncodedTable":
        indices = np.asarray(indices, dtype=np.int64)
        return EncodedTable(
            self.features[indices].copy(),
            self.labels[indices].copy(),
            list(self.feature_names),
            list(self.column_kinds),
        )

    def class_counts(self) -> tuple[int, int]:
        """(negatives, positives)."""
        pos = int(self.labels.sum())
        return self.n_rows - pos, pos


@dataclass
class DataSplit:
    train: EncodedTable
    test: EncodedTable
    seed: int
    train_indices: np.ndarray = None
    test_indices: np.ndarray = None


@dataclass
class CorrelationMatrix:
    names: list[str]
    values: np.ndarray

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.names.index(a), self.names.index(b)])


def load_csv(path) -> RawTable:
    """Read a comma-delimited UTF-8 file with a header row.

    Column types are inferred: a column whose every cell parses as a number
    becomes numeric, anything else stays text. Ragged rows and empty files
    are rejected with the offending line number.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file (no header at line 1)") from None
            raw_rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(
                        f"{path}: line {lineno} has {len(row)} cells, expected {len(header)}"
                    )
                raw_rows.append(row)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    n_cols = len(header)
    numeric = [True] * n_cols
    for row in raw_rows:
        for j in range(n_cols):
            if numeric[j]:
                try:
                    float(row[j])
                except ValueError:
                    numeric[j] = False
    typed = [
        [float(cell) if numeric[j] else cell for j, cell in enumerate(row)]
        for row in raw_rows
    ]
    return RawTable(column_names=list(header), rows=typed)


def preprocess(
    raw: RawTable,
    drop: tuple = DEFAULT_DROP,
    target: str = DEFAULT_TARGET,
    max_cardinality: int = MAX_CATEGORICAL_CARDINALITY,
) -> tuple[EncodedTable, CategoryCodebook]:
    """Drop configured columns, ordinally encode categoricals, extract labels.

    The target column must hold only "Yes"/"No"; "Yes" maps to label 1.
    """
    if target not in raw.column_names:
        raise DataError(f"target column {target!r} not present")
    for name in drop:
        if name not in raw.column_names:
            raise DataError(f"drop column {name!r} not present")

    target_values = raw.column(target)
    bad = {v for v in target_values if v not in ("Yes", "No")}
    if bad:
        raise DataError(f"target column holds non-Yes/No values: {sorted(bad)!r}")
    labels = np.array([1 if v == "Yes" else 0 for v in target_values], dtype=np.int64)

    keep = [c for c in raw.column_names if c != target and c not in drop]
    codebook = CategoryCodebook()
    columns = []
    kinds = []
    for name in keep:
        cells = raw.column(name)
        if cells and isinstance(cells[0], float):
            columns.append(np.array(cells, dtype=np.float64))
            kinds.append("numeric")
        else:
            seen: dict[str, int] = {}
            codes = np.empty(len(cells), dtype=np.float64)
            for i, text in enumerate(cells):
                if text not in seen:
                    seen[text] = len(seen)
                codes[i] = seen[text]
            if len(seen) > max_cardinality:
                raise DataError(
                    f"column {name!r} has {len(seen)} categories (cap {max_cardinality})"
                )
            codebook.columns[name] = list(seen)
            columns.append(codes)
            kinds.append("categorical")

    features = (
        np.column_stack(columns) if columns else np.empty((raw.n_rows, 0), dtype=np.float64)
    )
    return EncodedTable(features, labels, keep, kinds), codebook


def decode_table(table: EncodedTable, codebook: CategoryCodebook) -> list[dict]:
    """Per-row dicts with categorical codes turned back into text."""
    out = []
    for i in range(table.n_rows):
        row = {}
        for j, name in enumerate(table.feature_names):
            v = table.features[i, j]
            if name in codebook:
                row[name] = codebook.decode(name, int(round(v)))
            else:
                row[name] = float(v)
        out.append(row)
    return out


def encode_instance(
    values: dict, feature_names: list[str], codebook: CategoryCodebook
) -> np.ndarray:
    """Build a feature vector from a name->value mapping (text categoricals)."""
    missing = [n for n in feature_names if n not in values]
    if missing:
        raise DataError(f"missing features: {missing}")
    unknown = [n for n in values if n not in feature_names]
    if unknown:
        raise DataError(f"unknown features: {unknown}")
    x = np.empty(len(feature_names), dtype=np.float64)
    for j, name in enumerate(feature_names):
        v = values[name]
        if name in codebook:
            if isinstance(v, str):
                x[j] = codebook.encode(name, v)
            else:
                code = int(round(float(v)))
                codebook.decode(name, code)  # validates range
                x[j] = code
        else:
            if isinstance(v, str):
                raise DataError(f"feature {name!r} expects a number, got {v!r}")
            x[j] = float(v)
    return x


def train_test_split(table: EncodedTable, test_ratio: float, seed: int) -> DataSplit:
    """Deterministic stratified split; test size within 1 row of the ratio."""
    if not 0.0 < test_ratio < 1.0:
        raise DataError(f"test_ratio must be in (0, 1), got {test_ratio}")
    for cls in (0, 1):
        if int(np.sum(table.labels == cls)) < 2:
            raise DataError(f"class {cls} has fewer than 2 rows; cannot split")

    rng = np.random.default_rng(seed)
    test_idx = []
    train_idx = []
    n_test_total = int(round(table.n_rows * test_ratio))
    # Allocate per class proportionally, largest class absorbs the remainder.
    per_class = {}
    order = sorted((0, 1), key=lambda c: -int(np.sum(table.labels == c)))
    assigned = 0
    for rank, cls in enumerate(order):
        n_cls = int(np.sum(table.labels == cls))
        if rank == len(order) - 1:
            per_class[cls] = n_test_total - assigned
        else:
            per_class[cls] = int(round(n_cls * test_ratio))
            assigned += per_class[cls]
    for cls in (0, 1):
        idx = np.flatnonzero(table.labels == cls)
        perm = rng.permutation(len(idx))
        take = per_class[cls]
        test_idx.append(idx[perm[:take]])
        train_idx.append(idx[perm[take:]])
    test_indices = np.sort(np.concatenate(test_idx))
    train_indices = np.sort(np.concatenate(train_idx))
    return DataSplit(
        train=table.subset(train_indices),
        test=table.subset(test_indices),
        seed=seed,
        train_indices=train_indices,
        test_indices=test_indices,
    )


def correlation_matrix(table: EncodedTable) -> CorrelationMatrix:
    """Pearson correlation over all rows; rejects zero-variance columns."""
    stds = table.features.std(axis=0)
    for j, s in enumerate(stds):
        if s == 0.0:
            raise DataError(f"column {table.feature_names[j]!r} has zero variance")
    values = np.corrcoef(table.features, rowvar=False)
    values = np.asarray(values, dtype=np.float64).reshape(
        table.n_features, table.n_features
    )
    np.fill_diagonal(values, 1.0)
    return CorrelationMatrix(names=list(table.feature_names), values=values)
