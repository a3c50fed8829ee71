import os

import numpy as np
import pytest

from attrilens.data import EncodedTable, load_csv, preprocess, train_test_split

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def dataset_path() -> str:
    """The real benchmark CSV when provided, else the bundled replica."""
    return os.environ.get(
        "ATTRILENS_DATA", os.path.join(REPO_ROOT, "data", "hr_attrition.csv")
    )


@pytest.fixture(scope="session")
def ibm_path():
    path = dataset_path()
    if not os.path.exists(path):
        pytest.skip(f"dataset not found at {path}")
    return path


@pytest.fixture(scope="session")
def ibm_raw(ibm_path):
    return load_csv(ibm_path)


@pytest.fixture(scope="session")
def ibm_table(ibm_raw):
    table, codebook = preprocess(ibm_raw)
    return table, codebook


@pytest.fixture(scope="session")
def ibm_split(ibm_table):
    table, _ = ibm_table
    return train_test_split(table, 0.2, 42)


def toy_table(X, y, kinds=None):
    X = np.asarray(X, dtype=float)
    names = [f"f{j}" for j in range(X.shape[1])]
    return EncodedTable(
        X, np.asarray(y, dtype=int), names, kinds or ["numeric"] * X.shape[1]
    )
