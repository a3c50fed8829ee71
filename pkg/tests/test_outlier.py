import numpy as np
import pytest

from attrilens.data import DataError
from attrilens.isoforest import (
    EULER_GAMMA,
    average_path_length,
    fit_isolation_forest,
    remove_outliers,
)
from conftest import toy_table


@pytest.fixture(scope="module")
def blob_with_outlier():
    rng = np.random.default_rng(8)
    X = np.vstack([rng.normal(0, 1, size=(200, 2)), [[10.0, 10.0]]])
    return toy_table(X, [0] * 200 + [1])


@pytest.fixture(scope="module")
def blob_forest(blob_with_outlier):
    return fit_isolation_forest(blob_with_outlier, n_trees=100, subsample=64, seed=4)


def tree_depth(node):
    if node.feature < 0:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


class TestFit:
    def test_single_repeated_row_rejected(self):
        table = toy_table([[1.0, 2.0]] * 5, [0] * 5)
        with pytest.raises(DataError, match="single distinct"):
            fit_isolation_forest(table, n_trees=3, subsample=4, seed=0)

    def test_subsample_too_small(self):
        table = toy_table([[0.0], [1.0]], [0, 1])
        with pytest.raises(DataError):
            fit_isolation_forest(table, subsample=1, seed=0)

    def test_deterministic_structure(self, blob_with_outlier):
        a = fit_isolation_forest(blob_with_outlier, n_trees=10, subsample=32, seed=3)
        b = fit_isolation_forest(blob_with_outlier, n_trees=10, subsample=32, seed=3)

        def flat(node, acc):
            acc.append((node.feature, node.threshold, node.size))
            if node.feature >= 0:
                flat(node.left, acc)
                flat(node.right, acc)
            return acc

        for ta, tb in zip(a.trees, b.trees):
            assert flat(ta, []) == flat(tb, [])

    def test_depth_capped(self, blob_forest):
        cap = int(np.ceil(np.log2(blob_forest.subsample_size)))
        for tree in blob_forest.trees:
            assert tree_depth(tree) <= cap


class TestScore:
    def test_normalizer_closed_form(self):
        # c(m) = 2 H(m-1) - 2(m-1)/m, H by ln + Euler's constant
        for m in (2, 16, 256):
            expected = 2.0 * (np.log(m - 1) + EULER_GAMMA) - 2.0 * (m - 1) / m
            assert average_path_length(m) == pytest.approx(expected, rel=1e-12)

    def test_score_half_at_mean_path(self):
        # if E[h(x)] equals c(n) the exponent is -1, so the score is 0.5
        c = average_path_length(256)
        assert 2.0 ** (-c / c) == pytest.approx(0.5)

    def test_scores_strictly_inside_unit_interval(self, blob_forest, blob_with_outlier):
        scores = blob_forest.scores(blob_with_outlier.features)
        assert np.all(scores > 0.0) and np.all(scores < 1.0)

    def test_outlier_gets_max_score(self, blob_forest, blob_with_outlier):
        scores = blob_forest.scores(blob_with_outlier.features)
        assert int(np.argmax(scores)) == 200
        assert scores[200] > scores[:200].max()

    def test_dimension_mismatch(self, blob_forest):
        with pytest.raises(DataError):
            blob_forest.anomaly_score(np.zeros(5))

    def test_order_invariance(self, blob_forest, blob_with_outlier):
        X = blob_with_outlier.features
        perm = np.random.default_rng(0).permutation(X.shape[0])
        np.testing.assert_array_equal(
            blob_forest.scores(X)[perm], blob_forest.scores(X[perm])
        )


class TestRemove:
    def test_zero_contamination(self, blob_forest, blob_with_outlier):
        out, removed = remove_outliers(blob_with_outlier, blob_forest, 0.0)
        assert removed == []
        np.testing.assert_array_equal(out.features, blob_with_outlier.features)

    def test_quota_arithmetic(self, blob_forest, blob_with_outlier):
        table = blob_with_outlier.subset(np.arange(100))
        _, removed = remove_outliers(table, blob_forest, 0.05)
        assert len(removed) == 5

    def test_planted_outlier_removed_first(self, blob_forest, blob_with_outlier):
        out, removed = remove_outliers(blob_with_outlier, blob_forest, 1.0 / 201.0)
        assert removed == [200]
        assert out.n_rows == 200

    def test_survivors_unchanged(self, blob_forest, blob_with_outlier):
        out, removed = remove_outliers(blob_with_outlier, blob_forest, 0.1)
        keep = np.setdiff1d(np.arange(201), removed)
        np.testing.assert_array_equal(out.features, blob_with_outlier.features[keep])
        np.testing.assert_array_equal(out.labels, blob_with_outlier.labels[keep])

    def test_monotone_quota(self, blob_forest, blob_with_outlier):
        _, small = remove_outliers(blob_with_outlier, blob_forest, 0.02)
        _, big = remove_outliers(blob_with_outlier, blob_forest, 0.10)
        assert set(small) <= set(big)

    def test_contamination_range(self, blob_forest, blob_with_outlier):
        for bad in (-0.1, 0.5, 0.9):
            with pytest.raises(DataError):
                remove_outliers(blob_with_outlier, blob_forest, bad)
