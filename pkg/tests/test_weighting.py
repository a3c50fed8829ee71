import numpy as np
import pytest

from attrilens.data import DataError
from attrilens.weighting import (
    DEFAULT_WEIGHTS,
    apply_feature_weights,
    apply_weights_vector,
    parse_weight_spec,
    validate_weights,
)
from conftest import toy_table


class TestValidate:
    def test_defaults_are_valid_on_benchmark(self, ibm_table):
        table, _ = ibm_table
        out = validate_weights(DEFAULT_WEIGHTS, table.feature_names)
        assert out == {"StockOptionLevel": 2.0, "JobLevel": 2.0}

    def test_unknown_feature(self):
        with pytest.raises(DataError, match="nope"):
            validate_weights({"nope": 2.0}, ["f0", "f1"])

    def test_nonpositive_rejected(self):
        for bad in (0, -1.5):
            with pytest.raises(DataError, match="positive"):
                validate_weights({"f0": bad}, ["f0"])

    def test_values_coerced_to_float(self):
        assert validate_weights({"f0": 3}, ["f0"]) == {"f0": 3.0}


class TestApply:
    def test_selected_columns_scaled(self):
        table = toy_table([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], [0, 1])
        out = apply_feature_weights(table, {"f1": 2.0})
        np.testing.assert_array_equal(out.features, [[1, 4, 3], [4, 10, 6]])

    def test_input_untouched(self):
        table = toy_table([[1.0, 2.0]], [0])
        before = table.features.copy()
        apply_feature_weights(table, {"f0": 5.0})
        np.testing.assert_array_equal(table.features, before)

    def test_unit_weights_identity(self):
        table = toy_table([[1.0, 2.0]], [0])
        out = apply_feature_weights(table, {"f0": 1.0, "f1": 1.0})
        np.testing.assert_array_equal(out.features, table.features)

    def test_vector_matches_table(self, ibm_table):
        table, _ = ibm_table
        weighted = apply_feature_weights(table, DEFAULT_WEIGHTS)
        for i in (0, 3, 77):
            np.testing.assert_array_equal(
                apply_weights_vector(table.features[i], table.feature_names, DEFAULT_WEIGHTS),
                weighted.features[i],
            )


class TestParse:
    def test_basic(self):
        assert parse_weight_spec("JobLevel=2,Age=1.5") == {"JobLevel": 2.0, "Age": 1.5}

    def test_whitespace_and_trailing_comma(self):
        assert parse_weight_spec(" a = 2 , ") == {"a": 2.0}

    def test_missing_equals(self):
        with pytest.raises(DataError, match="name=value"):
            parse_weight_spec("JobLevel2")

    def test_bad_number(self):
        with pytest.raises(DataError, match="value"):
            parse_weight_spec("a=two")
