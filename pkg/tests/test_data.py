import numpy as np
import pytest

from cellshot.data import RegressionData, load_csv, save_csv
from cellshot.errors import IngestionError


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        data = RegressionData(rng.standard_normal(10),
                              rng.standard_normal((10, 3)),
                              ["a", "b", "c"], response_name="resp")
        path = tmp_path / "rt.csv"
        save_csv(path, data)
        back = load_csv(path, "resp")
        np.testing.assert_array_equal(back.y, data.y)
        np.testing.assert_array_equal(back.X, data.X)
        assert back.column_names == data.column_names

    def test_missing_cell_named(self, tmp_path):
        path = write(tmp_path, "y,a,b\n1,2,3\n4,,6\n")
        with pytest.raises(IngestionError, match="row 3.*'a'"):
            load_csv(path, "y")

    def test_na_cell(self, tmp_path):
        path = write(tmp_path, "y,a\n1,2\n3,NA\n")
        with pytest.raises(IngestionError, match="missing"):
            load_csv(path, "y")

    def test_non_numeric_cell(self, tmp_path):
        path = write(tmp_path, "y,a\n1,2\nx,3\n")
        with pytest.raises(IngestionError, match="non-numeric"):
            load_csv(path, "y")

    def test_unknown_response(self, tmp_path):
        path = write(tmp_path, "y,a\n1,2\n")
        with pytest.raises(IngestionError, match="'z' not found"):
            load_csv(path, "z")

    def test_ragged_row(self, tmp_path):
        path = write(tmp_path, "y,a,b\n1,2,3\n4,5\n")
        with pytest.raises(IngestionError, match="row 3"):
            load_csv(path, "y")

    def test_duplicate_header(self, tmp_path):
        path = write(tmp_path, "y,a,a\n1,2,3\n")
        with pytest.raises(IngestionError, match="duplicate"):
            load_csv(path, "y")

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "")
        with pytest.raises(IngestionError):
            load_csv(path, "y")

    def test_values_parsed_exactly(self, tmp_path):
        path = write(tmp_path, "y,a\n0.1,-2.5e3\n7,0.25\n")
        data = load_csv(path, "y")
        assert data.y[0] == 0.1
        assert data.X[0, 0] == -2500.0
        assert data.n == 2 and data.p == 1


class TestRegressionData:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            RegressionData(np.zeros(3), np.zeros((4, 2)))

    def test_nan_rejected(self):
        X = np.zeros((3, 2))
        X[1, 1] = np.nan
        with pytest.raises(ValueError):
            RegressionData(np.zeros(3), X)

    def test_default_names(self):
        d = RegressionData(np.zeros(3), np.zeros((3, 2)))
        assert d.column_names == ["x1", "x2"]

    def test_subset(self):
        rng = np.random.default_rng(1)
        d = RegressionData(rng.standard_normal(6),
                           rng.standard_normal((6, 2)))
        sub = d.subset([0, 2, 4])
        np.testing.assert_array_equal(sub.y, d.y[[0, 2, 4]])
        assert sub.n == 3
