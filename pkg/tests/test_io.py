import numpy as np
import pytest

from freesupport.io import (InputError, read_config, read_labels_csv, read_matrix_csv, read_measure_csv,
                            write_measure_csv, write_rows_csv)
from freesupport.measures import make_measure


def test_measure_round_trip(tmp_path, rng):
    w = rng.random(5)
    mu = make_measure(rng.normal(size=(5, 3)), w / w.sum())
    write_measure_csv(tmp_path / "m.csv", mu)
    back = read_measure_csv(tmp_path / "m.csv")
    assert np.array_equal(back.support, mu.support)
    np.testing.assert_allclose(back.weights, mu.weights, rtol=1e-15)


def test_missing_weight_column_means_uniform(tmp_path):
    (tmp_path / "m.csv").write_text("x,y\n0,0\n1,1\n2,2\n3,3\n")
    np.testing.assert_allclose(read_measure_csv(tmp_path / "m.csv").weights, 0.25)


@pytest.mark.parametrize("body, where", [
    ("x1,x2\n0,0\n1\n", ":3:"),
    ("x1,w\n0,0.5\nfoo,0.5\n", ":3:"),
    ("x1,w\n0,0.5\n1,-0.5\n", "weights"),
    ("x1,w\n0,0.3\n1,0.3\n", "sum"),
    ("x1\n", "no data"),
    ("", "empty"),
])
def test_bad_measure_files(tmp_path, body, where):
    (tmp_path / "bad.csv").write_text(body)
    with pytest.raises(InputError, match=where):
        read_measure_csv(tmp_path / "bad.csv")


def test_matrix_and_labels(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n3,4\n")
    (tmp_path / "y.csv").write_text("label\nu\nv\n")
    np.testing.assert_array_equal(read_matrix_csv(tmp_path / "x.csv"), [[1, 2], [3, 4]])
    assert list(read_labels_csv(tmp_path / "y.csv")) == ["u", "v"]
    (tmp_path / "ragged.csv").write_text("a,b\n1,2\n3\n")
    with pytest.raises(InputError):
        read_matrix_csv(tmp_path / "ragged.csv")


def test_rows_csv_header(tmp_path):
    write_rows_csv(tmp_path / "r.csv", [{"a": 1, "b": 2.5}, {"a": 3, "b": 4.0}])
    assert (tmp_path / "r.csv").read_text().splitlines() == ["a,b", "1,2.5", "3,4.0"]


def test_config_parsing(tmp_path):
    (tmp_path / "c.cfg").write_text("# comment\nn-atoms = 5\nseed=3  # trailing\n\n")
    assert read_config(tmp_path / "c.cfg") == {"n_atoms": "5", "seed": "3"}
    (tmp_path / "bad.cfg").write_text("just words\n")
    with pytest.raises(InputError, match=":1:"):
        read_config(tmp_path / "bad.cfg")
