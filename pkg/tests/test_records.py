import numpy as np
import pytest

from wideband_spdc.errors import ConfigError
from wideband_spdc.records import load_config_file, read_csv, write_csv, write_json


def test_csv_roundtrip(tmp_path):
    cols = {"x": np.array([1.0, 2.5e15, np.nan]), "label": ["a", "b", "c"]}
    path = write_csv(tmp_path / "out.csv", {"alpha": 1.5, "items": [1, 2]}, cols, {"note": "hi"})
    header, back = read_csv(path)
    assert header["config"] == {"alpha": 1.5, "items": [1, 2]}
    assert header["note"] == "hi"
    np.testing.assert_array_equal(back["x"][:2], [1.0, 2.5e15])
    assert np.isnan(back["x"][2])
    assert back["label"] == ["a", "b", "c"]


def test_floats_written_exactly(tmp_path):
    x = np.array([0.1 + 0.2, 1 / 3, 6.02214076e23])
    _, back = read_csv(write_csv(tmp_path / "f.csv", {}, {"x": x}))
    np.testing.assert_array_equal(back["x"], x)


def test_config_from_csv_and_json(tmp_path):
    csv_path = write_csv(tmp_path / "a.csv", {"waist_um": 90.0}, {"x": [1.0]})
    assert load_config_file(csv_path) == {"waist_um": 90.0}
    json_path = write_json(tmp_path / "b.json", {"waist_um": 80.0})
    assert load_config_file(json_path) == {"waist_um": 80.0}


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.json")
    (tmp_path / "list.json").write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        load_config_file(tmp_path / "list.json")
