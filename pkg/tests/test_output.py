import numpy as np
import pytest

from ionwells import output


def test_canonical_json_sorts_and_compacts():
    s = output.canonical_json({"b": 1, "a": [1.5, 2]})
    assert s == '{"a":[1.5,2],"b":1}'


def test_canonical_json_handles_numpy_scalars():
    s = output.canonical_json({"x": np.float64(0.5), "n": np.int64(3), "v": np.arange(2)})
    assert s == '{"n":3,"v":[0,1],"x":0.5}'


def test_config_hash_is_order_insensitive():
    h1 = output.config_hash({"a": 1, "b": 2.0})
    h2 = output.config_hash({"b": 2.0, "a": 1})
    assert h1 == h2
    assert h1 != output.config_hash({"a": 1, "b": 2.5})


def test_write_csv_round_trip(tmp_path):
    path = str(tmp_path / "out.csv")
    cols = {"x": np.array([0.0, 0.5, 1.0]), "y": np.array([1.0, 2.0, 4.0])}
    meta = {"experiment": "demo", "tol": 1e-9, "flag": True}
    env = output.write_csv(path, cols, meta)
    assert env.format == "csv"
    back_cols, back_meta = output.read_csv(path)
    assert list(back_cols) == ["x", "y"]
    assert np.array_equal(back_cols["x"], cols["x"])
    assert np.array_equal(back_cols["y"], cols["y"])
    assert back_meta["experiment"] == "demo"
    assert float(back_meta["tol"]) == 1e-9
    assert back_meta["flag"] == "true"
    assert "timestamp" in back_meta


def test_write_csv_metadata_sorted_timestamp_last(tmp_path):
    path = str(tmp_path / "m.csv")
    output.write_csv(path, {"x": np.zeros(1)}, {"zeta": 1, "alpha": 2})
    lines = [l for l in open(path).read().splitlines() if l.startswith("#")]
    keys = [l.split(" = ")[0][2:] for l in lines]
    assert keys == ["alpha", "zeta", "timestamp"]


def test_write_csv_without_timestamp_is_deterministic(tmp_path):
    p1 = str(tmp_path / "a.csv")
    p2 = str(tmp_path / "b.csv")
    cols = {"x": np.linspace(0, 1, 7) * np.pi}
    output.write_csv(p1, cols, {"k": 0.1}, timestamp=False)
    output.write_csv(p2, cols, {"k": 0.1}, timestamp=False)
    assert open(p1).read() == open(p2).read()


def test_write_csv_rejects_ragged_and_empty(tmp_path):
    with pytest.raises(ValueError):
        output.write_csv(str(tmp_path / "r.csv"), {"a": np.zeros(2), "b": np.zeros(3)})
    with pytest.raises(ValueError):
        output.write_csv(str(tmp_path / "e.csv"), {})


def test_write_json_round_trip(tmp_path):
    import json
    path = str(tmp_path / "out.json")
    env = output.write_json(path, {"beta": [1, 2], "alpha": 0.25})
    doc = json.load(open(path))
    assert doc["alpha"] == 0.25
    assert doc["beta"] == [1, 2]
    assert "timestamp" in doc
    assert list(doc) == sorted(doc)
    assert env.config_hash == output.config_hash({"beta": [1, 2], "alpha": 0.25})


def test_float_format_preserves_doubles(tmp_path):
    vals = np.array([1/3, 1e-300, 6.0221407599999996e23, np.pi])
    path = str(tmp_path / "f.csv")
    output.write_csv(path, {"v": vals}, timestamp=False)
    back, _ = output.read_csv(path)
    assert np.array_equal(back["v"], vals)
