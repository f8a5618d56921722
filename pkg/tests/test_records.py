import json
import math

from levinterf.records import TOOL, read_csv, write_csv, write_json


def test_json_meta_and_cleaning(tmp_path):
    path = tmp_path / "r.json"
    write_json(path, dict(a=math.nan, b=math.inf, c=[1.0, -math.inf]), dict(a="m"),
               ["flag one"], timestamp=False)
    doc = json.loads(path.read_text())
    assert doc["_meta"] == dict(tool=TOOL, units=dict(a="m"), conditional_flags=["flag one"])
    assert doc["a"] is None and doc["b"] == "inf" and doc["c"] == [1.0, "-inf"]
    write_json(path, {}, {})
    assert "timestamp" in json.loads(path.read_text())["_meta"]


def test_csv_header_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["x_m", "y"], [(0.1, None), (1e-9, "z")], dict(x_m="m"), ["cond"], ["note"])
    text = path.read_text().splitlines()
    assert text[0] == f"# {TOOL}"
    assert "# column x_m: m" in text and "# CONDITIONAL: cond" in text and "# note" in text
    cols, rows = read_csv(path)
    assert cols == ["x_m", "y"]
    assert rows == [["0.1", ""], ["1e-09", "z"]]


def test_numpy_scalars_written_as_plain_numbers(tmp_path):
    import numpy as np
    path = tmp_path / "n.csv"
    write_csv(path, ["a", "b"], [(np.float64(1.5e-15), np.bool_(True))], {})
    assert read_csv(path)[1] == [["1.5e-15", "True"]]
    jpath = tmp_path / "n.json"
    write_json(jpath, dict(a=np.float64(2.0), b=np.bool_(False), c=np.float64(np.nan)), {},
               timestamp=False)
    doc = json.loads(jpath.read_text())
    assert doc["a"] == 2.0 and doc["b"] is False and doc["c"] is None
