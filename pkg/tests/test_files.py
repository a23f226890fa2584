import json
import math

import numpy as np
import pytest

from bdwell.chain import InvalidChainError, make_model
from bdwell.files import load_model, spec_from_dict, to_jsonable, write_csv, write_json


def test_zoo_document():
    spec = spec_from_dict({"model": "ehrenfest", "a": 3})
    assert spec.digest() == make_model("ehrenfest", {}, 3).digest()
    s2 = spec_from_dict({"model": "simple_rw", "a": 4, "b": 0, "params": {"p_plus": 0.1}})
    assert s2.b == 0 and s2.p_at(1) == 0.1


def test_explicit_tables():
    spec = spec_from_dict({"b": 0, "a": 2, "p": [0.5, 0.25, 0.0], "q": [0.0, 0.25, 0.5]})
    np.testing.assert_allclose(spec.r, [0.5, 0.5, 0.5])


@pytest.mark.parametrize("doc,fragment", [
    ({"a": 3}, "model"),
    ({"model": "ehrenfest", "a": 3, "colour": 1}, "colour"),
    ({"b": 0, "a": 2, "p": [0.5, 0.5, 0]}, "'q' is a required property"),
    ({"b": 0, "a": 1, "p": [1.5, 0], "q": [0, 0.5]}, "at p/0"),
    ({"model": "ehrenfest", "a": "3"}, "at a"),
])
def test_schema_errors_carry_location(doc, fragment):
    with pytest.raises(InvalidChainError, match="model file") as ei:
        spec_from_dict(doc)
    assert fragment in str(ei.value)


def test_semantic_errors():
    with pytest.raises(InvalidChainError, match="irreducibility"):
        spec_from_dict({"b": 0, "a": 2, "p": [0.5, 0.0, 0.0], "q": [0.0, 0.5, 0.5]})


def test_load_model(tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"model": "ehrenfest", "a": 2}))
    assert load_model(f).a == 2
    f.write_text("{not json")
    with pytest.raises(InvalidChainError, match="not valid JSON"):
        load_model(f)


def test_jsonable_and_writers(tmp_path):
    doc = {"x": np.float64(1.5), "n": np.int64(3), "v": np.array([1.0, math.inf]), "z": math.nan,
           "ok": np.bool_(True)}
    out = to_jsonable(doc)
    assert out == {"x": 1.5, "n": 3, "v": [1.0, "inf"], "z": "nan", "ok": True}
    write_json(tmp_path / "d" / "a.json", doc)
    assert json.loads((tmp_path / "d" / "a.json").read_text())["v"] == [1.0, "inf"]
    write_csv(tmp_path / "t.csv", ("a", "b"), [(1, 0.1), (2, 1 / 3)])
    text = (tmp_path / "t.csv").read_text()
    assert text.splitlines()[0] == "a,b"
    assert float(text.splitlines()[2].split(",")[1]) == 1 / 3
    assert not list(tmp_path.glob(".*.tmp"))
