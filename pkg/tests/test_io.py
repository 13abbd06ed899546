import json

import pytest

from obstrukt import data
from obstrukt.cohomology import h48
from obstrukt.io import (
    InputError,
    curve_from_json,
    curve_to_json,
    dp4_from_json,
    model_from_json,
    model_to_json,
    parse_hints,
    read_json,
    subgroup_from_json,
    subgroup_to_json,
    write_json,
)


def test_curve_round_trip():
    doc = data.flagship_curve_json(printed=False)
    curve, delta = curve_from_json(doc)
    again = curve_to_json(curve, delta)
    assert curve_from_json(again)[0].f == curve.f
    assert curve_from_json(again)[1].rep == delta.rep


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"delta": ["1/0", "0", "0", "0", "0", "1"]}, "delta\\[0\\]"),
        ({"f": ["1"] * 6}, "f: expected 7"),
        ({"n": "minus three"}, "n:"),
        ({"delta": "oops"}, "delta: expected a list"),
    ],
)
def test_curve_errors_name_the_field(patch, field):
    doc = data.flagship_curve_json(printed=False)
    doc.update(patch)
    with pytest.raises(InputError, match=field):
        curve_from_json(doc)


def test_model_round_trip(printed_model):
    doc = model_to_json(printed_model)
    assert model_from_json(doc).same_span(printed_model)
    assert doc["provenance"] == "user-supplied"


def test_model_rejects_floats_and_shape():
    rows = [list(r) for r in data.FLAGSHIP_QUADRICS]
    rows[1][3] = 1.5
    with pytest.raises(InputError, match="quadrics\\[1\\]\\[3\\]"):
        model_from_json({"quadrics": rows})
    with pytest.raises(InputError, match="expected 3 lists"):
        model_from_json({"quadrics": rows[:2]})
    with pytest.raises(InputError, match="expected 15 integers"):
        dp4_from_json({"quadrics": [[0] * 21, [0] * 21]})


def test_subgroup_round_trip():
    H = h48()
    back = subgroup_from_json(subgroup_to_json(H), "H48")
    assert set(back.elements) == set(H.elements)


def test_json_files(tmp_path):
    path = tmp_path / "x.json"
    digest = write_json(path, {"b": 1, "a": [1, 2]})
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
    assert len(digest) == 64
    (tmp_path / "bad.json").write_text('{"a": 1,\n "b": }')
    with pytest.raises(InputError, match="line 2"):
        read_json(tmp_path / "bad.json")
    assert json.loads(path.read_text()) == {"a": [1, 2], "b": 1}


def test_parse_hints():
    assert parse_hints("83, 3,7,3") == [3, 7, 83]
    assert parse_hints("") is None
    with pytest.raises(InputError):
        parse_hints("3,x")
