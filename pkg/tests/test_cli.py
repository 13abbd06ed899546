import json
import subprocess
import sys

import pytest

from obstrukt import data
from obstrukt.arith import Form
from obstrukt.cli import main


@pytest.fixture
def flagship_file(tmp_path):
    path = tmp_path / "flagship.json"
    path.write_text(json.dumps(data.flagship_model_json()))
    return path


def _manifest(out, sub):
    return json.loads((out / f"manifest.{sub}.json").read_text())


def test_build_flags_and_rescales(tmp_path, flagship_file, capsys):
    out = tmp_path / "o"
    assert main(["build", "--input", str(flagship_file), "--out", str(out)]) == 0
    doc = json.loads((out / "model.json").read_text())
    assert doc["report"]["span_check"]["spans_agree"]
    check = doc["report"]["delta_check"]
    assert check["mismatch"] and check["rescaled_by"] == "2965/2956"
    assert doc["curve"]["delta"] == [str(x) if x.denominator != 1 else str(x.numerator) for x in data.FLAGSHIP_DELTA]
    m = _manifest(out, "build")
    assert m["status"] == "ok" and m["exit_code"] == 0
    assert str(flagship_file) in m["inputs"]
    assert all(len(h) == 64 for h in m["outputs"].values())
    assert "span_check" in capsys.readouterr().out


def test_outputs_are_deterministic(tmp_path, flagship_file):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["dp4", "--input", str(flagship_file), "--out", str(out), "--seed", "3"]) == 0
    for name in ("model.json", "dp4.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_stage_reuse(tmp_path, flagship_file):
    out = tmp_path / "o"
    main(["build", "--input", str(flagship_file), "--out", str(out)])
    main(["build", "--input", str(flagship_file), "--out", str(out)])
    assert _manifest(out, "build")["stages_reused"] == ["build"]


def test_raw_model_only(tmp_path):
    path = tmp_path / "raw.json"
    path.write_text(json.dumps({"quadrics": [list(r) for r in data.FLAGSHIP_QUADRICS]}))
    out = tmp_path / "o"
    assert main(["build", "--model", str(path), "--out", str(out)]) == 0
    assert json.loads((out / "model.json").read_text())["provenance"] == "user-supplied"


def test_malformed_input_names_stage_and_field(tmp_path, capsys):
    doc = data.flagship_curve_json()
    doc["delta"][2] = "1/0"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "o"
    assert main(["build", "--input", str(path), "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "stage build failed" in err and "delta[2]" in err
    m = _manifest(out, "build")
    assert m["status"] == "failed" and m["exit_code"] == 1


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 1, "colour": "blue"}))
    assert main(["lattice", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "unknown keys ['colour']" in capsys.readouterr().err


def test_bad_flag_value(tmp_path, capsys):
    assert main(["lattice", "--threads", "0", "--out", str(tmp_path / "o")]) == 1
    assert "--threads" in capsys.readouterr().err


def test_algebra_needs_curve(tmp_path, capsys):
    path = tmp_path / "raw.json"
    path.write_text(json.dumps({"quadrics": [list(r) for r in data.FLAGSHIP_QUADRICS]}))
    assert main(["algebra", "--model", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "stage algebra failed" in capsys.readouterr().err


def _toy_model_with_point():
    x = [Form.linear([int(i == k) for i in range(6)]) for k in range(6)]
    forms = [x[0] * x[1] - x[2] * x[2], x[3] * x[4] - x[5] * x[5], x[0] * x[3] - x[1] * x[4]]
    return [f.to_vector() for f in forms]


def test_rational_point_fast_path(tmp_path, capsys):
    path = tmp_path / "toy.json"
    path.write_text(json.dumps({"quadrics": _toy_model_with_point(), "rational_point": ["1", "0", "0", "0", "0", "0"]}))
    out = tmp_path / "o"
    assert main(["certify", "--model", str(path), "--out", str(out)]) == 2
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["verdict"] == "not-obstructed"
    assert "verdict: not-obstructed" in capsys.readouterr().out


def test_point_not_on_model_fails(tmp_path, capsys):
    path = tmp_path / "toy.json"
    path.write_text(json.dumps({"quadrics": _toy_model_with_point(), "rational_point": ["1", "1", "0", "0", "0", "0"]}))
    assert main(["build", "--model", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "rational_point" in capsys.readouterr().err


def test_family_stream(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["family", "--prime-bound", "20000", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["eligible 17383", "eligible 18433"]
    doc = json.loads((out / "family.json").read_text())
    assert doc["smallest"]["all_square"]


def test_lattice_and_cohomology(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["lattice", "--out", str(out)]) == 0
    assert "rank 17, |Aut| = 23040" in capsys.readouterr().out
    assert main(["cohomology", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "H^1(H96, Z^17) = Z/2" in text and "H^1(H48, Z^17) = 0" in text


def test_console_script_and_log_env(tmp_path):
    env = {"OBSTRUKT_LOG": "DEBUG", "PATH": "/usr/bin:/bin"}
    proc = subprocess.run(
        [sys.executable, "-m", "obstrukt", "lattice", "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0
    assert "rank 17" in proc.stdout
