import cmath
import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hypgeo.cli import dumps, run_cli

H_REF = 0.209688990967336882613831993687 + 0.761900434653004860208520752586j


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def value(doc):
    return complex(doc["result"]["re"], doc["result"]["im"])


def test_sb(capsys):
    code, out, _ = run(capsys, "sb", "--b", "1", "--z", "0")
    assert code == 0
    assert value(json.loads(out)) == pytest.approx(1.0)


def test_sb_pole_exits_one(capsys):
    code, _, err = run(capsys, "sb", "--b", "1", "--z", "-1i")
    assert code == 1 and "PoleError" in err


def test_usage_errors_exit_two(capsys):
    assert run(capsys, "sb")[0] == 2
    assert run(capsys, "sb", "--z", "1+")[0] == 2
    assert run(capsys, "nosuch")[0] == 2
    code, _, err = run(capsys, "eval", "--member", "H", "--theta9", "0.1")
    assert code == 2 and "theta9" in err
    assert run(capsys, "op", "--member", "R", "--variant", "sqrt")[0] == 2
    assert run(capsys, "qpoly", "--family", "AskeyWilson", "--n", "2", "--x", "0.3", "--q", "0.5", "--params", "0.1")[0] == 2


def test_qpoly_csv(capsys):
    code, out, _ = run(capsys, "qpoly", "--family", "ContQHermite", "--n", "1", "--x", "0.5", "--q", "0.3", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["result.re"]) == pytest.approx(2.5)


def test_eval_matches_reference_with_member_flags(capsys):
    code, out, _ = run(capsys, "eval", "--member", "H", "--sigmas", "0.41", "nu=0.17", "--theta0=0.2")
    assert code == 0
    doc = json.loads(out)
    assert abs(value(doc) - H_REF) < 1e-12
    assert doc["err_est"] < 1e-10


def test_output_is_byte_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(capsys, "eval", "--member", "R", "-o", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    doc = json.loads(paths[0].read_text())
    assert json.loads(dumps(doc)) == doc


def test_floats_round_trip():
    x = 0.1 + 0.2
    assert json.loads(dumps({"x": x}))["x"] == x


def test_contour_dump(capsys):
    code, out, _ = run(capsys, "contour", "--member", "H")
    summary = json.loads(out)["contour"]
    assert code == 0 and "waypoints" not in summary and summary["n_waypoints"] > 1
    code, out, _ = run(capsys, "contour", "--member", "H", "--dump")
    full = json.loads(out)["contour"]
    assert len(full["waypoints"]) == summary["n_waypoints"]
    code, out, _ = run(capsys, "contour", "--member", "H", "--dump", "--format", "csv")
    assert out.splitlines()[0].startswith("index,")


def test_op_table(capsys):
    code, out, _ = run(capsys, "op", "--member", "Q", "--variant", "sqrt_binv", "--at", "0.2+0.1i")
    doc = json.loads(out)
    assert code == 0 and doc["operator"]["terms"]
    assert doc["inputs"]["at"] == {"re": 0.2, "im": 0.1}


def test_poly_limit_Q_first_degree(capsys):
    code, out, _ = run(capsys, "poly-limit", "--member", "Q", "--n", "1")
    assert code == 0
    doc = json.loads(out)
    s = doc["inputs"]["vars"]["sigmas"]["re"]
    expected = 2 * cmath.cosh(2 * math.pi * 0.84 * s)
    assert abs(value(doc) - expected) < 1e-6


def test_poly_limit_tolerance_sets_exit_code(capsys):
    assert run(capsys, "poly-limit", "--member", "H", "--n", "2")[0] == 0
    assert run(capsys, "poly-limit", "--member", "H", "--n", "2", "--tol", "0")[0] == 1


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "quick", "--category", "operator_square")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True
    code, out, _ = run(capsys, "verify", "--suite", "quick", "--category", "operator_square", "--tol", "0", "--format", "csv")
    assert code == 1
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["passed"] == "False"


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hypgeo", "sb", "--z", "0.3"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["command"] == "sb"
