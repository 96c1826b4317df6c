import math

import pytest
from fastapi.testclient import TestClient

from hypgeo.service import SbRequest, SchemeRequest, UsageError, app, descriptor_from, dispatch, parse_complex

H_REF = 0.209688990967336882613831993687 + 0.761900434653004860208520752586j

client = TestClient(app)


@pytest.mark.parametrize(
    "text,value",
    [
        ("0.3-0.1i", 0.3 - 0.1j),
        ("-2", -2 + 0j),
        ("1e-3+2.5j", 0.001 + 2.5j),
        ("i", 1j),
        ("-0.5i", -0.5j),
        (" .5 + i ", 0.5 + 1j),
        ({"re": 1, "im": -2}, 1 - 2j),
        (3, 3 + 0j),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("bad", ["", "abc", "1+", "1+2", True, {"x": 1}, None])
def test_parse_complex_rejects(bad):
    with pytest.raises(ValueError):
        parse_complex(bad)


def test_health_and_members():
    h = client.get("/health").json()
    assert h["status"] == "ok"
    assert set(h["commands"]) == {"sb", "qpoly", "eval", "op", "contour", "poly-limit", "verify"}
    m = client.get("/members").json()
    assert m["H"]["vars"] == ["sigmas", "nu"]


def test_sb_route():
    r = client.post("/sb", json={"b": 1.0, "z": "0"})
    assert r.status_code == 200
    body = r.json()
    assert body["command"] == "sb"
    assert body["result"] == {"re": pytest.approx(1.0), "im": pytest.approx(0.0, abs=1e-14)}


def test_sb_pole_is_a_numerical_error():
    r = client.post("/sb", json={"b": 1.0, "z": "-1i"})
    assert r.status_code == 400


def test_request_validation():
    assert client.post("/sb", json={"z": "0", "bogus": 1}).status_code == 422
    assert client.post("/sb", json={"z": "1+"}).status_code == 422
    assert client.post("/qpoly", json={"family": "AskeyWilson", "n": 2, "x": 0.3, "q": 0.5, "params": [0.1]}).status_code == 422
    assert client.post("/eval", json={"member": "H", "params": {"theta9": 0.1}}).status_code == 422
    assert client.post("/eval", json={"member": "Z"}).status_code == 422


def test_qpoly_route():
    body = {"family": "ContQHermite", "n": 1, "x": "0.8+0.3i", "q": 0.45}
    r = client.post("/qpoly", json=body).json()
    z = 0.8 + 0.3j
    assert complex(r["result"]["re"], r["result"]["im"]) == pytest.approx(z + 1 / z)


def test_eval_matches_reference():
    r = client.post("/eval", json={"member": "H", "vars": {"sigmas": 0.41, "nu": 0.17}})
    assert r.status_code == 200
    body = r.json()
    val = complex(body["result"]["re"], body["result"]["im"])
    assert abs(val - H_REF) < 1e-12
    assert body["contour_waypoints"]
    assert body["inputs"]["params"] == {"theta0": 0.2, "thetat": 0.3, "thetastar": 0.4}


def test_descriptor_defaults_and_errors():
    d = descriptor_from(SchemeRequest(member="R"))
    assert set(d.vars) == {"sigmas", "sigmat"}
    with pytest.raises(UsageError):
        descriptor_from(SchemeRequest(member="R", vars={"omega": 0.1}))


def test_op_route():
    r = client.post("/op", json={"member": "Q", "variant": "sqrt"}).json()
    assert r["operator"]["terms"]
    r = client.post("/op", json={"member": "R", "variant": "sqrt"})
    assert r.status_code == 422


def test_poly_limit_route():
    r = client.post("/poly-limit", json={"member": "H", "n": 2}).json()
    assert r["deviation"] < 1e-9
    assert client.post("/poly-limit", json={"member": "H", "n": 1, "lattice": "nope"}).status_code == 422


def test_verify_route_quick():
    r = client.post("/verify", json={"suite": "quick", "categories": ["operator_square"]}).json()
    assert r["passed"] is True
    assert r["suite_report"]["totals"] == {"operator_square": {"total": 1, "passed": 1, "failed": 0}}


def test_dispatch_is_shared_with_routes():
    env = dispatch("sb", SbRequest(b=0.84, z=0.3))
    body = client.post("/sb", json={"b": 0.84, "z": 0.3}).json()
    assert body["result"] == env.result.model_dump()
    assert math.isfinite(env.err_est)
    with pytest.raises(UsageError):
        dispatch("nope", SbRequest(z=0))
