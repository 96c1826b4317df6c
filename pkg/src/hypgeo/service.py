"""HTTP service around the numerical core.

Each command has a pydantic request model and a handler returning an
``Envelope``.  The FastAPI routes and the command-line client share the same
handlers, so the CLI never needs a running server.
"""
from __future__ import annotations

import re
import warnings
from typing import Annotated, Any, Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer

from . import difference_ops as dops
from .contour_engine import ContourSpec, QuadratureConfig
from .hyperbolic_gamma import BContext, log_sb_scalar, sb
from .qseries import ARITY, Family, QPolyFamily, qpoly_eval
from .scheme_functions import (
    MEMBERS,
    REFERENCE_B,
    REFERENCE_PARAMS,
    SchemeDescriptor,
    get_lattice,
    poly_param_map,
    scheme_contour,
    scheme_evaluate,
    scheme_evaluate_at_lattice,
    validate_params,
)
from . import verifier

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^\s*({_NUM})?\s*(?:([+-])\s*({_NUM})?\s*[ij])?\s*$")
_IMAG_RE = re.compile(rf"^\s*({_NUM})?\s*[ij]\s*$")


def parse_complex(value: Any) -> complex:
    """Accept numbers, {"re","im"} mappings and literals such as "0.3-0.1i"."""
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, str):
        m = _IMAG_RE.match(value)
        if m:
            return complex(0.0, float(m.group(1)) if m.group(1) else 1.0)
        m = _COMPLEX_RE.match(value)
        if m and (m.group(1) or m.group(2)):
            re_part = float(m.group(1)) if m.group(1) else 0.0
            if m.group(2) is None:
                return complex(re_part, 0.0)
            im = float(m.group(3)) if m.group(3) else 1.0
            return complex(re_part, -im if m.group(2) == "-" else im)
    raise ValueError(f"not a complex number: {value!r}")


def complex_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


Cx = Annotated[complex, BeforeValidator(parse_complex), PlainSerializer(complex_json, return_type=dict)]


class ComplexValue(BaseModel):
    re: float
    im: float


class Envelope(BaseModel):
    command: str
    inputs: dict
    result: Optional[ComplexValue] = None
    err_est: Optional[float] = None
    warnings: list[str] = Field(default_factory=list)
    extra: dict = Field(default_factory=dict)
    passed: Optional[bool] = None


class _Req(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SbRequest(_Req):
    b: float = REFERENCE_B
    z: Cx
    tol: float = 1e-13


class QpolyRequest(_Req):
    family: Family
    n: int = Field(ge=0)
    x: Cx
    q: float = Field(gt=0, lt=1)
    params: list[Cx] = Field(default_factory=list)
    mode: Literal["series", "recurrence"] = "series"


class SchemeRequest(_Req):
    member: str
    b: float = REFERENCE_B
    params: dict[str, float] = Field(default_factory=dict)
    vars: dict[str, Cx] = Field(default_factory=dict)
    tol: float = 1e-12


class OpRequest(SchemeRequest):
    variant: str = "primary"
    at: Optional[Cx] = None
    reading: Optional[str] = None


class PolyLimitRequest(SchemeRequest):
    n: int = Field(ge=0)
    lattice: Optional[str] = None


class VerifyRequest(_Req):
    suite: Literal["full", "quick"] = "full"
    seed: int = 7
    tol: Optional[float] = None
    threads: Optional[int] = None
    categories: Optional[list[str]] = None


class UsageError(ValueError):
    """Bad input that should be reported as a usage problem (exit 2 / HTTP 422)."""


# ---------------------------------------------------------------------------
# handlers


def _catch(fn, *args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = fn(*args)
    out.warnings.extend(str(w.message) for w in caught)
    return out


def handle_sb(req: SbRequest) -> Envelope:
    ctx = BContext(req.b)
    val = sb(req.z, ctx, tol=req.tol)
    return Envelope(
        command="sb",
        inputs={"b": req.b, "z": complex_json(req.z), "tol": req.tol},
        result=ComplexValue(**complex_json(val)),
        err_est=abs(val) * max(req.tol, 1e-15),
        extra={"log_sb": complex_json(log_sb_scalar(req.z, ctx))},
    )


def handle_qpoly(req: QpolyRequest) -> Envelope:
    if len(req.params) != ARITY[req.family]:
        raise UsageError(f"{req.family.value} takes {ARITY[req.family]} parameters, got {len(req.params)}")
    fam = QPolyFamily(req.family, req.params, req.q)
    val = qpoly_eval(fam, req.n, req.x, req.mode)
    inputs = {
        "family": req.family.value,
        "n": req.n,
        "x": complex_json(req.x),
        "q": req.q,
        "params": [complex_json(p) for p in req.params],
        "mode": req.mode,
    }
    extra = {"family": req.family.value, "n": req.n, "arg": complex_json(req.x), "value": complex_json(val), "mode": req.mode}
    return Envelope(command="qpoly", inputs=inputs, result=ComplexValue(**complex_json(val)), err_est=None, extra=extra)


def descriptor_from(req: SchemeRequest, *, fill_vars: bool = True) -> SchemeDescriptor:
    if req.member not in MEMBERS:
        raise UsageError(f"unknown member {req.member!r}; choose from {', '.join(MEMBERS)}")
    info = MEMBERS[req.member]
    bad = sorted(set(req.params) - set(info.param_names))
    if bad:
        raise UsageError(f"unknown parameter(s) for {req.member}: {', '.join(bad)}; allowed: {', '.join(info.param_names) or 'none'}")
    bad = sorted(set(req.vars) - set(info.var_names))
    if bad:
        raise UsageError(f"unknown variable(s) for {req.member}: {', '.join(bad)}; allowed: {', '.join(info.var_names)}")
    params = {**REFERENCE_PARAMS[req.member], **req.params}
    ref = verifier.default_descriptor(req.member, req.b).vars
    vars_ = {**ref, **req.vars} if fill_vars else dict(req.vars)
    return SchemeDescriptor(req.member, params, vars_, BContext(req.b))


def _desc_inputs(desc: SchemeDescriptor, **more) -> dict:
    return {
        "member": desc.member,
        "b": desc.ctx.b,
        "params": dict(desc.params),
        "vars": {k: complex_json(v) for k, v in desc.vars.items()},
        **more,
    }


def contour_json(c: ContourSpec) -> dict:
    return {
        "waypoints": [complex_json(w) for w in c.waypoints],
        "left_tail_height": c.left_tail_height,
        "right_tail_height": c.right_tail_height,
        "left_dir": complex_json(c.left_dir),
        "right_dir": complex_json(c.right_dir),
        "window": c.window,
        "loops": [{"center": complex_json(l.center), "radius": l.radius, "orientation": l.orientation} for l in c.loops],
        "notes": list(c.notes),
    }


def _cfg(tol: float) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=min(max(tol, 1e-14), 1e-3))


def handle_eval(req: SchemeRequest) -> Envelope:
    desc, notes = validate_params(descriptor_from(req))
    info: dict = {}
    val, err = scheme_evaluate(desc, _cfg(req.tol), info=info)
    c = info.get("contour")
    extra = {
        "member": desc.member,
        "value": complex_json(val),
        "contour_waypoints": [complex_json(w) for w in c.waypoints] if c is not None else [],
    }
    return Envelope(
        command="eval",
        inputs=_desc_inputs(desc, tol=req.tol),
        result=ComplexValue(**complex_json(val)),
        err_est=err,
        warnings=list(notes),
        extra=extra,
    )


def handle_contour(req: SchemeRequest) -> Envelope:
    desc = descriptor_from(req)
    c = scheme_contour(desc)
    return Envelope(command="contour", inputs=_desc_inputs(desc), extra={"contour": contour_json(c)})


def handle_op(req: OpRequest) -> Envelope:
    desc = descriptor_from(req)
    try:
        op = dops.build_operator(desc.member, req.variant, desc, reading=req.reading)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    at = req.at if req.at is not None else desc.vars[op.variable]
    table = dops.operator_table(op, at)
    lam = op.eigen(desc.vars[op.other_variable])
    table["eigenvalue"] = complex_json(lam)
    table["readings"] = list(dops.READINGS.get((desc.member, req.variant), ("standard",)))
    inputs = _desc_inputs(desc, variant=req.variant, at=complex_json(at), reading=op.reading)
    return Envelope(command="op", inputs=inputs, result=ComplexValue(**complex_json(lam)), extra={"operator": table})


def handle_poly_limit(req: PolyLimitRequest) -> Envelope:
    desc = descriptor_from(req)
    try:
        lat = get_lattice(desc, req.lattice)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    val = scheme_evaluate_at_lattice(desc, lat, req.n)
    fam, arg = poly_param_map(desc, lat)
    ref = qpoly_eval(fam, req.n, arg)
    shown = desc.with_vars(**{lat.which_variable: lat.point(req.n)})
    extra = {
        "lattice": lat.which_variable,
        "lattice_point": complex_json(lat.point(req.n)),
        "family": fam.tag.value,
        "family_params": [complex_json(p) for p in fam.params],
        "family_arg": complex_json(arg),
        "polynomial": complex_json(ref),
        "deviation": abs(val - ref),
    }
    return Envelope(
        command="poly-limit",
        inputs=_desc_inputs(shown, n=req.n, lattice=lat.which_variable),
        result=ComplexValue(**complex_json(val)),
        err_est=abs(val - ref),
        extra=extra,
    )


def handle_verify(req: VerifyRequest) -> Envelope:
    tols = {k: req.tol for k in verifier.DEFAULT_TOL} if req.tol is not None else {}
    cfg = verifier.SuiteConfig(
        seed=req.seed,
        suite=req.suite,
        tolerances=tols,
        threads=req.threads,
        categories=tuple(req.categories) if req.categories else None,
    )
    rep = verifier.run_suite(cfg)
    d = rep.to_dict()
    inputs = {"suite": req.suite, "seed": req.seed, "tol": req.tol, "categories": req.categories}
    return Envelope(command="verify", inputs=inputs, passed=rep.passed, extra={"suite_report": d})


HANDLERS = {
    "sb": (SbRequest, handle_sb),
    "qpoly": (QpolyRequest, handle_qpoly),
    "eval": (SchemeRequest, handle_eval),
    "op": (OpRequest, handle_op),
    "contour": (SchemeRequest, handle_contour),
    "poly-limit": (PolyLimitRequest, handle_poly_limit),
    "verify": (VerifyRequest, handle_verify),
}


def dispatch(command: str, req: BaseModel) -> Envelope:
    if command not in HANDLERS:
        raise UsageError(f"unknown command {command!r}")
    return _catch(HANDLERS[command][1], req)


def envelope_json(env: Envelope) -> dict:
    """Envelope as a plain dict with a fixed key order."""
    out = {"command": env.command, "inputs": env.inputs, "result": env.result.model_dump() if env.result else None, "err_est": env.err_est, "warnings": env.warnings}
    if env.passed is not None:
        out["passed"] = env.passed
    out.update(env.extra)
    return out


# ---------------------------------------------------------------------------
# app

app = FastAPI(title="hypgeo", version="0.1.0")


def _route(command: str):
    model, _ = HANDLERS[command]

    def endpoint(req: model) -> dict:  # type: ignore[valid-type]
        try:
            return envelope_json(dispatch(command, req))
        except (UsageError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except (ValueError, ZeroDivisionError, ArithmeticError, RuntimeError) as exc:
            raise HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}") from None

    endpoint.__name__ = command.replace("-", "_")
    endpoint.__annotations__ = {"req": model, "return": dict}
    return endpoint


for _cmd in HANDLERS:
    app.post(f"/{_cmd}")(_route(_cmd))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "members": list(MEMBERS), "commands": list(HANDLERS)}


@app.get("/members")
def members() -> dict:
    return {m: {"params": list(i.param_names), "vars": list(i.var_names)} for m, i in MEMBERS.items()}
