"""Command-line client.

Builds the same request models the HTTP service accepts, runs the handler
in-process and prints the envelope as JSON (default) or CSV.

Exit codes: 0 success, 1 failed check or numerical error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

from pydantic import ValidationError

from .qseries import Family
from .scheme_functions import MEMBERS
from .service import (
    OpRequest,
    PolyLimitRequest,
    QpolyRequest,
    SbRequest,
    SchemeRequest,
    UsageError,
    VerifyRequest,
    dispatch,
    envelope_json,
    parse_complex,
)

SCHEME_COMMANDS = ("eval", "op", "contour", "poly-limit")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(self, message)


class _Usage(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser


def _complex_arg(s: str) -> complex:
    try:
        return parse_complex(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _family_arg(s: str) -> Family:
    for f in Family:
        if s.lower() in (f.value.lower(), f.name.lower()):
            return f
    raise argparse.ArgumentTypeError(f"unknown family {s!r}; choose from {', '.join(f.value for f in Family)}")


def build_parser() -> _Parser:
    p = _Parser(prog="hypgeo", description="Hyperbolic hypergeometric scheme functions and their checks.")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sb", parents=[common], help="double sine s_b(z)")
    s.add_argument("--b", type=float, default=0.84)
    s.add_argument("--z", type=_complex_arg, required=True)
    s.add_argument("--tol", type=float, default=1e-13)

    s = sub.add_parser("qpoly", parents=[common], help="q-hypergeometric orthogonal polynomial")
    s.add_argument("--family", type=_family_arg, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--x", type=_complex_arg, required=True, help="polynomial argument (z for the Laurent families)")
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--params", default="", help="comma separated parameters, e.g. 0.2,0.3+0.1i")
    s.add_argument("--mode", choices=("series", "recurrence"), default="series")

    member_help = "member parameters and variables as --name value or name=value"
    for name in SCHEME_COMMANDS:
        s = sub.add_parser(name, parents=[common], help=f"{name} for a scheme function", epilog=member_help + "; " + _member_table())
        s.add_argument("--member", required=True, choices=list(MEMBERS))
        s.add_argument("--b", type=float, default=0.84)
        if name == "poly-limit":
            s.add_argument("--tol", type=float, default=1e-5, help="allowed deviation from the polynomial")
        else:
            s.add_argument("--tol", type=float, default=1e-12)
        if name == "op":
            s.add_argument("--variant", default="primary")
            s.add_argument("--at", type=_complex_arg, help="point for the coefficient values")
            s.add_argument("--reading")
        if name == "contour":
            s.add_argument("--dump", action="store_true", help="emit the full waypoint list")
        if name == "poly-limit":
            s.add_argument("--n", type=int, required=True)
            s.add_argument("--lattice", help="discretized variable (default: the member's first lattice)")

    s = sub.add_parser("verify", parents=[common], help="run the verification suite")
    s.add_argument("--suite", choices=("full", "quick"), default="full")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--tol", type=float, help="override every tolerance")
    s.add_argument("--threads", type=int)
    s.add_argument("--category", action="append", help="restrict to a category (repeatable)")
    return p


def _member_table() -> str:
    return "; ".join(f"{m}: {', '.join(i.param_names + i.var_names)}" for m, i in MEMBERS.items())


def _member_assignments(parser, member: str, extra: Sequence[str]) -> tuple[dict, dict]:
    info = MEMBERS[member]
    params: dict[str, float] = {}
    vars_: dict[str, complex] = {}
    toks = list(extra)
    i = 0
    while i < len(toks):
        tok = toks[i]
        if tok.startswith("--"):
            key, eq, val = tok[2:].partition("=")
            if not eq:
                if i + 1 >= len(toks):
                    parser.error(f"flag {tok} needs a value")
                val = toks[i + 1]
                i += 1
        elif "=" in tok:
            key, _, val = tok.partition("=")
        else:
            parser.error(f"unexpected argument {tok!r}")
        i += 1
        flag = f"--{key}"
        try:
            if key in info.param_names:
                z = parse_complex(val)
                if z.imag != 0:
                    parser.error(f"{flag} must be real")
                params[key] = z.real
            elif key in info.var_names:
                vars_[key] = parse_complex(val)
            else:
                allowed = ", ".join(info.param_names + info.var_names)
                parser.error(f"unrecognized argument {flag} for member {member} (allowed: {allowed})")
        except ValueError as exc:
            parser.error(f"{flag}: {exc}")
    return params, vars_


def _request(parser, sub: _Parser, args, extra):
    c = args.command
    if c not in SCHEME_COMMANDS and extra:
        sub.error(f"unrecognized arguments: {' '.join(extra)}")
    if c == "sb":
        return SbRequest(b=args.b, z=args.z, tol=args.tol)
    if c == "qpoly":
        try:
            plist = [parse_complex(t) for t in args.params.split(",") if t.strip()]
        except ValueError as exc:
            sub.error(f"--params: {exc}")
        return QpolyRequest(family=args.family, n=args.n, x=args.x, q=args.q, params=plist, mode=args.mode)
    if c == "verify":
        return VerifyRequest(suite=args.suite, seed=args.seed, tol=args.tol, threads=args.threads, categories=args.category)
    params, vars_ = _member_assignments(sub, args.member, extra)
    base = dict(member=args.member, b=args.b, params=params, vars=vars_, tol=args.tol)
    if c == "op":
        return OpRequest(**base, variant=args.variant, at=args.at, reading=args.reading)
    if c == "poly-limit":
        return PolyLimitRequest(**base, n=args.n, lattice=args.lattice)
    return SchemeRequest(**base)


# ---------------------------------------------------------------------------
# output


def _enc(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, complex):
        return _enc({"re": x.real, "im": x.imag})
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_enc(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_enc(v) for v in x) + "]"
    if hasattr(x, "value"):  # enums
        return _enc(x.value)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: Any) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    return _enc(obj)


def _flatten(prefix: str, x: Any, out: dict):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(x, (list, tuple)):
        if all(not isinstance(v, (dict, list)) for v in x):
            out[prefix] = ";".join(_cell(v) for v in x)
        else:
            for k, v in enumerate(x):
                _flatten(f"{prefix}.{k}", v, out)
    else:
        out[prefix] = _cell(x)


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cmd = doc["command"]
    if cmd == "verify":
        w.writerow(["check_id", "category", "residual", "tolerance", "passed", "notes"])
        for r in doc["suite_report"]["reports"]:
            w.writerow([r["check_id"], r["category"], _cell(r["residual"]), _cell(r["tolerance"]), r["passed"], " | ".join(r["notes"])])
        return buf.getvalue()
    if cmd == "contour":
        w.writerow(["index", "re", "im"])
        for k, p in enumerate(doc["contour"]["waypoints"]):
            w.writerow([k, _cell(p["re"]), _cell(p["im"])])
        return buf.getvalue()
    if cmd == "op":
        w.writerow(["term", "shift", "coefficient", "value_re", "value_im"])
        for k, t in enumerate(doc["operator"]["terms"]):
            v = t.get("value", {"re": None, "im": None})
            w.writerow([k, t["shift"], t["coefficient"], _cell(v["re"]), _cell(v["im"])])
        return buf.getvalue()
    flat: dict = {}
    _flatten("", {k: doc[k] for k in ("command", "inputs", "result", "err_est", "warnings")}, flat)
    w.writerow(list(flat))
    w.writerow(list(flat.values()))
    return buf.getvalue()


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse takes "-1i" for an option; bind such literals to the flag before them
    out: list[str] = []
    for tok in argv:
        prev = out[-1] if out else ""
        if tok.startswith("-") and prev.startswith("--") and "=" not in prev and _is_number(tok):
            out[-1] = f"{prev}={tok}"
        else:
            out.append(tok)
    return out


def _is_number(tok: str) -> bool:
    try:
        parse_complex(tok)
    except ValueError:
        return False
    return True


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args, extra = parser.parse_known_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        req = _request(parser, sub, args, extra)
    except _Usage as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"{exc.parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        parser.print_usage(sys.stderr)
        print(f"hypgeo: error: {exc.errors()[0]['loc']}: {exc.errors()[0]['msg']}", file=sys.stderr)
        return 2
    try:
        env = dispatch(args.command, req)
    except UsageError as exc:
        sub.print_usage(sys.stderr)
        print(f"{sub.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(dumps({"command": args.command, "error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1
    doc = envelope_json(env)
    if getattr(args, "format", "json") == "csv":
        text = to_csv(doc)
    else:
        if args.command == "contour" and not args.dump:
            c = doc["contour"]
            doc["contour"] = {k: v for k, v in c.items() if k != "waypoints"} | {"n_waypoints": len(c["waypoints"])}
        text = dumps(doc) + "\n"
    _emit(text, getattr(args, "output", None))
    if env.passed is False:
        return 1
    if args.command == "poly-limit" and doc["deviation"] > args.tol:
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
