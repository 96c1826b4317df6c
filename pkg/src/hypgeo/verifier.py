"""Quantitative checks of the identities satisfied by s_b, the q-series and
the scheme functions, plus a seeded suite runner.

Every check returns a CheckReport; ``passed`` is exactly ``residual <= tolerance``.
Residuals are relative when the reference magnitude exceeds 1e-8.
"""
from __future__ import annotations

import cmath
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np

from .hyperbolic_gamma import TWO_PI, BContext, asymptote, log_sb_scalar, sb, sb_shift_ratio
from .qseries import ARITY, Family, QPolyFamily, qpoly_duality, qpoly_eval

if TYPE_CHECKING:
    from .contour_engine import QuadratureConfig
    from .scheme_functions import SchemeDescriptor

# The s_b and q-series checks must run without the contour machinery, so the
# scheme-function modules are imported on first use.
REFERENCE_B = 0.84
MEMBER_NAMES = ("R", "H", "S", "X", "Q", "L", "W", "M")


def _sf():
    from . import scheme_functions

    return scheme_functions


def _ce():
    from . import contour_engine

    return contour_engine


def _ops():
    from . import difference_ops

    return difference_ops


REL_FLOOR = 1e-8
DEFAULT_TOL = {
    "sb": 1e-8,
    "sb_residue": 1e-6,
    "sb_asymptotics": 1e-6,
    "qseries": 1e-9,
    "qseries_limit": 1e-5,
    "duality": 1e-10,
    "eigen": 1e-6,
    "operator_square": 1e-10,
    "symmetry": 1e-8,
    "poly_limit": 1e-5,
    "confluence": 1e-4,
}
# M lives on Im(zeta + omega) > 0; the published real default sits on the edge
M_INTERIOR_VARS = (0.41, 0.17 + 0.2j)
EVEN_VARIABLES = {"R": ("sigmas", "sigmat"), "H": ("sigmas",), "S": ("sigmas",), "X": ("sigmas",), "Q": ("sigmas",)}


@dataclass
class CheckReport:
    check_id: str
    category: str
    inputs: dict
    residual: float
    tolerance: float
    passed: bool
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("elapsed")
        return _jsonable(d)


@dataclass
class SuiteReport:
    reports: list
    seed: int
    totals: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self, timing: bool = False) -> dict:
        reports = [r.to_dict(timing) for r in self.reports]
        return {"seed": self.seed, "passed": self.passed, "totals": self.totals, "reports": reports}


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def relative_residual(value: complex, reference: complex) -> float:
    d = abs(complex(value) - complex(reference))
    r = abs(complex(reference))
    return d / r if r > REL_FLOOR else d


def _report(check_id, category, inputs, residual, tol, notes=None, details=None, t0=None) -> CheckReport:
    residual = float(residual)
    ok = bool(residual <= tol)  # NaN fails
    return CheckReport(
        check_id,
        category,
        inputs,
        residual,
        float(tol),
        ok,
        list(notes or []),
        dict(details or {}),
        time.perf_counter() - t0 if t0 is not None else 0.0,
    )


def default_descriptor(member: str, b: float = REFERENCE_B) -> SchemeDescriptor:
    """Reference point used by the suite (M is moved off its domain boundary)."""
    sf = _sf()
    return sf.reference_descriptor(member, b, M_INTERIOR_VARS if member == "M" else sf.REFERENCE_VARS)


def _evaluate(desc: SchemeDescriptor, cfg: QuadratureConfig | None) -> tuple[complex, float]:
    return _sf().scheme_evaluate(desc, cfg)


# ---------------------------------------------------------------------------
# s_b


def _strip_points(ctx: BContext, n: int, rng: random.Random) -> list[complex]:
    return [complex(rng.uniform(-3, 3), rng.uniform(-0.45, 0.45) * ctx.Q) for _ in range(n)]


def check_sb_suite(b: float, n_points: int = 100, seed: int = 0, tol: dict | None = None) -> list[CheckReport]:
    """Inversion, both shift equations, b <-> 1/b, residue and asymptotics."""
    tol = {**DEFAULT_TOL, **(tol or {})}
    ctx = BContext(b)
    ictx = ctx.inverse()
    rng = random.Random(f"sb-{seed}-{b}")
    pts = _strip_points(ctx, n_points, rng)
    inputs = {"b": b, "n_points": n_points, "seed": seed}
    out = []

    t0 = time.perf_counter()
    res = max(abs(sb(z, ctx) * sb(-z, ctx) - 1) for z in pts)
    out.append(_report(f"sb.inversion[b={b}]", "sb", inputs, res, tol["sb"], t0=t0))

    for name, beta in (("shift_b", b), ("shift_binv", 1 / b)):
        t0 = time.perf_counter()
        res = 0.0
        for z in pts:
            lhs = cmath.exp(log_sb_scalar(z + 0.5j * beta, ctx) - log_sb_scalar(z - 0.5j * beta, ctx))
            res = max(res, relative_residual(lhs, 2 * cmath.cosh(math.pi * beta * z)))
        out.append(_report(f"sb.{name}[b={b}]", "sb", inputs, res, tol["sb"], t0=t0))

    t0 = time.perf_counter()
    res = max(relative_residual(sb(z, ctx), sb(z, ictx)) for z in pts)
    out.append(_report(f"sb.modular[b={b}]", "sb", inputs, res, tol["sb"], t0=t0))

    t0 = time.perf_counter()
    res = 0.0
    for x in pts[:10]:
        for m, k in ((1, 1), (2, 1), (1, 3)):
            lhs = sb_shift_ratio(x, m, "b", ctx) * sb_shift_ratio(x + 1j * m * b, k, "b", ctx)
            res = max(res, relative_residual(lhs, sb_shift_ratio(x, m + k, "b", ctx)))
    out.append(_report(f"sb.cocycle[b={b}]", "sb", inputs, res, tol["sb"], t0=t0))

    t0 = time.perf_counter()
    z0 = -0.5j * ctx.Q
    eps = 1e-8
    res = 0.0
    for d in (1, 1j, -1, -1j):
        z = z0 + eps * d
        res = max(res, abs((z - z0) * sb(z, ctx, collision_tol=1e-12) - 1j / TWO_PI) / abs(1j / TWO_PI))
    out.append(_report(f"sb.residue[b={b}]", "sb", inputs, res, tol["sb_residue"], notes=[f"approach distance {eps:g}"], t0=t0))

    t0 = time.perf_counter()
    res = 0.0
    for side in (1, -1):
        for _ in range(max(1, n_points // 10)):
            z = complex(6 * side, rng.uniform(-0.45, 0.45) * ctx.Q)
            res = max(res, abs(log_sb_scalar(z, ctx) - asymptote(z, ctx)))
    out.append(_report(f"sb.asymptotics[b={b}]", "sb", inputs, res, tol["sb_asymptotics"], t0=t0))
    return out


# ---------------------------------------------------------------------------
# q-series


def _rand_params(rng, k):
    return [rng.uniform(0.05, 0.95) for _ in range(k)]


def check_qseries_suite(seed: int = 0, draws: int = 50, n_max: int = 6, tol: dict | None = None) -> list[CheckReport]:
    """Series vs recurrence, limit arrows at finite degree, dualities."""
    tol = {**DEFAULT_TOL, **(tol or {})}
    rng = random.Random(f"qseries-{seed}")
    out = []
    for fam in Family:
        t0 = time.perf_counter()
        res = 0.0
        for _ in range(draws):
            q = rng.uniform(0.2, 0.8)
            p = _rand_params(rng, ARITY[fam])
            z = cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(0, 2 * math.pi))
            F = QPolyFamily(fam, p, q)
            for n in range(n_max + 1):
                a = qpoly_eval(F, n, z, "series")
                c = qpoly_eval(F, n, z, "recurrence")
                res = max(res, abs(a - c) / max(abs(a), 1.0))
        out.append(_report(f"qseries.modes[{fam.value}]", "qseries", {"draws": draws, "n_max": n_max, "seed": seed}, res, tol["qseries"], t0=t0))

    for name, fn in _LIMIT_ARROWS.items():
        t0 = time.perf_counter()
        res = 0.0
        for _ in range(10):
            q = rng.uniform(0.2, 0.8)
            p = _rand_params(rng, 4)
            z = cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(0, 2 * math.pi))
            for n in range(5):
                lhs, rhs = fn(n, z, p, q)
                res = max(res, abs(lhs - rhs) / max(abs(rhs), 1.0))
        out.append(_report(f"qseries.limit[{name}]", "qseries", {"seed": seed}, res, tol["qseries_limit"], t0=t0))

    for kind, k in (("AW", 4), ("Hahn_Jacobi", 3), ("Chihara_LittleJacobi", 2)):
        t0 = time.perf_counter()
        res = 0.0
        for _ in range(3):
            q = rng.uniform(0.3, 0.7)
            p = _rand_params(rng, k)
            for n in range(6):
                for m in range(6):
                    lhs, rhs = qpoly_duality(kind, n, m, p, q)
                    res = max(res, abs(lhs - rhs) / max(abs(rhs), 1.0))
        out.append(_report(f"qseries.duality[{kind}]", "duality", {"seed": seed, "n_max": 5, "m_max": 5}, res, tol["duality"], t0=t0))
    return out


def _qp(fam, params, q, n, x):
    return qpoly_eval(QPolyFamily(fam, params, q), n, x)


BIG, SMALL = 1e8, 1e-8

_LIMIT_ARROWS: dict[str, Callable] = {
    # p_n(x) = lim_{gamma -> inf} J_n(gamma q x)
    "J->p": lambda n, z, p, q: (
        _qp(Family.BIG_Q_JACOBI, (p[0], p[1], BIG), q, n, BIG * q * z),
        _qp(Family.LITTLE_Q_JACOBI_P, (p[0], p[1]), q, n, z),
    ),
    "R->H": lambda n, z, p, q: (
        _qp(Family.ASKEY_WILSON, (p[0], p[1], p[2], SMALL), q, n, z),
        _qp(Family.CONT_DUAL_Q_HAHN, (p[0], p[1], p[2]), q, n, z),
    ),
    "H->S": lambda n, z, p, q: (
        _qp(Family.CONT_DUAL_Q_HAHN, (p[0], p[1], SMALL), q, n, z),
        _qp(Family.AL_SALAM_CHIHARA, (p[0], p[1]), q, n, z),
    ),
    "S->X": lambda n, z, p, q: (
        _qp(Family.AL_SALAM_CHIHARA, (p[0], SMALL), q, n, z),
        _qp(Family.CONT_BIG_Q_HERMITE, (p[0],), q, n, z),
    ),
    "X->Q": lambda n, z, p, q: (
        SMALL ** (-n) * _qp(Family.CONT_BIG_Q_HERMITE, (SMALL,), q, n, z),
        _qp(Family.CONT_Q_HERMITE, (), q, n, z),
    ),
    "J->Y": lambda n, z, p, q: (
        _qp(Family.BIG_Q_JACOBI, (p[0], p[1], SMALL), q, n, z),
        _qp(Family.LITTLE_Q_JACOBI_Y, (p[0], p[1]), q, n, z),
    ),
    "J->L": lambda n, z, p, q: (
        _qp(Family.BIG_Q_JACOBI, (p[0], SMALL, p[1]), q, n, z),
        _qp(Family.BIG_Q_LAGUERRE, (p[0], p[1]), q, n, z),
    ),
    "L->W": lambda n, z, p, q: (
        _qp(Family.BIG_Q_LAGUERRE, (p[0], -BIG), q, n, -BIG * q * z),
        _qp(Family.LITTLE_Q_LAGUERRE, (p[0],), q, n, z),
    ),
    "Y<->p": lambda n, z, p, q: (
        (-q * p[1]) ** (-n)
        * q ** (-n * (n - 1) / 2)
        * _poch(q * p[1], q, n)
        / _poch(q * p[0], q, n)
        * _qp(Family.LITTLE_Q_JACOBI_Y, (p[1], p[0]), q, n, q * p[1] * z),
        _qp(Family.LITTLE_Q_JACOBI_P, (p[0], p[1]), q, n, z),
    ),
}


def _poch(a, q, n):
    out = 1.0 + 0j
    for k in range(n):
        out *= 1 - a * q**k
    return out


# ---------------------------------------------------------------------------
# eigen equations


def _perturb_if_singular(op, point, notes, robust=True):
    if _ops().singular_distance(op, point) >= 1e-6:
        return point
    if not robust:
        raise _ops().SingularCoefficientError(point, "sinh")
    Q = op.b + 1 / op.b
    moved = point + _ops().ROBUST_SHIFT * Q * (1 + 1j) / math.sqrt(2)
    notes.append(f"point {point:.6g} near a coefficient singularity; perturbed to {moved:.6g}")
    return moved


def _eigen_residual(op, desc, cfg, cache):
    var = op.variable

    def F(x):
        key = (var, complex(x))
        if key not in cache:
            cache[key] = _evaluate(desc.with_vars(**{var: x}), cfg)
        return cache[key][0]

    x0 = desc.vars[var]
    lhs = _ops().apply_operator(op, F, x0)
    lam = op.eigen(desc.vars[op.other_variable])
    f0 = F(x0)
    rhs = lam * f0
    res = abs(lhs - rhs) / max(abs(rhs), REL_FLOOR)
    err = sum(abs(c(op.params, x0)) * cache[(var, complex(x0 + s))][1] for c, s in op.terms if c(op.params, x0) != 0)
    err += abs(lam) * cache[(var, complex(x0))][1]
    return res, lhs, rhs, err / max(abs(rhs), REL_FLOOR)


def check_eigen(
    member: str,
    variant: str,
    desc: SchemeDescriptor | None = None,
    tol: float = DEFAULT_TOL["eigen"],
    cfg: QuadratureConfig | None = None,
    robust: bool = True,
    cache: dict | None = None,
) -> CheckReport:
    """Residual of one eigenfunction equation at the descriptor's point."""
    t0 = time.perf_counter()
    desc = desc or default_descriptor(member)
    notes: list[str] = []
    op = _ops().build_operator(member, variant, desc)
    x0 = _perturb_if_singular(op, desc.vars[op.variable], notes, robust)
    if x0 != desc.vars[op.variable]:
        desc = desc.with_vars(**{op.variable: x0})
    cache = {} if cache is None else cache
    res, lhs, rhs, err = _eigen_residual(op, desc, cfg, cache)
    details = {"lhs": lhs, "rhs": rhs, "eigenvalue": op.eigen(desc.vars[op.other_variable]), "err_est": err, "variable": op.variable, "reading": op.reading}
    readings = _ops().READINGS.get((member, variant))
    if readings:
        scores = {}
        for rd in readings:
            alt = _ops().build_operator(member, variant, desc, reading=rd)
            scores[rd] = _eigen_residual(alt, desc, cfg, cache)[0]
        details["readings"] = scores
        good = [rd for rd, r in scores.items() if r <= tol]
        notes.append("readings satisfied: " + (", ".join(good) if good else "none"))
    inputs = {**desc.to_dict(), "variant": variant}
    return _report(f"eigen[{member}.{variant}]", "eigen", inputs, res, tol, notes, details, t0)


def check_operator_square(
    desc: SchemeDescriptor | None = None,
    tol: float = DEFAULT_TOL["operator_square"],
    basis: Sequence[Callable] | None = None,
    points: Sequence[complex] = (0.5, 0.23 + 0.1j, -0.37),
    extended: bool = False,
    robust: bool = True,
) -> CheckReport:
    """(Hhat_Q)^2 = H_Q applied to a basis of analytic test functions."""
    t0 = time.perf_counter()
    b = desc.ctx.b if desc is not None else REFERENCE_B
    basis = list(basis) if basis is not None else [
        lambda s: cmath.exp(0.3 * s),
        lambda s: s * s + 1,
        lambda s: cmath.cos(s),
        lambda s: 1 / (s + 3),
        lambda s: cmath.exp(-0.7j * s) * (s - 2),
    ]
    if extended:
        basis.append(lambda s: cmath.exp(9j * s))
    notes: list[str] = []
    res = 0.0
    for variant_sq, variant_p in (("sqrt", "primary"), ("sqrt_binv", "primary_binv")):
        hat = _ops().build_operator("Q", variant_sq, b=b, params={})
        full = _ops().build_operator("Q", variant_p, b=b, params={})
        for x in points:
            x = _perturb_if_singular(full, _perturb_if_singular(hat, complex(x), notes, robust), notes, robust)
            for g in basis:
                sq = _ops().compose(hat, hat, g, x)
                one = _ops().apply_operator(full, g, x)
                res = max(res, relative_residual(sq, one))
    inputs = {"b": b, "points": list(points), "basis_size": len(basis)}
    return _report("operator_square[Q]", "operator_square", inputs, res, tol, notes, {}, t0)


# ---------------------------------------------------------------------------
# symmetries


def check_symmetry(
    member: str,
    kind: str,
    desc: SchemeDescriptor | None = None,
    tol: float = DEFAULT_TOL["symmetry"],
    cfg: QuadratureConfig | None = None,
    variable: str | None = None,
) -> CheckReport:
    t0 = time.perf_counter()
    desc = desc or default_descriptor(member)
    notes = []
    if kind == "b_inversion":
        other = desc.with_ctx(desc.ctx.inverse())
    elif kind == "evenness":
        even = EVEN_VARIABLES.get(member, ())
        variable = variable or (even[0] if even else None)
        if variable not in even:
            raise ValueError(f"{member} is not even in {variable!r}")
        other = desc.with_vars(**{variable: -desc.vars[variable]})
    elif kind == "self_duality":
        if member != "R":
            raise ValueError("self-duality is a property of R only")
        p = dict(desc.params)
        p["theta0"], p["theta1"] = desc.params["theta1"], desc.params["theta0"]
        other = _sf().SchemeDescriptor("R", p, {"sigmas": desc.vars["sigmat"], "sigmat": desc.vars["sigmas"]}, desc.ctx)
    elif kind == "sb_inversion":
        z = desc.vars[desc.info.var_names[0]]
        a, c = sb(z, desc.ctx), sb(z, desc.ctx.inverse())
        res = relative_residual(a, c)
        return _report(f"symmetry[{member}.sb_inversion]", "symmetry", desc.to_dict(), res, tol, notes, {"lhs": a, "rhs": c}, t0)
    else:
        raise ValueError(f"unknown symmetry {kind!r}")
    a, ea = _evaluate(desc, cfg)
    c, ec = _evaluate(other, cfg)
    res = relative_residual(a, c)
    tag = f"{kind}:{variable}" if kind == "evenness" else kind
    details = {"lhs": a, "rhs": c, "err_est": ea + ec}
    return _report(f"symmetry[{member}.{tag}]", "symmetry", desc.to_dict(), res, tol, notes, details, t0)


# ---------------------------------------------------------------------------
# polynomial limits


def check_poly_limit(
    member: str,
    lattice: str | None = None,
    n_max: int = 3,
    desc: SchemeDescriptor | None = None,
    tol: float = DEFAULT_TOL["poly_limit"],
    cfg: QuadratureConfig | None = None,
) -> CheckReport:
    t0 = time.perf_counter()
    sf = _sf()
    desc = desc or sf.reference_descriptor(member)
    lat = sf.get_lattice(desc, lattice)
    fam, arg = sf.poly_param_map(desc, lat)
    values, devs = [], []
    for n in range(n_max + 1):
        v = sf.scheme_evaluate_at_lattice(desc, lat, n, cfg)
        ref = qpoly_eval(fam, n, arg)
        values.append({"n": n, "value": v, "polynomial": ref})
        devs.append(relative_residual(v, ref))
    details = {"values": values, "deviations": devs, "n0_minus_one": abs(values[0]["value"] - 1)}
    if member == "Q" and n_max >= 1:
        details["n1_minus_2cosh"] = abs(values[1]["value"] - 2 * cmath.cosh(TWO_PI * desc.ctx.b * desc.vars["sigmas"]))
    inputs = {**desc.to_dict(), "lattice": lat.which_variable, "family": fam.tag.value, "n_max": n_max}
    return _report(f"poly_limit[{member}.{lat.which_variable}]", "poly_limit", inputs, max(devs), tol, [], details, t0)


# ---------------------------------------------------------------------------
# confluent limits


def check_confluence(
    edge: str,
    desc: SchemeDescriptor | None = None,
    lams: Iterable[float] = (8, 12, 16),
    tol: float = DEFAULT_TOL["confluence"],
    cfg: QuadratureConfig | None = None,
) -> CheckReport:
    """|parent(Lambda) * normalizer - child| for growing |Lambda|.

    The sequence must decrease until it reaches the quadrature noise floor
    (100x the combined error estimate, at least 1e-12); once there it may
    wander without counting as growth.
    """
    t0 = time.perf_counter()
    sf = _sf()
    e = sf.EDGES[edge]
    desc = desc or default_descriptor(e.child)
    if desc.member != e.child:
        raise ValueError(f"edge {edge} needs a {e.child} descriptor")
    child, cerr = _evaluate(desc, cfg)
    seq, floors = [], []
    for mag in lams:
        lam = e.direction * abs(mag)
        parent, norm = sf.confluence_embed(e.child, desc.params, desc.vars, lam, desc.ctx)
        pv, perr = _evaluate(parent, cfg)
        seq.append(relative_residual(pv * norm, child))
        scale = abs(child) if abs(child) > REL_FLOOR else 1.0
        floors.append(max(100 * (perr * abs(norm) + cerr) / scale, 1e-12))
    notes = []
    monotone = True
    for k in range(1, len(seq)):
        if seq[k] < seq[k - 1]:
            continue
        if seq[k] <= floors[k]:
            notes.append(f"|Lambda|={list(lams)[k]} at the noise floor {floors[k]:.2g}")
            continue
        monotone = False
    if not monotone:
        notes.append("residuals do not decrease")
    residual = seq[-1] if monotone else math.inf
    details = {"lambdas": [e.direction * abs(m) for m in lams], "residuals": seq, "noise_floors": floors, "child": child, "monotone": monotone}
    return _report(f"confluence[{edge}]", "confluence", {**desc.to_dict(), "edge": edge}, residual, tol, notes, details, t0)


def _deformations(c, up, down):
    """Three contours through the gap between the upward and downward lattices."""
    ContourSpec = _ce().ContourSpec
    lo = max((complex(l.base).imag for l in down), default=c.min_height - 1.0)
    hi = min((complex(l.base).imag for l in up), default=c.max_height + 1.0)
    if hi - lo < 0.1:
        raise ValueError("lattices too close for flat deformations")
    left, right = c.waypoints[0].real, c.waypoints[-1].real

    def flat(h):
        return ContourSpec((complex(left, h), complex(right, h)), h, h, c.window, c.left_dir, c.right_dir)

    mid = 0.5 * (lo + hi)
    xs = sorted({round(complex(l.base).real, 12) for l in up + down})
    pts = [complex(left, mid), complex(xs[0] - 1.0, mid)]
    for k, x in enumerate(xs):
        h = hi - 0.2 * (hi - lo) if k % 2 == 0 else lo + 0.2 * (hi - lo)
        pts.append(complex(x + 0.05, h))
    pts += [complex(xs[-1] + 1.0, mid), complex(right, mid)]
    bump = ContourSpec(tuple(pts), mid, mid, c.window, c.left_dir, c.right_dir)
    return {"flat_high": flat(lo + 0.75 * (hi - lo)), "flat_low": flat(lo + 0.25 * (hi - lo)), "zigzag": bump}


def check_contour_robustness(desc: SchemeDescriptor | None = None, cfg: QuadratureConfig | None = None) -> list[CheckReport]:
    """Scheme value under admissible deformations (residual is |change| over the
    combined error estimate, so it passes at <= 1), plus Gaussian and Fresnel
    integrals along shifted and tilted contours."""
    t0 = time.perf_counter()
    sf, ce = _sf(), _ce()
    desc = desc or default_descriptor("H")
    form = sf.integral_form(desc)
    up, down = form.lattices_for(desc.ctx)
    base = sf.scheme_contour(desc, form)
    v0, e0 = _evaluate(desc, cfg)
    ratios, shifts = {}, {}
    for name, c in _deformations(base, up, down).items():
        ce.validate_contour(c, up, down, desc.ctx)
        v, e = sf.scheme_evaluate(desc, cfg, contour=c)
        shifts[name] = abs(v - v0)
        ratios[name] = shifts[name] / (e0 + e) if e0 + e > 0 else (0.0 if shifts[name] == 0 else math.inf)
    worst = max(ratios.values())
    out = [
        _report(
            f"contour.deformation[{desc.member}]",
            "contour",
            desc.to_dict(),
            worst,
            1.0,
            details={"value": v0, "err_est": e0, "changes": shifts, "ratios": ratios},
            t0=t0,
        )
    ]
    t0 = time.perf_counter()
    res = 0.0
    for h in (0.0, 0.7, -1.3):
        c = ce.ContourSpec((complex(-4, h), complex(4, h)), h, h, 4.0)
        v, _ = ce.integrate_contour(lambda x: np.exp(-x * x), c, cfg)
        res = max(res, abs(v - math.sqrt(math.pi)))
    out.append(_report("contour.gaussian", "contour", {"heights": [0.0, 0.7, -1.3]}, res, 1e-10, t0=t0))
    t0 = time.perf_counter()
    model = ce.TailModel(1j, 0)
    right = ce.choose_tail_direction(model, 3.0, +1)
    left = ce.choose_tail_direction(model, -3.0, -1)
    c = ce.ContourSpec((-3 + 0j, 3 + 0j), 0.0, 0.0, 3.0, left_dir=left, right_dir=right)
    v, _ = ce.integrate_contour(lambda x: 1j * x * x, c, cfg, log=True, tails=(model, model))
    res = abs(v - math.sqrt(math.pi) * cmath.exp(0.25j * math.pi))
    out.append(_report("contour.fresnel", "contour", {"integrand": "exp(i x^2)"}, res, 1e-10, t0=t0))
    return out


# ---------------------------------------------------------------------------
# suite


@dataclass
class SuiteConfig:
    seed: int = 7
    suite: str = "full"  # full | quick
    tolerances: dict = field(default_factory=dict)
    sb_points: int = 100
    sb_b_values: tuple = (0.7, 1.0, 1.31)
    eigen_points: int = 3
    lams: tuple = (8, 12, 16)
    n_max: int = 3
    threads: int | None = None
    categories: tuple | None = None


def seeded_descriptors(member: str, count: int, seed: int) -> list[SchemeDescriptor]:
    """`count` points with variables drawn from [0.1, 0.6] (reproducible)."""
    rng = random.Random(f"points-{seed}-{member}")
    base = default_descriptor(member)
    out = []
    names = base.info.var_names
    for _ in range(count):
        v = {k: rng.uniform(0.1, 0.6) for k in names}
        if member == "M":
            v["omega"] += 0.2j
        out.append(base.with_vars(**v))
    return out


def _tasks(cfg: SuiteConfig) -> list[tuple]:
    tol = {**DEFAULT_TOL, **cfg.tolerances}
    quick = cfg.suite == "quick"
    tasks: list[tuple] = []
    sb_points = 20 if quick else cfg.sb_points
    for b in cfg.sb_b_values:
        tasks.append(("sb", f"sb[b={b}]", {"b": b, "n_points": sb_points, "seed": cfg.seed, "tol": tol}))
    tasks.append(("qseries", "qseries", {"seed": cfg.seed, "draws": 10 if quick else 50, "tol": tol}))
    tasks.append(("operator_square", "operator_square", {"tol": tol["operator_square"]}))
    if not quick:
        tasks += _heavy_tasks(cfg, tol)
    if cfg.categories:
        tasks = [t for t in tasks if t[0] in cfg.categories or t[1].split("[")[0] in cfg.categories]
    return tasks


def _heavy_tasks(cfg: SuiteConfig, tol: dict) -> list[tuple]:
    tasks: list[tuple] = []
    for m in MEMBER_NAMES:
        pts = [default_descriptor(m)] + seeded_descriptors(m, cfg.eigen_points, cfg.seed)
        tasks.append(("eigen_member", f"eigen[{m}]", {"member": m, "descs": pts, "tol": tol["eigen"]}))
    tasks.append(("symmetry", "symmetry[R.self_duality]", {"member": "R", "kind": "self_duality", "tol": tol["symmetry"]}))
    for v in EVEN_VARIABLES["R"]:
        tasks.append(("symmetry", f"symmetry[R.evenness:{v}]", {"member": "R", "kind": "evenness", "variable": v, "tol": tol["symmetry"]}))
    for m in MEMBER_NAMES:
        tasks.append(("symmetry", f"symmetry[{m}.b_inversion]", {"member": m, "kind": "b_inversion", "tol": tol["symmetry"]}))
    for m, var in _sf().LATTICES:
        tasks.append(("poly_limit", f"poly_limit[{m}.{var}]", {"member": m, "lattice": var, "n_max": cfg.n_max, "tol": tol["poly_limit"]}))
    for e in _sf().EDGES:
        tasks.append(("confluence", f"confluence[{e}]", {"edge": e, "lams": cfg.lams, "tol": tol["confluence"]}))
    tasks.append(("contour", "contour", {}))
    return tasks


def eigen_member(member: str, descs: Sequence[SchemeDescriptor], tol: float = DEFAULT_TOL["eigen"], cfg=None) -> list[CheckReport]:
    """All eigen equations of one member at each descriptor (evaluations shared)."""
    out = []
    for k, d in enumerate(descs):
        caches: dict = {}
        for m, v in _ops().operator_pairs():
            if m != member:
                continue
            op_var = _ops().build_operator(m, v, d).variable
            c = caches.setdefault(op_var, {})
            try:
                r = check_eigen(m, v, d, tol, cfg, cache=c)
            except Exception as exc:  # reported, not raised
                r = _report(f"eigen[{m}.{v}]", "eigen", {**d.to_dict(), "variant": v}, math.inf, tol, [f"{type(exc).__name__}: {exc}"])
            r.check_id = f"{r.check_id}@{k}"
            out.append(r)
    return out


def _run_task(task) -> list[CheckReport]:
    kind, label, kw = task
    t0 = time.perf_counter()
    try:
        if kind == "sb":
            return check_sb_suite(**kw)
        if kind == "qseries":
            return check_qseries_suite(**kw)
        if kind == "operator_square":
            return [check_operator_square(**kw)]
        if kind == "eigen_member":
            return eigen_member(**kw)
        if kind == "symmetry":
            return [check_symmetry(**kw)]
        if kind == "poly_limit":
            return [check_poly_limit(**kw)]
        if kind == "confluence":
            return [check_confluence(**kw)]
        if kind == "contour":
            return check_contour_robustness(**kw)
        raise ValueError(kind)
    except Exception as exc:
        tol = kw.get("tol", 0.0)
        tol = tol if isinstance(tol, float) else 0.0
        return [_report(label, kind, {"task": label}, math.inf, tol, [f"{type(exc).__name__}: {exc}"], t0=t0)]


def thread_count(requested: int | None = None) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("HYPGEO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_suite(cfg: SuiteConfig | None = None, progress: Callable | None = None) -> SuiteReport:
    """Run every category; failures become reports, never exceptions."""
    cfg = cfg or SuiteConfig()
    tasks = _tasks(cfg)
    n = thread_count(cfg.threads)
    reports: list[CheckReport] = []
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            for out in ex.map(_run_task, tasks):
                reports.extend(out)
                if progress:
                    for r in out:
                        progress(r)
    else:
        for t in tasks:
            out = _run_task(t)
            reports.extend(out)
            if progress:
                for r in out:
                    progress(r)
    reports.sort(key=lambda r: r.check_id)
    totals: dict = {}
    for r in reports:
        c = totals.setdefault(r.category, {"total": 0, "passed": 0, "failed": 0})
        c["total"] += 1
        c["passed" if r.passed else "failed"] += 1
    return SuiteReport(reports, cfg.seed, totals)
