"""The eight functions of the non-polynomial scheme.

Every member is P(vars) * integral of I(x, vars) dx with

    I(x) = exp(c2 x^2 + c1 x) * prod_j s_b(x + a_j)^{p_j},
    P    = exp(c0) * prod_k s_b(u_k)^{p_k},

so one descriptor format drives contour selection, quadrature, lattice
limits and tail analysis for all of them.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .contour_engine import (
    ContourError,
    ContourSpec,
    PinchError,
    QuadratureConfig,
    TailModel,
    TailRule,
    auto_contour,
    integrate_contour,
)
from .hyperbolic_gamma import (
    TWO_PI,
    BContext,
    DomainError,
    PoleLattice,
    asymptote_threshold,
    log_sb,
    log_sb_scalar,
    sb_classify,
    sb_leading,
    sb_pole_residue,
)
from .qseries import Family, QPolyFamily, near_root_of_unity

__all__ = [
    "MEMBERS",
    "LATTICES",
    "EDGES",
    "SchemeDescriptor",
    "DiscretizationLattice",
    "IntegralForm",
    "PrefactorPoleError",
    "AssumptionError",
    "ExtrapolationError",
    "make_descriptor",
    "reference_descriptor",
    "validate_params",
    "integral_form",
    "scheme_contour",
    "scheme_evaluate",
    "scheme_evaluate_at_lattice",
    "get_lattice",
    "lattice_point",
    "confluence_embed",
    "poly_param_map",
]

PI = math.pi
DELTA_FRACTION = 1 / 8  # delta = Q/8 in the tail conditions


class PrefactorPoleError(ZeroDivisionError):
    pass


class AssumptionError(ValueError):
    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"parameter restriction violated: {condition}")


class ExtrapolationError(RuntimeError):
    pass


# eps ladder eps0 * {1, 1/2, ..., 1/16}; three levels leave an O(eps0^3) error near 1e-6
RICHARDSON_LEVELS = 5


# ---------------------------------------------------------------------------
# integral forms


@dataclass(frozen=True)
class IntegralForm:
    shifts: tuple[complex, ...]  # a_j
    powers: tuple[int, ...]  # p_j
    c2: complex
    c1: complex
    pre_args: tuple[complex, ...]  # u_k
    pre_powers: tuple[int, ...]
    c0: complex = 0j

    def lattices_for(self, ctx: BContext) -> tuple[list[PoleLattice], list[PoleLattice]]:
        Q = ctx.Q
        up, down = [], []
        for a, p in zip(self.shifts, self.powers):
            if p > 0:
                down.append(PoleLattice(complex(-a - 0.5j * Q), "down"))
            else:
                up.append(PoleLattice(complex(-a + 0.5j * Q), "up"))
        return up, down

    def log_integrand(self, x, ctx: BContext):
        x = np.asarray(x, dtype=complex)
        out = (self.c2 * x + self.c1) * x
        for a, p in zip(self.shifts, self.powers):
            out = out + p * log_sb(x + a, ctx)
        return out

    def log_prefactor(self, ctx: BContext) -> complex:
        """log P; raises PrefactorPoleError at a pole, returns -inf at a zero."""
        total = self.c0
        zero = False
        for u, p in zip(self.pre_args, self.pre_powers):
            cls = sb_classify(u, ctx)
            if cls.kind == "pole" and p > 0 or cls.kind == "zero" and p < 0:
                raise PrefactorPoleError(f"prefactor has a pole (s_b argument {u:.6g})")
            if cls.kind != "regular":
                zero = True
                continue
            total += p * log_sb_scalar(u, ctx)
        return complex(-math.inf) if zero else complex(total)

    def tail_models(self, ctx: BContext) -> tuple[TailModel, TailModel]:
        """Exponent of I(x) as Re x -> -inf and Re x -> +inf."""
        k = 1j * PI * (ctx.b**2 + ctx.b**-2) / 24
        out = []
        for sign in (-1, 1):
            c2, c1, c0 = self.c2, self.c1, 0j
            for a, p in zip(self.shifts, self.powers):
                # ln s_b(z) ~ -sign (i pi z^2/2 + k)
                c2 += -sign * p * 0.5j * PI
                c1 += -sign * p * 1j * PI * a
                c0 += -sign * p * (0.5j * PI * a * a + k)
            out.append(TailModel(complex(c2), complex(c1), complex(c0)))
        return out[0], out[1]

    def reach(self, ctx: BContext) -> tuple[float, float]:
        """Real parts beyond which every s_b factor equals its asymptote to rounding."""
        thr = asymptote_threshold(ctx) + 0.25
        re = [a.real for a in self.shifts] or [0.0]
        return -thr - max(re), thr - min(re)


def _form(shifts_powers, c2, c1, pre, c0=0j) -> IntegralForm:
    shifts = tuple(complex(a) for a, _ in shifts_powers)
    powers = tuple(int(p) for _, p in shifts_powers)
    return IntegralForm(
        shifts,
        powers,
        complex(c2),
        complex(c1),
        tuple(complex(u) for u, _ in pre),
        tuple(int(p) for _, p in pre),
        complex(c0),
    )


def _build_R(p, v, ctx):
    t1, tt, ti, t0 = p["theta1"], p["thetat"], p["thetainf"], p["theta0"]
    ss, st = v["sigmas"], v["sigmat"]
    h = 0.5j * ctx.Q
    pre = [(h + 2 * tt, 1)]
    fac = [(h, -1), (h + 2 * tt, -1)]
    for e in (1, -1):
        pre += [(h + t0 + t1 + e * ti + tt, 1), (e * ss - t0 - tt, 1), (e * st - t1 - tt, 1)]
        fac += [(t0 + tt + e * ss, 1), (t1 + tt + e * st, 1), (h + t0 + t1 + e * ti + tt, -1)]
    return _form(fac, 0, 0, pre)


def _build_H(p, v, ctx):
    t0, tt, ts = p["theta0"], p["thetat"], p["thetastar"]
    ss, nu = v["sigmas"], v["nu"]
    h = 0.5j * ctx.Q
    pre = [(2 * tt + h, 1), (t0 + ts + tt + h, 1), (nu - ts / 2 - tt, 1), (ss - t0 - tt, 1), (-ss - t0 - tt, 1)]
    fac = [
        (ts / 2 + tt - nu, 1),
        (t0 + tt + ss, 1),
        (t0 + tt - ss, 1),
        (h, -1),
        (2 * tt + h, -1),
        (t0 + ts + tt + h, -1),
    ]
    return _form(fac, 0, 1j * PI * (ts / 2 - t0 + nu - h), pre)


def _build_S(p, v, ctx):
    t0, tt = p["theta0"], p["thetat"]
    ss, rho = v["sigmas"], v["rho"]
    h = 0.5j * ctx.Q
    pre = [(2 * tt + h, 1), (rho - tt, 1), (ss - t0 - tt, 1), (-ss - t0 - tt, 1)]
    fac = [(tt - rho, 1), (t0 + tt + ss, 1), (t0 + tt - ss, 1), (h, -1), (h + 2 * tt, -1)]
    return _form(fac, -0.5j * PI, -1j * PI * (2 * h + 2 * t0 + tt - rho), pre)


def _build_X(p, v, ctx):
    th = p["theta"]
    ss, om = v["sigmas"], v["omega"]
    h = 0.5j * ctx.Q
    pre = [(om - th / 2, 1), (ss - th, 1), (-ss - th, 1)]
    fac = [(th / 2 - om, 1), (th + ss, 1), (th - ss, 1), (h, -1)]
    return _form(fac, -1j * PI, -1j * PI * (2.5 * th + 3 * h - om), pre)


def _build_Q(p, v, ctx):
    ss, eta = v["sigmas"], v["eta"]
    Q = ctx.Q
    c0 = 1j * PI * (1 / 6 + 7 * Q * Q / 24 - eta * eta / 2 + 1j * eta * Q - ss * ss)
    return _form([(ss, 1), (-ss, 1)], -1j * PI, 2j * PI * (eta - 0.5j * Q), [(eta, 1)], c0)


def _build_L(p, v, ctx):
    tt, th = p["thetat"], p["theta"]
    lam, mu = v["lambda"], v["mu"]
    h = 0.5j * ctx.Q
    pre = [(2 * tt + h, 1), (th + tt + h, 1), (lam - th / 2 - tt, 1), (mu - th / 4 - tt, 1)]
    fac = [(th / 2 + tt - lam, 1), (th / 4 + tt - mu, 1), (h, -1), (2 * tt + h, -1), (th + tt + h, -1)]
    return _form(fac, 0.5j * PI, 1j * PI * (th / 4 + tt + lam + mu - h), pre)


def _build_W(p, v, ctx):
    tt = p["thetat"]
    ka, om = v["kappa"], v["omega"]
    h = 0.5j * ctx.Q
    pre = [(h + 2 * tt, 1), (ka - tt, 1)]
    fac = [(tt - ka, 1), (h, -1), (2 * tt + h, -1)]
    return _form(fac, 0.5j * PI, 1j * PI * (tt + ka + 2 * om), pre)


def _build_M(p, v, ctx):
    ze, om = v["zeta"], v["omega"]
    h = 0.5j * ctx.Q
    return _form([(-ze, 1), (h, -1)], 0, 1j * PI * (ze - h + 2 * om), [(ze, 1)])


def _rule_S(p, v, ctx):
    return TailRule.right_tail_below(complex(v["rho"]).imag - DELTA_FRACTION * ctx.Q)


def _rule_X(p, v, ctx):
    return TailRule.right_tail_below(complex(v["omega"]).imag / 2 - ctx.Q / 4 - DELTA_FRACTION * ctx.Q)


def _rule_Q(p, v, ctx):
    return TailRule.right_tail_below(complex(v["eta"]).imag / 2 - ctx.Q / 4 - DELTA_FRACTION * ctx.Q)


def _rule_L(p, v, ctx):
    im = complex(v["lambda"]).imag + complex(v["mu"]).imag
    return TailRule.right_tail_above(DELTA_FRACTION * ctx.Q - ctx.Q / 2 - im)


def _rule_W(p, v, ctx):
    im = complex(v["kappa"]).imag + complex(v["omega"]).imag
    return TailRule.right_tail_above(DELTA_FRACTION * ctx.Q - ctx.Q / 2 - im)


def _rule_none(p, v, ctx):
    return TailRule()


@dataclass(frozen=True)
class MemberInfo:
    name: str
    param_names: tuple[str, ...]
    var_names: tuple[str, str]
    build: Callable
    tail_rule: Callable
    level: int


MEMBERS: dict[str, MemberInfo] = {
    "R": MemberInfo("R", ("theta1", "thetat", "thetainf", "theta0"), ("sigmas", "sigmat"), _build_R, _rule_none, 1),
    "H": MemberInfo("H", ("theta0", "thetat", "thetastar"), ("sigmas", "nu"), _build_H, _rule_none, 2),
    "S": MemberInfo("S", ("theta0", "thetat"), ("sigmas", "rho"), _build_S, _rule_S, 3),
    "X": MemberInfo("X", ("theta",), ("sigmas", "omega"), _build_X, _rule_X, 4),
    "Q": MemberInfo("Q", (), ("sigmas", "eta"), _build_Q, _rule_Q, 5),
    "L": MemberInfo("L", ("thetat", "theta"), ("lambda", "mu"), _build_L, _rule_L, 3),
    "W": MemberInfo("W", ("thetat",), ("kappa", "omega"), _build_W, _rule_W, 4),
    "M": MemberInfo("M", (), ("zeta", "omega"), _build_M, _rule_none, 5),
}


# ---------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class SchemeDescriptor:
    member: str
    params: Mapping[str, float]
    vars: Mapping[str, complex]
    ctx: BContext

    def __post_init__(self):
        if self.member not in MEMBERS:
            raise ValueError(f"unknown member {self.member!r}")
        info = MEMBERS[self.member]
        if set(self.params) != set(info.param_names):
            raise ValueError(f"{self.member} takes parameters {info.param_names}, got {tuple(self.params)}")
        if set(self.vars) != set(info.var_names):
            raise ValueError(f"{self.member} takes variables {info.var_names}, got {tuple(self.vars)}")
        object.__setattr__(self, "params", {k: float(self.params[k]) for k in info.param_names})
        object.__setattr__(self, "vars", {k: complex(self.vars[k]) for k in info.var_names})

    @property
    def info(self) -> MemberInfo:
        return MEMBERS[self.member]

    def with_vars(self, **kw) -> "SchemeDescriptor":
        v = dict(self.vars)
        for k, val in kw.items():
            if k not in v:
                raise KeyError(k)
            v[k] = complex(val)
        return replace(self, vars=v)

    def with_params(self, **kw) -> "SchemeDescriptor":
        p = dict(self.params)
        p.update({k: float(val) for k, val in kw.items()})
        return replace(self, params=p)

    def with_ctx(self, ctx: BContext) -> "SchemeDescriptor":
        return replace(self, ctx=ctx)

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "b": self.ctx.b,
            "params": dict(self.params),
            "vars": {k: [v.real, v.imag] for k, v in self.vars.items()},
        }


def make_descriptor(member: str, b: float, **values) -> SchemeDescriptor:
    info = MEMBERS[member]
    params = {k: values.pop(k) for k in info.param_names}
    vars_ = {k: values.pop(k) for k in info.var_names}
    if values:
        raise ValueError(f"unknown keys for {member}: {sorted(values)}")
    return SchemeDescriptor(member, params, vars_, BContext(b))


REFERENCE_PARAMS = {
    "R": {"theta1": 0.2, "thetat": 0.3, "thetainf": 0.4, "theta0": 0.15},
    "H": {"theta0": 0.2, "thetat": 0.3, "thetastar": 0.4},
    "S": {"theta0": 0.2, "thetat": 0.3},
    "X": {"theta": 0.2},
    "Q": {},
    "L": {"thetat": 0.2, "theta": 0.3},
    "W": {"thetat": 0.2},
    "M": {},
}
REFERENCE_VARS = (0.41, 0.17)
REFERENCE_B = 0.84


def reference_descriptor(member: str, b: float = REFERENCE_B, vars_: tuple[complex, complex] = REFERENCE_VARS):
    info = MEMBERS[member]
    return SchemeDescriptor(member, dict(REFERENCE_PARAMS[member]), dict(zip(info.var_names, vars_)), BContext(b))


def integral_form(desc: SchemeDescriptor) -> IntegralForm:
    return desc.info.build(desc.params, desc.vars, desc.ctx)


# ---------------------------------------------------------------------------
# parameter checks


def _nz(x, tol=1e-9) -> bool:
    return abs(x) > tol


_POLY_CONDITIONS: dict[str, list[tuple[str, Callable]]] = {
    "R": [
        ("theta_inf != 0", lambda p, v: _nz(p["thetainf"])),
        ("theta_t != 0", lambda p, v: _nz(p["thetat"])),
        ("Re sigma_s != 0", lambda p, v: _nz(v["sigmas"].real)),
        ("Re sigma_t != 0", lambda p, v: _nz(v["sigmat"].real)),
        (
            "Re(theta0 - theta1 +/- sigma_s +/- sigma_t) != 0",
            lambda p, v: all(
                _nz((p["theta0"] - p["theta1"] + e * v["sigmas"] + f * v["sigmat"]).real) for e in (1, -1) for f in (1, -1)
            ),
        ),
        (
            "theta0 + theta1 +/- theta_inf +/- theta_t != 0",
            lambda p, v: all(_nz(p["theta0"] + p["theta1"] + e * p["thetainf"] + f * p["thetat"]) for e in (1, -1) for f in (1, -1)),
        ),
    ],
    "H": [
        ("theta_t != 0", lambda p, v: _nz(p["thetat"])),
        ("Re sigma_s != 0", lambda p, v: _nz(v["sigmas"].real)),
        (
            "Re(theta*/2 - nu - theta0 +/- sigma_s) != 0",
            lambda p, v: all(_nz((p["thetastar"] / 2 - v["nu"] - p["theta0"] + e * v["sigmas"]).real) for e in (1, -1)),
        ),
        ("theta0 + theta* +/- theta_t != 0", lambda p, v: all(_nz(p["theta0"] + p["thetastar"] + e * p["thetat"]) for e in (1, -1))),
    ],
    "S": [
        ("theta_t != 0", lambda p, v: _nz(p["thetat"])),
        ("Re sigma_s != 0", lambda p, v: _nz(v["sigmas"].real)),
        ("Re(+/- sigma_s + rho + theta0) != 0", lambda p, v: all(_nz((e * v["sigmas"] + v["rho"] + p["theta0"]).real) for e in (1, -1))),
    ],
    "X": [
        ("Re sigma_s != 0", lambda p, v: _nz(v["sigmas"].real)),
        ("Re(omega + theta/2 +/- sigma_s) != 0", lambda p, v: all(_nz((v["omega"] + p["theta"] / 2 + e * v["sigmas"]).real) for e in (1, -1))),
    ],
    "Q": [],
    "L": [
        ("theta_t != 0", lambda p, v: _nz(p["thetat"])),
        ("theta +/- theta_t != 0", lambda p, v: all(_nz(p["theta"] + e * p["thetat"]) for e in (1, -1))),
        ("Re(theta/4 - lambda + mu) != 0", lambda p, v: _nz((p["theta"] / 4 - v["lambda"] + v["mu"]).real)),
    ],
    "W": [("theta_t != 0", lambda p, v: _nz(p["thetat"]))],
    "M": [],
}


def validate_params(desc: SchemeDescriptor, purpose: str = "evaluate") -> tuple[SchemeDescriptor, list[str]]:
    """Check the parameter restrictions; raises AssumptionError naming the first violation."""
    warnings: list[str] = []
    if not desc.ctx.b > 0:
        raise AssumptionError("b > 0")
    for k, val in desc.params.items():
        if not math.isfinite(val):
            raise AssumptionError(f"{k} real and finite")
    if purpose not in ("evaluate", "poly_limit"):
        raise ValueError(f"unknown purpose {purpose!r}")
    if purpose == "poly_limit":
        if near_root_of_unity(desc.ctx.q, max_order=24, margin=desc.ctx.root_of_unity_margin):
            raise AssumptionError("b^2 irrational (q is close to a low-order root of unity)")
        for name, cond in _POLY_CONDITIONS[desc.member]:
            if not cond(desc.params, desc.vars):
                raise AssumptionError(name)
    return desc, warnings


# ---------------------------------------------------------------------------
# evaluation


def scheme_contour(desc: SchemeDescriptor, form: IntegralForm | None = None) -> ContourSpec:
    form = form or integral_form(desc)
    ctx = desc.ctx
    up, down = form.lattices_for(ctx)
    rule = desc.info.tail_rule(desc.params, desc.vars, ctx)
    try:
        return auto_contour(
            up,
            down,
            rule,
            ctx,
            tail_models=form.tail_models(ctx),
            reach=form.reach(ctx),
            envelope=lambda x: np.real(form.log_integrand(x, ctx)),
        )
    except PinchError:
        raise
    except ContourError as exc:
        if "no decaying tail direction" in str(exc):
            raise DomainError(f"{desc.member} integral does not converge at {desc.vars}: {exc}") from exc
        raise


def _near_points(form: IntegralForm, ctx: BContext, contour: ContourSpec) -> list[complex]:
    up, down = form.lattices_for(ctx)
    lo, hi = contour.min_height - 2.0, contour.max_height + 2.0
    pts = []
    for lat in up + down:
        base = complex(lat.base)
        h = (base.imag - lo) if lat.direction == "down" else (hi - base.imag)
        if h >= 0:
            pts += [p for p, _, _ in lat.points(ctx.b, h) if lo - 1 <= p.imag <= hi + 1]
    return pts


def _phase_rate(form: IntegralForm, ctx: BContext):
    left, right = form.tail_models(ctx)

    def rate(x):
        x = np.asarray(x, dtype=complex)
        r = np.abs((2 * right.c2 * x + right.c1).imag)
        l = np.abs((2 * left.c2 * x + left.c1).imag)
        return np.where(x.real >= 0, r, l)

    return rate


def scheme_evaluate(
    desc: SchemeDescriptor,
    cfg: QuadratureConfig | None = None,
    contour: ContourSpec | None = None,
    info: dict | None = None,
) -> tuple[complex, float]:
    """Prefactor times the contour integral; returns (value, err_est)."""
    cfg = cfg or QuadratureConfig()
    ctx = desc.ctx
    form = integral_form(desc)
    logP = form.log_prefactor(ctx)
    if contour is None:
        contour = scheme_contour(desc, form)
    if logP.real == -math.inf:
        return 0j, 0.0
    models = form.tail_models(ctx)
    lreach, rreach = form.reach(ctx)
    w = contour.waypoints
    tails = (
        models[0] if w[0].real <= lreach else None,
        models[1] if w[-1].real >= rreach else None,
    )

    def f(x):
        return logP + form.log_integrand(x, ctx)

    val, err = integrate_contour(
        f,
        contour,
        cfg,
        log=True,
        singularities=_near_points(form, ctx, contour),
        phase_rate=_phase_rate(form, ctx),
        tails=tails,
        info=info,
    )
    if info is not None:
        info["contour"] = contour
    return val, err


# ---------------------------------------------------------------------------
# discretization lattices


@dataclass(frozen=True)
class DiscretizationLattice:
    member: str
    which_variable: str
    base: complex
    step: complex
    target_family: Family

    def point(self, n: int) -> complex:
        return self.base + self.step * n


def _e(z):
    return cmath.exp(z)


# (member, variable) -> (base(params, ctx), family, map(params, other_var, ctx) -> (family params, argument))
_LATTICE_TABLE: dict[tuple[str, str], tuple[Callable, Family, Callable]] = {
    ("R", "sigmas"): (
        lambda p, c: p["theta0"] + p["thetat"] + 0.5j * c.Q,
        Family.ASKEY_WILSON,
        lambda p, v, c: (
            tuple(
                _e(TWO_PI * c.b * (0.5j * c.Q + s))
                for s in (
                    p["theta1"] + p["thetat"],
                    p["theta0"] - p["thetainf"],
                    -p["theta1"] + p["thetat"],
                    p["theta0"] + p["thetainf"],
                )
            ),
            _e(TWO_PI * c.b * v["sigmat"]),
        ),
    ),
    ("R", "sigmat"): (
        lambda p, c: p["theta1"] + p["thetat"] + 0.5j * c.Q,
        Family.ASKEY_WILSON,
        lambda p, v, c: (
            tuple(
                _e(TWO_PI * c.b * (0.5j * c.Q + s))
                for s in (
                    p["theta0"] + p["thetat"],
                    p["theta1"] - p["thetainf"],
                    -p["theta0"] + p["thetat"],
                    p["theta1"] + p["thetainf"],
                )
            ),
            _e(TWO_PI * c.b * v["sigmas"]),
        ),
    ),
    ("H", "nu"): (
        lambda p, c: p["thetastar"] / 2 + p["thetat"] + 0.5j * c.Q,
        Family.CONT_DUAL_Q_HAHN,
        lambda p, v, c: (
            (
                _e(TWO_PI * c.b * (p["thetat"] + p["theta0"] + 0.5j * c.Q)),
                _e(TWO_PI * c.b * (p["thetat"] - p["theta0"] + 0.5j * c.Q)),
                _e(TWO_PI * c.b * (p["thetastar"] + 0.5j * c.Q)),
            ),
            _e(TWO_PI * c.b * v["sigmas"]),
        ),
    ),
    ("H", "sigmas"): (
        lambda p, c: p["theta0"] + p["thetat"] + 0.5j * c.Q,
        Family.BIG_Q_JACOBI,
        lambda p, v, c: (
            (
                _e(2 * TWO_PI * c.b * p["thetat"]),
                _e(2 * TWO_PI * c.b * p["theta0"]),
                _e(TWO_PI * c.b * (p["theta0"] + p["thetastar"] + p["thetat"])),
            ),
            _e(TWO_PI * c.b * (p["thetat"] + p["thetastar"] / 2 + 0.5j * c.Q)) * _e(-TWO_PI * c.b * v["nu"]),
        ),
    ),
    ("S", "rho"): (
        lambda p, c: p["thetat"] + 0.5j * c.Q,
        Family.AL_SALAM_CHIHARA,
        lambda p, v, c: (
            (
                _e(TWO_PI * c.b * (p["thetat"] + p["theta0"] + 0.5j * c.Q)),
                _e(TWO_PI * c.b * (p["thetat"] - p["theta0"] + 0.5j * c.Q)),
            ),
            _e(TWO_PI * c.b * v["sigmas"]),
        ),
    ),
    ("S", "sigmas"): (
        lambda p, c: p["theta0"] + p["thetat"] + 0.5j * c.Q,
        Family.LITTLE_Q_JACOBI_Y,
        lambda p, v, c: (
            (_e(2 * TWO_PI * c.b * p["thetat"]), _e(2 * TWO_PI * c.b * p["theta0"])),
            _e(PI * c.b * (1j * c.Q + 2 * p["thetat"])) * _e(-TWO_PI * c.b * v["rho"]),
        ),
    ),
    ("X", "omega"): (
        lambda p, c: p["theta"] / 2 + 0.5j * c.Q,
        Family.CONT_BIG_Q_HERMITE,
        lambda p, v, c: ((_e(TWO_PI * c.b * (p["theta"] + 0.5j * c.Q)),), _e(TWO_PI * c.b * v["sigmas"])),
    ),
    ("Q", "eta"): (
        lambda p, c: 0.5j * c.Q,
        Family.CONT_Q_HERMITE,
        lambda p, v, c: ((), _e(TWO_PI * c.b * v["sigmas"])),
    ),
    ("L", "lambda"): (
        lambda p, c: p["theta"] / 2 + p["thetat"] + 0.5j * c.Q,
        Family.BIG_Q_LAGUERRE,
        lambda p, v, c: (
            (_e(2 * TWO_PI * c.b * p["thetat"]), _e(TWO_PI * c.b * (p["theta"] + p["thetat"]))),
            _e(PI * c.b * (1j * c.Q + p["theta"] / 2 + 2 * p["thetat"])) * _e(-TWO_PI * c.b * v["mu"]),
        ),
    ),
    ("W", "kappa"): (
        lambda p, c: p["thetat"] + 0.5j * c.Q,
        Family.LITTLE_Q_LAGUERRE,
        lambda p, v, c: ((_e(2 * TWO_PI * c.b * p["thetat"]),), _e(-TWO_PI * c.b * (0.5j * c.Q + v["omega"]))),
    ),
    ("M", "zeta"): (
        lambda p, c: 0.5j * c.Q,
        Family.LITTLE_Q_LAGUERRE,
        lambda p, v, c: ((0j,), _e(-TWO_PI * c.b * (0.5j * c.Q + v["omega"]))),
    ),
}

LATTICES: tuple[tuple[str, str], ...] = tuple(_LATTICE_TABLE)


def get_lattice(desc: SchemeDescriptor, variable: str | None = None) -> DiscretizationLattice:
    keys = [k for k in _LATTICE_TABLE if k[0] == desc.member and (variable is None or k[1] == variable)]
    if not keys:
        raise ValueError(f"no discretization lattice for {desc.member}/{variable}")
    key = keys[0]
    base_fn, fam, _ = _LATTICE_TABLE[key]
    return DiscretizationLattice(desc.member, key[1], complex(base_fn(desc.params, desc.ctx)), 1j * desc.ctx.b, fam)


def lattice_point(desc: SchemeDescriptor, lattice: DiscretizationLattice, n: int) -> SchemeDescriptor:
    return desc.with_vars(**{lattice.which_variable: lattice.point(n)})


def poly_param_map(desc: SchemeDescriptor, lattice: DiscretizationLattice) -> tuple[QPolyFamily, complex]:
    key = (lattice.member, lattice.which_variable)
    if key not in _LATTICE_TABLE or lattice.member != desc.member:
        raise ValueError(f"unknown pairing {key}")
    _, fam, fmap = _LATTICE_TABLE[key]
    params, arg = fmap(desc.params, desc.vars, desc.ctx)
    return QPolyFamily(fam, params, desc.ctx.q), complex(arg)


def _leading(u0: complex, slope: complex, ctx: BContext) -> tuple[complex, int]:
    C, k = sb_leading(u0, ctx)
    if k == 0:
        return C, 0
    if abs(slope) < 1e-14:
        raise ArithmeticError(f"degenerate lattice factor at {u0:.6g}")
    return C * slope**k, k


def _pinch_residues(desc: SchemeDescriptor, lattice: DiscretizationLattice, n: int) -> complex:
    """Finite limit of P(eps) * (-2 pi i) * sum of residues at the colliding poles."""
    ctx = desc.ctx
    Q, b = ctx.Q, ctx.b
    d0 = lattice_point(desc, lattice, n)
    d1 = desc.with_vars(**{lattice.which_variable: lattice.point(n) + 1})
    f0, f1 = integral_form(d0), integral_form(d1)
    a0 = np.array(f0.shifts)
    sa = np.array(f1.shifts) - a0
    u0 = np.array(f0.pre_args)
    su = np.array(f1.pre_args) - u0
    pw = f0.powers

    # prefactor leading behavior
    pre_C = cmath.exp(f0.c0)
    pre_ord = 0
    for u, s, p in zip(u0, su, f0.pre_powers):
        C, k = _leading(complex(u), complex(s), ctx)
        pre_C *= C**p
        pre_ord += k * p

    total = 0j
    tol = 1e-8 * Q
    for j, pj in enumerate(pw):
        if pj < 0:
            continue
        dj = -a0[j] - 0.5j * Q
        for k, pk in enumerate(pw):
            if pk > 0:
                continue
            uk = -a0[k] + 0.5j * Q
            gap = dj - uk
            if abs(gap.real) > tol or gap.imag < -tol:
                continue
            # gap = i (N b + L / b)
            found = None
            for N in range(int(gap.imag / b + 1e-9) + 1):
                L = (gap.imag - N * b) * b
                if abs(L - round(L)) < 1e-7:
                    found = (N, int(round(L)))
                    break
            if found is None:
                continue
            N, L = found
            for m in range(N + 1):
                for l in range(L + 1):
                    x0 = dj - 1j * (m * b + l / b)
                    val = sb_pole_residue(m, l, ctx) * pre_C
                    order = pre_ord
                    for i, (a, s, p) in enumerate(zip(a0, sa, pw)):
                        if i == j:
                            continue
                        C, kk = _leading(complex(x0 + a), complex(s - sa[j]), ctx)
                        val *= C**p
                        order += kk * p
                    val *= cmath.exp((f0.c2 * x0 + f0.c1) * x0)
                    if order == 0:
                        total += -2j * PI * val
                    elif order < 0:
                        raise ArithmeticError("lattice limit diverges")
    return total


def scheme_evaluate_at_lattice(
    desc: SchemeDescriptor,
    lattice: DiscretizationLattice,
    n: int,
    cfg: QuadratureConfig | None = None,
    eps0: float | None = None,
) -> complex:
    """Exact value at lattice point n (the polynomial limit)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    validate_params(lattice_point(desc, lattice, n), "poly_limit")
    if desc.member == "Q":
        return _q_lattice(desc, lattice, n, cfg, eps0)
    return _pinch_residues(desc, lattice, n)


def _richardson_q0(desc, lattice, cfg, eps0, levels: int = RICHARDSON_LEVELS):
    """Neville extrapolation of Q(eta_0 - i eps) to eps = 0 over eps0 / 2^k."""
    ctx = desc.ctx
    eps0 = 1e-2 * ctx.Q if eps0 is None else eps0
    row = []
    for k in range(levels):
        v, _ = scheme_evaluate(desc.with_vars(eta=lattice.point(0) - 1j * eps0 / 2**k), cfg)
        row.append(v)
    diag = [row[-1]]
    for j in range(1, levels):
        row = [(2**j * row[i + 1] - row[i]) / (2**j - 1) for i in range(len(row) - 1)]
        diag.append(row[-1])
    return diag[-1], abs(diag[-1] - diag[-2])


def _q_lattice(desc, lattice, n, cfg, eps0, target_tol: float = 1e-5):
    q0, spread = _richardson_q0(desc, lattice, cfg, eps0)
    if spread > 10 * target_tol:
        raise ExtrapolationError(f"Richardson estimates disagree by {spread:.3g}")
    if n == 0:
        return q0
    b = desc.ctx.b
    c = 2 * cmath.cosh(TWO_PI * b * desc.vars["sigmas"])
    eta0 = lattice.point(0)
    coef0 = 1 + cmath.exp(TWO_PI * b * (eta0 - 0.5j * b))
    prev = 0j
    if abs(coef0) > 1e-12:
        prev, _ = scheme_evaluate(desc.with_vars(eta=eta0 - 1j * b), cfg)
    vals = [prev, q0]
    for k in range(n):
        eta = lattice.point(k)
        coef = 1 + cmath.exp(TWO_PI * b * (eta - 0.5j * b))
        vals.append(c * vals[-1] - coef * vals[-2])
    return vals[-1]


# ---------------------------------------------------------------------------
# confluent limits


@dataclass(frozen=True)
class Edge:
    parent: str
    child: str
    direction: int  # sign of Lambda in the limit
    embed: Callable


def _embed_RH(p, v, L):
    ts = p["thetastar"]
    return (
        {"theta1": (L + ts) / 2, "thetat": p["thetat"], "thetainf": (L - ts) / 2, "theta0": p["theta0"]},
        {"sigmas": v["sigmas"], "sigmat": L / 2 + v["nu"]},
    )


def _embed_HS(p, v, L):
    return ({"theta0": p["theta0"], "thetat": p["thetat"], "thetastar": L}, {"sigmas": v["sigmas"], "nu": L / 2 + v["rho"]})


def _embed_SX(p, v, L):
    th = p["theta"]
    return ({"theta0": (th + L) / 2, "thetat": (th - L) / 2}, {"sigmas": v["sigmas"], "rho": -L / 2 + v["omega"]})


def _embed_XQ(p, v, L):
    return ({"theta": L}, {"sigmas": v["sigmas"], "omega": L / 2 + v["eta"]})


def _embed_HL(p, v, L):
    th = p["theta"]
    return (
        {"theta0": (th + L) / 2, "thetat": p["thetat"], "thetastar": (th - L) / 2},
        {"sigmas": v["lambda"] + L / 2, "nu": v["mu"] - L / 4},
    )


def _embed_LW(p, v, L):
    return ({"thetat": p["thetat"], "theta": L}, {"lambda": L / 2 + v["kappa"], "mu": -3 * L / 4 + v["omega"]})


def _embed_WM(p, v, L):
    return ({"thetat": L}, {"kappa": L + v["zeta"], "omega": v["omega"]})


EDGES: dict[str, Edge] = {
    "R->H": Edge("R", "H", -1, _embed_RH),
    "H->S": Edge("H", "S", -1, _embed_HS),
    "S->X": Edge("S", "X", 1, _embed_SX),
    "X->Q": Edge("X", "Q", -1, _embed_XQ),
    "H->L": Edge("H", "L", -1, _embed_HL),
    "L->W": Edge("L", "W", 1, _embed_LW),
    "W->M": Edge("W", "M", -1, _embed_WM),
}


def confluence_embed(child_member: str, child_params: Mapping, child_vars: Mapping, Lam: float, ctx: BContext | None = None):
    """Parent descriptor at confluence parameter Lam and the normalizer."""
    edges = [e for e in EDGES.values() if e.child == child_member]
    if not edges:
        raise ValueError(f"unknown edge into {child_member!r}")
    if not math.isfinite(Lam):
        raise ValueError("Lambda must be finite")
    edge = edges[0]
    ctx = ctx or BContext(REFERENCE_B)
    cv = {k: complex(val) for k, val in child_vars.items()}
    pp, pv = edge.embed(dict(child_params), cv, Lam)
    parent = SchemeDescriptor(edge.parent, pp, pv, ctx)
    norm = 1 + 0j
    if edge.child == "Q":
        Q = ctx.Q
        norm = cmath.exp(2j * PI * (cv["eta"] - 0.5j * Q) * (Lam + 0.5j * Q))
    return parent, norm
