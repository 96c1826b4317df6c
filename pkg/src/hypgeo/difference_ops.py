"""Difference operators of the scheme, stored as (coefficient, shift) data.

Every operator acts on one variable of a member function and has the other
variable's exponential or cosh as its eigenvalue.  Coefficients are plain
functions ``c(params, x)`` with ``b`` already bound, so the ``_binv`` variants
are literally the same closures built with ``1/b``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping

from .scheme_functions import MEMBERS, SchemeDescriptor

PI = math.pi
VARIANTS = ("primary", "primary_binv", "dual", "dual_binv", "sqrt", "sqrt_binv")
ROBUST_SHIFT = 1e-6  # in units of Q


class SingularCoefficientError(ZeroDivisionError):
    """The evaluation point sits on a zero of a coefficient denominator."""

    def __init__(self, point, denominator):
        super().__init__(f"coefficient singular at {point!r} (denominator {denominator!r})")
        self.point = point
        self.denominator = denominator


class SingularPointWarning(UserWarning):
    pass


def _ch(z):
    return cmath.cosh(z)


def _sh(z):
    return cmath.sinh(z)


def _ex(z):
    return cmath.exp(z)


@dataclass(frozen=True)
class ShiftOperatorSpec:
    member: str
    variant: str
    variable: str
    other_variable: str
    b: float  # the b that actually enters the coefficients (1/b for _binv)
    params: Mapping[str, float]
    terms: tuple  # of (coefficient(params, x), shift)
    eigenvalue: Callable  # (params, other) -> complex
    denominators: tuple = ()  # callables (x) whose zeros are singular points
    reading: str = "standard"
    notes: tuple = field(default=())

    @property
    def shifts(self) -> tuple[complex, ...]:
        return tuple(s for _, s in self.terms)

    def coefficient_values(self, x: complex) -> list[complex]:
        return [c(self.params, x) for c, _ in self.terms]

    def eigen(self, other: complex) -> complex:
        return self.eigenvalue(self.params, other)

    def table(self) -> list[dict]:
        rows = []
        for k, (c, s) in enumerate(self.terms):
            rows.append({"term": k, "shift": s, "coefficient": getattr(c, "label", repr(c))})
        return rows


def _labelled(fn, label):
    fn.label = label
    return fn


def _coef(func, beta, label):
    return _labelled(partial(func, beta), label)


# ---------------------------------------------------------------------------
# coefficient functions: signature (beta, params, x)


def _R_plus(beta, p, s):
    pb = PI * beta
    h = 0.5j * beta
    num = (
        -4
        * _ch(pb * (h + p["thetat"] + s + p["theta0"]))
        * _ch(pb * (h + p["thetat"] + s - p["theta0"]))
        * _ch(pb * (h + p["theta1"] + s + p["thetainf"]))
        * _ch(pb * (h + p["theta1"] + s - p["thetainf"]))
    )
    return num / (_sh(2 * pb * s) * _sh(pb * (2 * s + 1j * beta)))


def _R_zero(beta, p, s):
    return -2 * _ch(2 * PI * beta * (p["theta1"] + p["thetat"] + 0.5j * beta)) - _R_plus(beta, p, s) - _R_plus(beta, p, -s)


def _H_plus(beta, p, s):
    pb = PI * beta
    h = 0.5j * beta
    num = (
        -2
        * _ex(-pb * (s + h))
        * _ch(pb * (h + p["thetastar"] + s))
        * _ch(pb * (h + p["thetat"] + s + p["theta0"]))
        * _ch(pb * (h + p["thetat"] + s - p["theta0"]))
    )
    return num / (_sh(pb * (2 * s + 1j * beta)) * _sh(2 * pb * s))


def _H_zero(beta, p, s):
    Q = beta + 1 / beta
    return _ex(-PI * beta * (1j * Q + p["thetastar"] + 2 * p["thetat"])) - _H_plus(beta, p, s) - _H_plus(beta, p, -s)


def _Ht_pm(sign, beta, p, nu):
    pb = PI * beta
    h = 0.5j * beta
    t0, tt, ts = p["theta0"], p["thetat"], p["thetastar"]
    return (
        -4
        * _ex(2 * pb * nu)
        * _ex(-sign * pb * (t0 + tt))
        * _ch(pb * (h + t0 + sign * (nu + ts / 2)))
        * _ch(pb * (h + tt + sign * (nu - ts / 2)))
    )


def _Ht_zero(beta, p, nu):
    c = -2 * _ch(2 * PI * beta * (0.5j * beta + p["theta0"] + p["thetat"]))
    return c - _Ht_pm(1, beta, p, nu) - _Ht_pm(-1, beta, p, nu)


def _S_plus(beta, p, s):
    pb = PI * beta
    h = 0.5j * beta
    Q = beta + 1 / beta
    num = _ex(-pb * (2 * s + 1j * Q)) * _ch(pb * (h + p["theta0"] + p["thetat"] + s)) * _ch(pb * (h - p["theta0"] + p["thetat"] + s))
    return num / (_sh(pb * (2 * s + 1j * beta)) * _sh(2 * pb * s))


def _S_zero(beta, p, s):
    Q = beta + 1 / beta
    return _ex(-PI * beta * (2 * p["thetat"] + 1j * Q)) - _S_plus(beta, p, s) - _S_plus(beta, p, -s)


def _St_pm(sign, beta, p, rho):
    pb = PI * beta
    h = 0.5j * beta
    tt = p["thetat"]
    return -2 * _ex(pb * rho) * _ex(-sign * pb * (h + 2 * p["theta0"] + tt)) * _ch(pb * (h + tt + sign * rho))


def _St_zero(beta, p, rho):
    c = -2 * _ch(2 * PI * beta * (0.5j * beta + p["theta0"] + p["thetat"]))
    return c - _St_pm(1, beta, p, rho) - _St_pm(-1, beta, p, rho)


def _X_plus(beta, p, s):
    pb = PI * beta
    num = -_ex(-1.5 * pb * (2 * s + 1j * beta)) * _ch(pb * (0.5j * beta + p["theta"] + s))
    return num / (2 * _sh(2 * pb * s) * _sh(pb * (2 * s + 1j * beta)))


def _X_zero(beta, p, s):
    Q = beta + 1 / beta
    return _ex(-PI * beta * (p["theta"] + 1j * Q)) - _X_plus(beta, p, s) - _X_plus(beta, p, -s)


def _Xt_plus(beta, p, om):
    Q = beta + 1 / beta
    return _ex(-2 * PI * beta * (p["theta"] + 0.5j * Q)) + 0 * om


def _Xt_minus(beta, p, om):
    pb = PI * beta
    th = p["theta"]
    return -2 * _ex(pb * (0.5j * beta + 1.5 * th + om)) * _ch(pb * (0.5j * beta + th / 2 - om))


def _Xt_zero(beta, p, om):
    return -2 * _ch(PI * beta * (2 * p["theta"] + 1j * beta)) - _Xt_plus(beta, p, om) - _Xt_minus(beta, p, om)


def _Q_plus(beta, p, s):
    pb = PI * beta
    return -_ex(-2 * pb * (2 * s + 1j * beta)) / (4 * _sh(2 * pb * s) * _sh(pb * (2 * s + 1j * beta)))


def _Q_zero(beta, p, s):
    Q = beta + 1 / beta
    return _ex(-1j * PI * beta * Q) - _Q_plus(beta, p, s) - _Q_plus(beta, p, -s)


def _Qhat_plus(beta, p, s):
    Q = beta + 1 / beta
    return -_ex(-PI * beta * (2 * s + 0.5j * Q)) / (2 * _sh(2 * PI * beta * s))


def _Qhat_minus(beta, p, s):
    return _Qhat_plus(beta, p, -s)


def _Qt_plus(beta, p, eta):
    return 1.0 + 0 * eta


def _Qt_minus(beta, p, eta):
    return 1 + _ex(2 * PI * beta * (eta - 0.5j * beta))


def _L_plus(beta, p, lam):
    pb = PI * beta
    h = 0.5j * beta
    th, tt = p["theta"], p["thetat"]
    return -4 * _ex(-pb * (th / 2 + tt - 2 * lam)) * _ch(pb * (h + th / 2 + lam)) * _ch(pb * (h - th / 2 + tt + lam))


def _L_minus(beta, p, lam):
    pb = PI * beta
    th, tt = p["theta"], p["thetat"]
    return -2 * _ex(pb * (tt - 0.5j * beta + 3 * lam)) * _ch(pb * (0.5j * beta + th / 2 + tt - lam))


def _L_zero(beta, p, lam):
    Q = beta + 1 / beta
    c = _ex(-PI * beta * (p["theta"] / 2 + 2 * p["thetat"] + 1j * Q))
    return c - _L_plus(beta, p, lam) - _L_minus(beta, p, lam)


def _Lt_plus(beta, p, mu):
    pb = PI * beta
    h = 0.5j * beta
    th, tt = p["theta"], p["thetat"]
    return -4 * _ex(-pb * (th / 2 + tt - 2 * mu)) * _ch(pb * (h + 0.75 * th + mu)) * _ch(pb * (h - th / 4 + tt + mu))


def _Lt_minus(beta, p, mu):
    pb = PI * beta
    th, tt = p["theta"], p["thetat"]
    return -2 * _ex(pb * (-0.5j * beta + th / 4 + tt + 3 * mu)) * _ch(pb * (0.5j * beta + th / 4 + tt - mu))


def _Lt_const(beta, p):
    Q = beta + 1 / beta
    return _ex(-PI * beta * (p["theta"] + 2 * p["thetat"] + 1j * Q))


def _Lt_zero(beta, p, mu):
    return _Lt_const(beta, p) - _Lt_plus(beta, p, mu) - _Lt_minus(beta, p, mu)


def _Lt_zero_printed(beta, p, mu):
    # the diagonal term with the reflected plus-coefficient in place of the minus one
    return _Lt_const(beta, p) - _Lt_plus(beta, p, mu) - _Lt_plus(beta, p, -mu)


def _W_pm(sign, beta, p, ka):
    pb = PI * beta
    tt = p["thetat"]
    return -2 * _ex(3 * pb * ka) * _ex(sign * pb * (0.5j * beta - tt)) * _ch(pb * (0.5j * beta + tt + sign * ka))


def _W_zero(beta, p, ka):
    return -_W_pm(1, beta, p, ka) - _W_pm(-1, beta, p, ka)


def _Wt_plus(beta, p, om):
    pb = PI * beta
    return -2 * _ex(pb * (om - 0.5j * beta - 2 * p["thetat"])) * _ch(pb * (om + 0.5j * beta))


def _Wt_minus(beta, p, om):
    return -_ex(2 * PI * beta * (p["thetat"] + om))


def _Wt_zero(beta, p, om):
    return 2 * _ex(2 * PI * beta * om) * _ch(2 * PI * beta * p["thetat"])


def _M_zero(beta, p, ze):
    return _ex(2 * PI * beta * ze)


def _M_plus(beta, p, ze):
    return -_ex(2 * PI * beta * ze)


def _Mt_zero(beta, p, om):
    return _ex(2 * PI * beta * om)


def _Mt_plus(beta, p, om):
    pb = PI * beta
    return -2 * _ex(pb * (om - 0.5j * beta)) * _ch(pb * (0.5j * beta + om))


# ---------------------------------------------------------------------------
# eigenvalues: signature (beta, params, other)


def _eig_2cosh(beta, p, y):
    return 2 * _ch(2 * PI * beta * y)


def _eig_exp(factor, beta, p, y):
    return _ex(factor * PI * beta * y)


def _sinh_denoms(beta):
    # zeros of sinh(2 pi beta s), sinh(pi beta (2s + i beta)) and its reflection
    return (
        lambda s: _sh(2 * PI * beta * s),
        lambda s: _sh(PI * beta * (2 * s + 1j * beta)),
        lambda s: _sh(PI * beta * (2 * s - 1j * beta)),
    )


def _reflect(func):
    def g(beta, p, x):
        return func(beta, p, -x)

    return g


def _three_term(plus, zero, beta, plus_label, minus=None, minus_label=None):
    """Terms for c+ e^{i beta d} + c- e^{-i beta d} + c0."""
    if minus is None:
        minus = _reflect(plus)
        minus_label = f"{plus_label}(-x)"
    ib = 1j * beta
    return (
        (_coef(plus, beta, plus_label), ib),
        (_coef(minus, beta, minus_label), -ib),
        (_coef(zero, beta, "diag"), 0j),
    )


def _swap_R(p):
    q = dict(p)
    q["theta0"], q["theta1"] = p["theta1"], p["theta0"]
    return q


# member -> kind -> builder(beta, reading) returning (variable, other, terms, eigen, denoms, param_map)
def _R_ops(kind, beta, reading):
    terms = _three_term(_R_plus, _R_zero, beta, "H_R^+")
    eig = partial(_eig_2cosh, beta)
    if kind == "primary":
        return "sigmas", "sigmat", terms, eig, _sinh_denoms(beta), None
    return "sigmat", "sigmas", terms, eig, _sinh_denoms(beta), _swap_R


def _H_ops(kind, beta, reading):
    if kind == "primary":
        terms = _three_term(_H_plus, _H_zero, beta, "H_H^+")
        return "sigmas", "nu", terms, partial(_eig_exp, -2, beta), _sinh_denoms(beta), None
    terms = _three_term(partial(_Ht_pm, 1), _Ht_zero, beta, "Ht_H^+", partial(_Ht_pm, -1), "Ht_H^-")
    return "nu", "sigmas", terms, partial(_eig_2cosh, beta), (), None


def _S_ops(kind, beta, reading):
    if kind == "primary":
        terms = _three_term(_S_plus, _S_zero, beta, "H_S^+")
        return "sigmas", "rho", terms, partial(_eig_exp, -2, beta), _sinh_denoms(beta), None
    terms = _three_term(partial(_St_pm, 1), _St_zero, beta, "Ht_S^+", partial(_St_pm, -1), "Ht_S^-")
    return "rho", "sigmas", terms, partial(_eig_2cosh, beta), (), None


def _X_ops(kind, beta, reading):
    if kind == "primary":
        terms = _three_term(_X_plus, _X_zero, beta, "H_X^+")
        return "sigmas", "omega", terms, partial(_eig_exp, -2, beta), _sinh_denoms(beta), None
    terms = _three_term(_Xt_plus, _Xt_zero, beta, "Ht_X^+", _Xt_minus, "Ht_X^-")
    return "omega", "sigmas", terms, partial(_eig_2cosh, beta), (), None


def _Q_ops(kind, beta, reading):
    if kind == "primary":
        terms = _three_term(_Q_plus, _Q_zero, beta, "H_Q^+")
        return "sigmas", "eta", terms, partial(_eig_exp, -2, beta), _sinh_denoms(beta), None
    if kind == "sqrt":
        half = 0.5j * beta
        terms = ((_coef(_Qhat_plus, beta, "Hhat_Q^+"), half), (_coef(_Qhat_minus, beta, "Hhat_Q^-"), -half))
        return "sigmas", "eta", terms, partial(_eig_exp, -1, beta), (lambda s: _sh(2 * PI * beta * s),), None
    ib = 1j * beta
    terms = ((_coef(_Qt_plus, beta, "1"), ib), (_coef(_Qt_minus, beta, "1+e^{2 pi b (eta - ib/2)}"), -ib))
    return "eta", "sigmas", terms, partial(_eig_2cosh, beta), (), None


def _L_ops(kind, beta, reading):
    if kind == "primary":
        terms = _three_term(_L_plus, _L_zero, beta, "H_L^+", _L_minus, "H_L^-")
        return "lambda", "mu", terms, partial(_eig_exp, -2, beta), (), None
    zero = _Lt_zero_printed if reading == "printed" else _Lt_zero
    terms = _three_term(_Lt_plus, zero, beta, "Ht_L^+", _Lt_minus, "Ht_L^-")
    return "mu", "lambda", terms, partial(_eig_exp, -2, beta), (), None


def _W_ops(kind, beta, reading):
    if kind == "primary":
        terms = _three_term(partial(_W_pm, 1), _W_zero, beta, "H_W^+", partial(_W_pm, -1), "H_W^-")
        return "kappa", "omega", terms, partial(_eig_exp, -2, beta), (), None
    terms = _three_term(_Wt_plus, _Wt_zero, beta, "Ht_W^+", _Wt_minus, "Ht_W^-")
    return "omega", "kappa", terms, partial(_eig_exp, -2, beta), (), None


def _M_ops(kind, beta, reading):
    ib = 1j * beta
    if kind == "primary":
        terms = ((_coef(_M_zero, beta, "e^{2 pi b zeta}"), 0j), (_coef(_M_plus, beta, "-e^{2 pi b zeta}"), ib))
        return "zeta", "omega", terms, partial(_eig_exp, -2, beta), (), None
    terms = ((_coef(_Mt_zero, beta, "e^{2 pi b omega}"), 0j), (_coef(_Mt_plus, beta, "Ht_M^+"), ib))
    sign = 2 if reading == "printed" else -2
    return "omega", "zeta", terms, partial(_eig_exp, sign, beta), (), None


_BUILDERS = {"R": _R_ops, "H": _H_ops, "S": _S_ops, "X": _X_ops, "Q": _Q_ops, "L": _L_ops, "W": _W_ops, "M": _M_ops}

# Pairs with more than one reading of the printed formulas.  The first entry
# is the one the numerics confirm (see verifier.check_eigen); the others are
# kept so the comparison can be repeated.
READINGS: dict[tuple[str, str], tuple[str, ...]] = {
    ("L", "dual"): ("standard", "printed"),
    ("L", "dual_binv"): ("standard", "printed"),
    ("M", "dual_binv"): ("standard", "printed"),
}


def operator_pairs() -> list[tuple[str, str]]:
    """Every (member, variant) that has an eigen equation."""
    out = []
    for m in MEMBERS:
        for v in VARIANTS:
            if v.startswith("sqrt") and m != "Q":
                continue
            out.append((m, v))
    return out


def _check_pair(member: str, variant: str):
    if member not in _BUILDERS:
        raise KeyError(f"unknown member {member!r}")
    if variant not in VARIANTS or (variant.startswith("sqrt") and member != "Q"):
        raise KeyError(f"no operator {variant!r} for member {member!r}")


def build_operator(member: str, variant: str, desc: SchemeDescriptor | None = None, *, reading: str | None = None, b: float | None = None, params: Mapping | None = None) -> ShiftOperatorSpec:
    """Operator data for ``(member, variant)`` at the parameters of ``desc``."""
    _check_pair(member, variant)
    if desc is not None:
        if desc.member != member:
            raise ValueError(f"descriptor is for {desc.member}, not {member}")
        b = desc.ctx.b
        params = desc.params
    if b is None or params is None:
        raise ValueError("need a descriptor or explicit b and params")
    options = READINGS.get((member, variant), ("standard",))
    reading = reading or options[0]
    if reading not in options:
        raise KeyError(f"reading {reading!r} not defined for {(member, variant)}")
    kind = variant.replace("_binv", "")
    beta = 1 / b if variant.endswith("_binv") else b
    var, other, terms, eig, denoms, pmap = _BUILDERS[member](kind, beta, reading)
    p = dict(params)
    if pmap is not None:
        p = pmap(p)
    return ShiftOperatorSpec(
        member=member,
        variant=variant,
        variable=var,
        other_variable=other,
        b=beta,
        params=p,
        terms=terms,
        eigenvalue=eig,
        denominators=tuple(denoms),
        reading=reading,
    )


def operator_eigenvalue(member: str, variant: str, desc: SchemeDescriptor, *, reading: str | None = None) -> complex:
    op = build_operator(member, variant, desc, reading=reading)
    return op.eigen(desc.vars[op.other_variable])


def singular_distance(op: ShiftOperatorSpec, point: complex) -> float:
    """Smallest |denominator| at ``point`` (inf when there are none)."""
    if not op.denominators:
        return math.inf
    return min(abs(d(point)) for d in op.denominators)


def apply_operator(
    op: ShiftOperatorSpec,
    f: Callable[[complex], complex],
    point: complex,
    *,
    robust: bool = False,
    notes: list | None = None,
    singular_tol: float = 1e-10,
) -> complex:
    """sum_k c_k(point) f(point + shift_k)."""
    point = complex(point)
    if singular_distance(op, point) < singular_tol:
        if not robust:
            raise SingularCoefficientError(point, "sinh")
        Q = op.b + 1 / op.b
        moved = point + ROBUST_SHIFT * Q * (1 + 1j) / math.sqrt(2)
        msg = f"point {point!r} is on a coefficient singularity; using {moved!r}"
        warnings.warn(msg, SingularPointWarning, stacklevel=2)
        if notes is not None:
            notes.append(msg)
        point = moved
    total = 0j
    for c, s in op.terms:
        coeff = c(op.params, point)
        if coeff == 0:
            continue
        total += coeff * f(point + s)
    return total


def compose(op1: ShiftOperatorSpec, op2: ShiftOperatorSpec, f: Callable, point: complex) -> complex:
    """(op1 op2) f at point, both acting on the same variable."""
    return apply_operator(op1, lambda x: apply_operator(op2, f, x), point)


def operator_table(op: ShiftOperatorSpec, point: complex | None = None) -> dict:
    """Human-readable dump used by the CLI."""
    rows = []
    for c, s in op.terms:
        row = {"shift": f"{s.real:+.6g}{s.imag:+.6g}i", "coefficient": getattr(c, "label", "?")}
        if point is not None:
            v = c(op.params, complex(point))
            row["value"] = {"re": v.real, "im": v.imag}
        rows.append(row)
    return {
        "member": op.member,
        "variant": op.variant,
        "variable": op.variable,
        "eigen_variable": op.other_variable,
        "b_in_coefficients": op.b,
        "reading": op.reading,
        "terms": rows,
    }
