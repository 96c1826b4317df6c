"""q-Pochhammer symbols, basic hypergeometric series and the q-Askey ladder.

Every family can be evaluated from its defining series or from its
three-term recurrence started at degree 0.  Parameters are complex and q
may lie anywhere off the low-order roots of unity, including |q| = 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import mpmath


class SeriesError(ValueError):
    pass


class DivergenceError(SeriesError):
    pass


class SingularDenominatorError(SeriesError):
    pass


def qpoch(a: complex | Sequence[complex], q: complex, n: int) -> complex:
    """(a;q)_n, or the product over a list of a's."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if isinstance(a, (list, tuple)):
        out = 1.0 + 0j
        for x in a:
            out *= qpoch(x, q, n)
        return out
    out = 1.0 + 0j
    qk = 1.0 + 0j
    for _ in range(n):
        out *= 1.0 - a * qk
        qk *= q
    return out


def terminating_degree(a: complex, q: complex, nmax: int = 512, rtol: float = 1e-10) -> int | None:
    """n such that a = q^{-n} up to rtol, else None."""
    qinv = 1.0 / q
    p = 1.0 + 0j
    for n in range(nmax + 1):
        if abs(a - p) < rtol * abs(p):
            return n
        p *= qinv
    return None


def _qhyper(numerators, denominators, q, z, trunc_tol, max_terms, nterm):
    """Sum the series; returns (value, largest term magnitude)."""
    r, s = len(numerators), len(denominators)
    shift = 1 + s - r
    total = term = qk = 1
    biggest = 1.0
    small = 0
    k = 0
    while nterm is None or k < nterm:
        if k >= max_terms:
            raise DivergenceError("series did not converge")
        num = 1
        for a in numerators:
            num *= 1 - a * qk
        den = 1 - qk * q
        for bb in denominators:
            den *= 1 - bb * qk
        if den == 0:
            raise SingularDenominatorError(f"denominator vanishes at k = {k + 1}")
        term = term * num / den * z
        if shift:
            term *= (-qk) ** shift
        k += 1
        total += term
        mag = abs(term)
        biggest = max(biggest, float(mag))
        if nterm is None:
            if mag == 0 or mag <= trunc_tol * max(1.0, abs(total)):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        qk *= q
    return total, biggest


def _plan(numerators, denominators, q, z):
    r, s = len(numerators), len(denominators)
    shift = 1 + s - r
    degrees = [d for d in (terminating_degree(complex(a), complex(q)) for a in numerators) if d is not None]
    nterm = min(degrees) if degrees else None
    if nterm is None and shift == 0 and abs(z) >= 1.0:
        raise DivergenceError(f"non-terminating series with |z| = {abs(z)} >= 1")
    if nterm is None and shift < 0:
        raise DivergenceError("non-terminating series with more numerator than denominator parameters diverges")
    return nterm


def qhyper(
    numerators: Sequence[complex],
    denominators: Sequence[complex],
    q: complex,
    z: complex,
    trunc_tol: float = 1e-17,
    max_terms: int = 5000,
) -> complex:
    """The basic hypergeometric series r phi s.

    Uses the balancing factor [(-1)^k q^{k(k-1)/2}]^{1+s-r}, which is 1 for
    the (s+1) phi s series.  Works for complex or mpmath inputs.
    """
    nterm = _plan(numerators, denominators, q, z)
    return _qhyper(numerators, denominators, q, z, trunc_tol, max_terms, nterm)[0]


class Family(str, Enum):
    ASKEY_WILSON = "AskeyWilson"
    CONT_DUAL_Q_HAHN = "ContinuousDualQHahn"
    BIG_Q_JACOBI = "BigQJacobi"
    AL_SALAM_CHIHARA = "AlSalamChihara"
    LITTLE_Q_JACOBI_P = "LittleQJacobi_p"
    LITTLE_Q_JACOBI_Y = "LittleQJacobi_Y"
    BIG_Q_LAGUERRE = "BigQLaguerre"
    LITTLE_Q_LAGUERRE = "LittleQLaguerre"
    CONT_BIG_Q_HERMITE = "ContBigQHermite"
    CONT_Q_HERMITE = "ContQHermite"


ARITY = {
    Family.ASKEY_WILSON: 4,
    Family.CONT_DUAL_Q_HAHN: 3,
    Family.BIG_Q_JACOBI: 3,
    Family.AL_SALAM_CHIHARA: 2,
    Family.LITTLE_Q_JACOBI_P: 2,
    Family.LITTLE_Q_JACOBI_Y: 2,
    Family.BIG_Q_LAGUERRE: 2,
    Family.LITTLE_Q_LAGUERRE: 1,
    Family.CONT_BIG_Q_HERMITE: 1,
    Family.CONT_Q_HERMITE: 0,
}

# families whose argument enters through z and 1/z
LAURENT = {
    Family.ASKEY_WILSON,
    Family.CONT_DUAL_Q_HAHN,
    Family.AL_SALAM_CHIHARA,
    Family.CONT_BIG_Q_HERMITE,
    Family.CONT_Q_HERMITE,
}


@dataclass(frozen=True)
class QPolyFamily:
    tag: Family
    params: tuple[complex, ...]
    q: complex

    def __post_init__(self):
        object.__setattr__(self, "tag", Family(self.tag))
        object.__setattr__(self, "params", tuple(complex(p) for p in self.params))
        if len(self.params) != ARITY[self.tag]:
            raise ValueError(f"{self.tag.value} takes {ARITY[self.tag]} parameters, got {len(self.params)}")


# ---------------------------------------------------------------------------
# series forms


def _qh(numerators, denominators, q, z):
    nterm = _plan(numerators, denominators, q, z)
    val, biggest = _qhyper(numerators, denominators, q, z, 1e-17, 5000, nterm)
    return val, biggest / max(abs(val), 1e-300)


def _series_terms(t: Family, p, q, n: int, x):
    qn = q ** (-n)
    if t is Family.ASKEY_WILSON:
        a, b, c, d = p
        return _qh([qn, a * b * c * d * q ** (n - 1), a * x, a / x], [a * b, a * c, a * d], q, q)
    if t is Family.CONT_DUAL_Q_HAHN:
        a, b, c = p
        return _qh([qn, a * x, a / x], [a * b, a * c], q, q)
    if t is Family.BIG_Q_JACOBI:
        a, b, c = p
        return _qh([qn, a * b * q ** (n + 1), x], [a * q, c * q], q, q)
    if t is Family.AL_SALAM_CHIHARA:
        a, b = p
        return _qh([qn, a * x, a / x], [a * b, 0], q, q)
    if t is Family.LITTLE_Q_JACOBI_P:
        a, b = p
        return _qh([qn, a * b * q ** (n + 1)], [a * q], q, q * x)
    if t is Family.LITTLE_Q_JACOBI_Y:
        a, b = p
        return _qh([qn, q ** (n + 1) * a * b, x], [a * q, 0], q, q)
    if t is Family.BIG_Q_LAGUERRE:
        a, b = p
        return _qh([qn, 0, x], [a * q, b * q], q, q)
    if t is Family.LITTLE_Q_LAGUERRE:
        (a,) = p
        return _qh([qn, 0], [a * q], q, q * x)
    if t is Family.CONT_BIG_Q_HERMITE:
        (a,) = p
        val, cond = _qh([qn, a * x], [], q, q**n / (x * x))
        return a**n * x**n * val, cond
    if t is Family.CONT_Q_HERMITE:
        val, cond = _qh([qn, 0], [], q, q**n / (x * x))
        return x**n * val, cond
    raise ValueError(t)


# Terminating series at small |q| cancel badly (terms of size |q|^{-nk}).
# When the largest term exceeds the sum by this factor the sum is redone in
# extended precision from the same double inputs.
CANCELLATION_LIMIT = 1e3


def _series(fam: QPolyFamily, n: int, x: complex) -> complex:
    val, cond = _series_terms(fam.tag, fam.params, fam.q, n, x)
    if cond > CANCELLATION_LIMIT:
        with mpmath.workdps(20 + int(math.log10(cond))):
            conv = mpmath.mpc
            val, _ = _series_terms(fam.tag, [conv(v) for v in fam.params], conv(fam.q), n, conv(x))
    return complex(val)


def al_salam_chihara_2phi1(z: complex, alpha: complex, beta: complex, q: complex, n: int) -> complex:
    """Second series form of S_n, through a terminating 2phi1."""
    pre = alpha**n / qpoch(alpha * beta, q, n) * qpoch(alpha * z, q, n) * z ** (-n)
    return pre * qhyper([q ** (-n), beta / z], [q ** (1 - n) / (alpha * z)], q, q * z / alpha)


def big_q_laguerre_2phi1(x: complex, alpha: complex, beta: complex, q: complex, n: int) -> complex:
    """Second series form of the big q-Laguerre polynomials."""
    return qhyper([q ** (-n), alpha * q / x], [alpha * q], q, x / beta) / qpoch(q ** (-n) / beta, q, n)


def little_q_jacobi_3phi2(x: complex, alpha: complex, beta: complex, q: complex, n: int) -> complex:
    """p_n through its 3phi2 form with a zero denominator parameter."""
    pre = (-q * beta) ** (-n) * q ** (-n * (n - 1) / 2) * qpoch(q * beta, q, n) / qpoch(q * alpha, q, n)
    return pre * qhyper([q ** (-n), q ** (n + 1) * alpha * beta, q * beta * x], [q * beta, 0.0], q, q)


# ---------------------------------------------------------------------------
# recurrences: value of degree n+1 from degrees n and n-1


def _recurrence_coeffs(fam: QPolyFamily, k: int, x: complex):
    """(c_plus, c_zero, c_minus, rhs) with c+ T_{k+1} + c0 T_k + c- T_{k-1} = rhs T_k."""
    q, p = fam.q, fam.params
    qk = q**k
    t = fam.tag
    if t is Family.ASKEY_WILSON:
        a, b, c, d = p
        s = a * b * c * d
        ap = (1 - a * b * qk) * (1 - a * c * qk) * (1 - a * d * qk) * (1 - s * qk / q) / (
            a * (1 - s * q ** (2 * k - 1)) * (1 - s * q ** (2 * k))
        )
        am = a * (1 - qk) * (1 - b * c * qk / q) * (1 - b * d * qk / q) * (1 - c * d * qk / q) / (
            (1 - s * q ** (2 * k - 2)) * (1 - s * q ** (2 * k - 1))
        )
        return ap, a + 1 / a - ap - am, am, x + 1 / x
    if t is Family.CONT_DUAL_Q_HAHN:
        a, b, c = p
        bp = (1 - a * b * qk) * (1 - a * c * qk) / a
        bm = a * (1 - qk) * (1 - b * c * qk / q)
        return bp, a + 1 / a - bp - bm, bm, x + 1 / x
    if t is Family.BIG_Q_JACOBI:
        a, b, c = p
        cp = (1 - a * q * qk) * (1 - a * b * q * qk) * (1 - c * q * qk) / (
            (1 - a * b * q ** (2 * k + 1)) * (1 - a * b * q ** (2 * k + 2))
        )
        cm = -a * c * q * qk * (1 - qk) * (1 - a * b * qk / c) * (1 - b * qk) / (
            (1 - a * b * q ** (2 * k)) * (1 - a * b * q ** (2 * k + 1))
        )
        return cp, 1 - cp - cm, cm, x
    if t is Family.AL_SALAM_CHIHARA:
        a, b = p
        return 1 / a - b * qk, (a + b) * qk, a * (1 - qk), x + 1 / x
    if t is Family.LITTLE_Q_JACOBI_P:
        a, b = p
        A = qk * (1 - a * q * qk) * (1 - a * b * q * qk) / ((1 - a * b * q ** (2 * k + 1)) * (1 - a * b * q ** (2 * k + 2)))
        C = a * qk * (1 - qk) * (1 - b * qk) / ((1 - a * b * q ** (2 * k)) * (1 - a * b * q ** (2 * k + 1)))
        return A, -(A + C), C, -x
    if t is Family.LITTLE_Q_JACOBI_Y:
        a, b = p
        yp = (1 - a * q * qk) * (1 - a * b * q * qk) / ((1 - a * b * q ** (2 * k + 1)) * (1 - a * b * q ** (2 * k + 2)))
        ym = q ** (2 * k + 1) * a * a * b * (1 - qk) * (1 - b * qk) / ((1 - a * b * q ** (2 * k)) * (1 - a * b * q ** (2 * k + 1)))
        return yp, 1 - yp - ym, ym, x
    if t is Family.BIG_Q_LAGUERRE:
        a, b = p
        lp = (1 - a * q * qk) * (1 - b * q * qk)
        lm = -a * b * q * qk * (1 - qk)
        return lp, 1 - lp - lm, lm, x
    if t is Family.LITTLE_Q_LAGUERRE:
        (a,) = p
        wp = qk * (1 - a * q * qk)
        wm = a * qk * (1 - qk)
        return wp, -(wp + wm), wm, -x
    if t is Family.CONT_BIG_Q_HERMITE:
        (a,) = p
        return 1 / a, a * qk, a * (1 - qk), x + 1 / x
    if t is Family.CONT_Q_HERMITE:
        return 1.0, 0.0, 1 - qk, x + 1 / x
    raise ValueError(t)


def _recurrence(fam: QPolyFamily, n: int, x: complex) -> complex:
    prev, cur = 0j, 1.0 + 0j
    for k in range(n):
        cp, c0, cm, rhs = _recurrence_coeffs(fam, k, x)
        if cp == 0:
            raise SingularDenominatorError(f"leading recurrence coefficient vanishes at degree {k}")
        prev, cur = cur, ((rhs - c0) * cur - cm * prev) / cp
    return cur


def qpoly_eval(fam: QPolyFamily, n: int, arg: complex, mode: str = "series") -> complex:
    if n < 0:
        raise ValueError("n must be nonnegative")
    arg = complex(arg)
    if fam.tag in LAURENT and arg == 0:
        raise ValueError(f"{fam.tag.value} needs a nonzero argument")
    if mode == "series":
        return _series(fam, n, arg)
    if mode == "recurrence":
        return _recurrence(fam, n, arg)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# dualities


def askey_wilson_dual_params(alpha, beta, gamma, delta, q):
    at = cmath.sqrt(alpha * beta * gamma * delta / q)
    return at, alpha * beta / at, alpha * gamma / at, alpha * delta / at


def qpoly_duality(kind: str, n: int, m: int, params: Iterable[complex], q: complex) -> tuple[complex, complex]:
    """Both sides of a duality between degree and lattice argument."""
    p = tuple(complex(x) for x in params)
    q = complex(q)
    if kind == "AW":
        a, b, c, d = p
        if a == 0:
            raise SeriesError("alpha must be nonzero")
        da = askey_wilson_dual_params(a, b, c, d, q)
        lhs = qpoly_eval(QPolyFamily(Family.ASKEY_WILSON, p, q), n, 1 / (a * q**m))
        rhs = qpoly_eval(QPolyFamily(Family.ASKEY_WILSON, da, q), m, 1 / (da[0] * q**n))
        return lhs, rhs
    if kind == "Hahn_Jacobi":
        a, b, c = p
        if a == 0 or b == 0:
            raise SeriesError("alpha and beta must be nonzero")
        lhs = qpoly_eval(QPolyFamily(Family.CONT_DUAL_Q_HAHN, p, q), n, 1 / (a * q**m))
        rhs = qpoly_eval(QPolyFamily(Family.BIG_Q_JACOBI, (a * b / q, a / b, a * c / q), q), m, q ** (-n))
        return lhs, rhs
    if kind == "Chihara_LittleJacobi":
        a, b = p
        if a == 0 or b == 0:
            raise SeriesError("alpha and beta must be nonzero")
        lhs = qpoly_eval(QPolyFamily(Family.AL_SALAM_CHIHARA, p, q), n, 1 / (a * q**m))
        rhs = qpoly_eval(QPolyFamily(Family.LITTLE_Q_JACOBI_Y, (a * b / q, a / b), q), m, q ** (-n))
        return lhs, rhs
    raise ValueError(f"unknown duality {kind!r}")


def near_root_of_unity(q: complex, max_order: int, margin: float) -> int | None:
    """Smallest order k <= max_order with |q^k - 1| < margin, if any."""
    p = 1.0 + 0j
    for k in range(1, max_order + 1):
        p *= q
        if abs(p - 1.0) < margin:
            return k
    return None
