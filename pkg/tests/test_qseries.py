import cmath

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypgeo.qseries import (
    ARITY,
    LAURENT,
    DivergenceError,
    Family,
    QPolyFamily,
    SeriesError,
    al_salam_chihara_2phi1,
    big_q_laguerre_2phi1,
    little_q_jacobi_3phi2,
    near_root_of_unity,
    qhyper,
    qpoch,
    qpoly_duality,
    qpoly_eval,
    terminating_degree,
)

params01 = st.floats(0.05, 0.95)
qs = st.floats(0.15, 0.85)
moduli = st.floats(0.5, 2.0)
angles = st.floats(0.0, 6.283)


def test_qpoch_basics():
    assert qpoch(0.3, 0.5, 0) == 1
    assert qpoch(0.3, 0.5, 3) == pytest.approx((1 - 0.3) * (1 - 0.15) * (1 - 0.075))
    assert qpoch([0.3, 0.2], 0.5, 2) == pytest.approx(qpoch(0.3, 0.5, 2) * qpoch(0.2, 0.5, 2))
    with pytest.raises(ValueError):
        qpoch(0.3, 0.5, -1)


@pytest.mark.parametrize("a,q,n", [(0.3 + 0.2j, 0.6, 7), (2.0, 0.4j, 5), (-1.5, cmath.exp(0.7j), 6)])
def test_qpoch_against_mpmath(a, q, n):
    assert qpoch(a, q, n) == pytest.approx(complex(mpmath.qp(a, q, n)), rel=1e-13)


@pytest.mark.parametrize(
    "num,den,q,z",
    [
        ([0.3, 0.5], [0.7], 0.4, 0.6),
        ([0.2 + 0.1j, -0.4, 0.8], [0.3, 0.6j], 0.5, 0.3 - 0.2j),
        ([0.25], [0.5, 0.6], 0.3, 1.7),
    ],
)
def test_qhyper_against_mpmath(num, den, q, z):
    ref = complex(mpmath.qhyper(num, den, q, z))
    assert qhyper(num, den, q, z) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 8), b=params01, c=params01, q=qs)
def test_q_chu_vandermonde(n, b, c, q):
    # terminating sums at small q cancel by up to ~1e26 here (q = 0.15, n = 8),
    # so run the identity at 60 digits
    with mpmath.workdps(60):
        b, c, q = mpmath.mpf(b), mpmath.mpf(c), mpmath.mpf(q)
        lhs = qhyper([q ** (-n), b], [c], q, q)
        rhs = qpoch(c / b, q, n) / qpoch(c, q, n) * b**n
        assert abs(lhs - rhs) <= mpmath.mpf(10) ** -25 * max(1, abs(rhs))


def test_q_binomial_theorem():
    a, q, z = 0.4, 0.5, 0.3
    ref = complex(mpmath.qp(a * z, q) / mpmath.qp(z, q))
    assert qhyper([a], [], q, z) == pytest.approx(ref, rel=1e-13)


def test_divergence_is_reported():
    with pytest.raises(DivergenceError):
        qhyper([0.3, 0.5], [0.7], 0.4, 1.5)
    with pytest.raises(DivergenceError):
        qhyper([0.3, 0.5, 0.1], [0.7], 0.4, 0.2)


def test_terminating_degree():
    q = 0.37
    assert terminating_degree(q**-4, q) == 4
    assert terminating_degree(0.5, q) is None


def _family(fam, draw_p, q):
    return QPolyFamily(fam, draw_p[: ARITY[fam]], q)


@pytest.mark.parametrize("fam", list(Family))
@settings(max_examples=25, deadline=None)
@given(p=st.lists(params01, min_size=4, max_size=4), q=qs, r=moduli, t=angles, n=st.integers(0, 6))
def test_series_matches_recurrence(fam, p, q, r, t, n):
    F = _family(fam, p, q)
    z = cmath.rect(r, t)
    a = qpoly_eval(F, n, z, "series")
    b = qpoly_eval(F, n, z, "recurrence")
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


@pytest.mark.parametrize("fam", list(Family))
def test_degree_zero_is_one(fam):
    F = QPolyFamily(fam, [0.3, 0.4, 0.2, 0.6][: ARITY[fam]], 0.5)
    assert qpoly_eval(F, 0, 0.7 + 0.2j) == pytest.approx(1.0)


def test_continuous_q_hermite_low_degrees():
    q, z = 0.45, 0.8 + 0.3j
    F = QPolyFamily(Family.CONT_Q_HERMITE, (), q)
    assert qpoly_eval(F, 1, z) == pytest.approx(z + 1 / z)
    assert qpoly_eval(F, 2, z) == pytest.approx(z**2 + (1 + q) + z**-2)


def test_laurent_families_are_symmetric():
    for fam in LAURENT:
        F = QPolyFamily(fam, [0.3, 0.4, 0.2, 0.6][: ARITY[fam]], 0.55)
        z = 0.9 + 0.4j
        assert qpoly_eval(F, 3, z) == pytest.approx(qpoly_eval(F, 3, 1 / z), rel=1e-11)


def test_small_q_uses_extended_precision():
    F = QPolyFamily(Family.ASKEY_WILSON, (0.3, 0.4, 0.2, 0.6), 0.05)
    a = qpoly_eval(F, 6, 1.3 + 0.4j, "series")
    b = qpoly_eval(F, 6, 1.3 + 0.4j, "recurrence")
    assert abs(a - b) <= 1e-9 * max(1, abs(a))


@settings(max_examples=30, deadline=None)
@given(a=params01, b=params01, q=qs, r=moduli, t=angles, n=st.integers(0, 6))
def test_alternative_series_forms(a, b, q, r, t, n):
    z = cmath.rect(r, t)
    S = qpoly_eval(QPolyFamily(Family.AL_SALAM_CHIHARA, (a, b), q), n, z)
    L = qpoly_eval(QPolyFamily(Family.BIG_Q_LAGUERRE, (a, b), q), n, z)
    p = qpoly_eval(QPolyFamily(Family.LITTLE_Q_JACOBI_P, (a, b), q), n, z)
    # the second forms have large prefactors against small sums; evaluate them at 40 digits
    with mpmath.workdps(40):
        am, bm, qm, zm = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(q), mpmath.mpc(z)
        alt = [
            complex(al_salam_chihara_2phi1(zm, am, bm, qm, n)),
            complex(big_q_laguerre_2phi1(zm, am, bm, qm, n)),
            complex(little_q_jacobi_3phi2(zm, am, bm, qm, n)),
        ]
    for got, ref in zip(alt, (S, L, p)):
        assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("kind,k", [("AW", 4), ("Hahn_Jacobi", 3), ("Chihara_LittleJacobi", 2)])
@settings(max_examples=15, deadline=None)
@given(p=st.lists(params01, min_size=4, max_size=4), q=st.floats(0.3, 0.7), n=st.integers(0, 5), m=st.integers(0, 5))
def test_dualities(kind, k, p, q, n, m):
    lhs, rhs = qpoly_duality(kind, n, m, p[:k], q)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_unit_circle_q():
    q = cmath.exp(2j * cmath.pi * 0.71)
    F = QPolyFamily(Family.CONT_DUAL_Q_HAHN, (0.3, 0.5j, -0.2), q)
    a = qpoly_eval(F, 4, 1.1 + 0.2j, "series")
    assert a == pytest.approx(qpoly_eval(F, 4, 1.1 + 0.2j, "recurrence"), rel=1e-9)


def test_near_root_of_unity():
    assert near_root_of_unity(cmath.exp(2j * cmath.pi / 3), 10, 1e-9) == 3
    assert near_root_of_unity(cmath.exp(2j * cmath.pi * 0.71), 10, 1e-3) is None


def test_bad_inputs():
    with pytest.raises(ValueError):
        QPolyFamily(Family.ASKEY_WILSON, (0.1, 0.2), 0.5)
    F = QPolyFamily(Family.CONT_Q_HERMITE, (), 0.5)
    with pytest.raises(ValueError):
        qpoly_eval(F, 2, 0)
    with pytest.raises(ValueError):
        qpoly_eval(F, -1, 0.5)
    with pytest.raises(ValueError):
        qpoly_eval(F, 2, 0.5, "other")
    with pytest.raises(SeriesError):
        qpoly_duality("Hahn_Jacobi", 1, 1, (0.0, 0.2, 0.3), 0.5)
    with pytest.raises(ValueError):
        qpoly_duality("nope", 1, 1, (), 0.5)
