import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypgeo.hyperbolic_gamma import (
    AccuracyError,
    BContext,
    DomainError,
    PoleError,
    asymptote,
    lattice_shift_ratio,
    log_sb,
    sb,
    sb_classify,
    sb_leading,
    sb_pole_residue,
    sb_shift_ratio,
    sb_strip,
)

# mpmath integral representation at 30 digits (tests/oracles.py)
FROZEN = [
    (0.25 + 0.1j, 0.8, 1.0896290914234743556 - 0.30185788852989774223j),
    (1.3 - 0.4j, 0.7, -0.17900706388128415107 - 0.077099240788605760635j),
    (-2.1 + 0.6j, 1.31, 48.648173731498455368 + 19.401108254687106666j),
    (0.7 + 1.2j, 1.0, 4.4686224879512377388 + 13.348802049149976976j),
    (3.5 - 0.2j, 0.84, 0.091043014379394762298 - 0.063326636957389457424j),
    (-0.4 - 1.5j, 0.84, -0.13581690904651114254 - 0.020471006907865453818j),
]

bs = st.floats(0.5, 2.0)
re_parts = st.floats(-4.0, 4.0)
frac = st.floats(-0.45, 0.45)


@pytest.mark.parametrize("z,b,ref", FROZEN)
def test_matches_mpmath_reference(z, b, ref):
    assert abs(sb(z, BContext(b)) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_known_values():
    ctx = BContext(0.84)
    assert sb(0, ctx) == pytest.approx(1.0, abs=1e-14)
    z = 0.3 + 0.1j
    assert sb(z + 1j * ctx.b, ctx) / sb(z, ctx) == pytest.approx(sb_shift_ratio(z, 1, "b", ctx), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(b=bs, x=re_parts, y=frac)
def test_inversion(b, x, y):
    ctx = BContext(b)
    z = complex(x, y * ctx.Q)
    assert abs(sb(z, ctx) * sb(-z, ctx) - 1) < 1e-10


@settings(max_examples=60, deadline=None)
@given(b=bs, x=re_parts, y=frac)
def test_modular_symmetry(b, x, y):
    ctx = BContext(b)
    z = complex(x, y * ctx.Q)
    assert sb(z, ctx) == pytest.approx(sb(z, ctx.inverse()), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(b=bs, x=re_parts, y=st.floats(-0.2, 0.2), inverse=st.booleans())
def test_shift_equations(b, x, y, inverse):
    ctx = BContext(b)
    beta = 1 / b if inverse else b
    z = complex(x, y)
    ratio = sb(z + 0.5j * beta, ctx) / sb(z - 0.5j * beta, ctx)
    assert ratio == pytest.approx(2 * cmath.cosh(math.pi * beta * z), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(b=bs, x=st.floats(-2, 2), y=frac, m=st.integers(0, 4), l=st.integers(0, 3))
def test_lattice_shift_ratio_is_a_ratio(b, x, y, m, l):
    ctx = BContext(b)
    z = complex(x, y * ctx.Q)
    w = z + 1j * (m * ctx.b + l / ctx.b)
    if sb_classify(w, ctx, 1e-6).kind != "regular":
        return
    assert lattice_shift_ratio(z, m, l, ctx) == pytest.approx(sb(w, ctx) / sb(z, ctx), rel=1e-9)


def test_vectorized_log_matches_scalar():
    ctx = BContext(1.31)
    zs = np.array([0.1 + 0.2j, -3.0 + 0.5j, 5.5 - 0.3j, 12.0 + 0.1j])
    v = log_sb(zs, ctx)
    for z, lv in zip(zs, v):
        assert cmath.exp(lv) == pytest.approx(sb(complex(z), ctx), rel=1e-12)


@pytest.mark.parametrize("b", [0.7, 1.0, 1.31])
@pytest.mark.parametrize("d", [1, 1j, -1, -1j])
def test_residue_at_first_pole(b, d):
    ctx = BContext(b)
    z0 = -0.5j * ctx.Q
    eps = 1e-7
    val = eps * d * sb(z0 + eps * d, ctx, collision_tol=1e-12)
    assert val == pytest.approx(0.5j / math.pi, rel=1e-6)
    assert sb_pole_residue(0, 0, ctx) == pytest.approx(0.5j / math.pi, rel=1e-14)


def test_higher_pole_residue():
    ctx = BContext(0.84)
    p = -0.5j * ctx.Q - 1j * ctx.b - 2j / ctx.b
    eps = 1e-7
    assert eps * sb(p + eps, ctx, collision_tol=1e-12) == pytest.approx(sb_pole_residue(1, 2, ctx), rel=1e-5)


@pytest.mark.parametrize("b", [0.7, 1.31])
@pytest.mark.parametrize("side", [1, -1])
def test_asymptotics(b, side):
    ctx = BContext(b)
    for y in (-0.3, 0.0, 0.2):
        z = complex(6 * side, y * ctx.Q)
        assert sb(z, ctx) == pytest.approx(cmath.exp(complex(asymptote(z, ctx))), rel=1e-6)


def test_pole_and_zero_classification():
    ctx = BContext(0.84)
    assert sb_classify(-0.5j * ctx.Q, ctx).kind == "pole"
    assert sb_classify(0.5j * ctx.Q + 1j * ctx.b, ctx).kind == "zero"
    assert sb_classify(0.3, ctx).kind == "regular"
    with pytest.raises(PoleError):
        sb(-0.5j * ctx.Q, ctx)
    assert sb(0.5j * ctx.Q, ctx) == 0


def test_double_pole_when_lattices_meet():
    ctx = BContext(1.0)  # b = 1/b so -iQ/2 - ib and -iQ/2 - i/b coincide
    c = sb_classify(-0.5j * ctx.Q - 1j, ctx)
    assert (c.kind, c.multiplicity) == ("pole", 2)
    with pytest.raises(DomainError):
        sb_leading(-0.5j * ctx.Q - 1j, ctx)


def test_strip_evaluator_rejects_outside_strip():
    ctx = BContext(0.84)
    with pytest.raises(DomainError):
        sb_strip(1j * ctx.Q, ctx)
    assert sb_strip(0.2 + 0.3j, ctx) == pytest.approx(sb(0.2 + 0.3j, ctx), rel=1e-12)


@pytest.mark.parametrize("b", [0.3, 2.0, 3.0])
def test_strip_evaluator_near_edge(b):
    ctx = BContext(b)
    z = 0.3 + 0.45j * ctx.Q
    try:
        v = sb_strip(z, ctx)
    except AccuracyError:
        pytest.fail("strip rule did not settle")
    assert v == pytest.approx(sb(z, ctx), rel=1e-11)


def test_bad_inputs():
    with pytest.raises(DomainError):
        BContext(-1.0)
    with pytest.raises(DomainError):
        BContext(float("nan"))
    with pytest.raises(DomainError):
        sb(0.1, BContext(0.84), tol=0.0)
    with pytest.raises(DomainError):
        sb_shift_ratio(0.1, -1, "b", BContext(0.84))
