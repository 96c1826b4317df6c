import cmath
import math

import numpy as np
import pytest
from scipy.special import wofz

from hypgeo.contour_engine import (
    ContourError,
    ContourSpec,
    Loop,
    PinchError,
    QuadratureConfig,
    TailModel,
    TailRule,
    auto_contour,
    choose_tail_direction,
    integrate_contour,
    path_height,
    validate_contour,
)
from hypgeo.hyperbolic_gamma import BContext, PoleLattice

SQRT_PI = math.sqrt(math.pi)


def gauss(x):
    return np.exp(-x * x)


@pytest.mark.parametrize("height", [0.0, 0.7, -1.3])
def test_gaussian_is_shift_invariant(height):
    c = ContourSpec((complex(-4, height), complex(4, height)), height, height, 4.0)
    val, err = integrate_contour(gauss, c)
    assert abs(val - SQRT_PI) < 1e-10
    assert err < 1e-8


def test_gaussian_with_analytic_tails_and_log_form():
    c = ContourSpec((-2 + 0.3j, 0.5 + 0.1j, 2 + 0.3j), 0.3, 0.3, 2.0)
    tails = (TailModel(-1, 0), TailModel(-1, 0))
    val, _ = integrate_contour(lambda x: -x * x, c, log=True, tails=tails)
    assert abs(val - SQRT_PI) < 1e-10


def test_fresnel_along_tilted_tails():
    model = TailModel(1j, 0)
    right = choose_tail_direction(model, 3.0, +1)
    left = choose_tail_direction(model, -3.0, -1)
    assert (model.c2 * right * right).real < 0 and (model.c2 * left * left).real < 0
    c = ContourSpec((-3 + 0j, 3 + 0j), 0.0, 0.0, 3.0, left_dir=left, right_dir=right)
    val, _ = integrate_contour(lambda x: 1j * x * x, c, log=True, tails=(model, model))
    assert abs(val - SQRT_PI * cmath.exp(0.25j * math.pi)) < 1e-10


def test_loop_picks_up_residue():
    p = 0.3 + 0.2j
    ref = 1j * math.pi * wofz(p)  # path below the pole

    def f(x):
        return np.exp(-x * x) / (x - p)

    below = ContourSpec((-5 + 0j, 5 + 0j), 0.0, 0.0, 5.0)
    v0, _ = integrate_contour(f, below, singularities=[p])
    assert abs(v0 - ref) < 1e-10
    above = ContourSpec((-5 + 0.5j, 5 + 0.5j), 0.5, 0.5, 5.0, loops=(Loop(p, 0.1, 1),))
    v1, _ = integrate_contour(f, above, singularities=[p])
    assert abs(v1 - ref) < 1e-10


def test_auto_contour_separates_lattices():
    ctx = BContext(0.84)
    up = [PoleLattice(0.3 + 0.2j, "up"), PoleLattice(-1.0 + 0.1j, "up")]
    down = [PoleLattice(0.5 - 0.3j, "down")]
    c = auto_contour(up, down, None, ctx)
    validate_contour(c, up, down, ctx)
    assert -0.3 < path_height(c, 0.5) < 0.2


def test_validate_contour_rejects_wrong_side():
    ctx = BContext(0.84)
    up = [PoleLattice(0.0 - 0.2j, "up")]
    c = ContourSpec((-3 + 0j, 3 + 0j), 0.0, 0.0, 3.0)
    with pytest.raises(ContourError):
        validate_contour(c, up, [], ctx)


def test_pinch_is_detected():
    ctx = BContext(0.84)
    up = [PoleLattice(0.2 + 0j, "up")]
    down = [PoleLattice(0.2 + 0j, "down")]
    with pytest.raises(PinchError):
        auto_contour(up, down, None, ctx)


def test_tail_rule_strip():
    ctx = BContext(0.84)
    c = auto_contour([PoleLattice(0.2j, "up")], [PoleLattice(-0.2j, "down")], TailRule.strip(-0.1, 0.1), ctx)
    assert -0.1 < c.left_tail_height < 0.1 and -0.1 < c.right_tail_height < 0.1


def test_bad_specs():
    with pytest.raises(ContourError):
        ContourSpec((1 + 0j, -1 + 0j), 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_panels=4)


def test_envelope_moves_contour_where_integrand_is_small():
    ctx = BContext(0.84)
    up = [PoleLattice(0j, "up")]
    down = [PoleLattice(-2.0j, "down")]
    mid = auto_contour(up, down, None, ctx)
    assert path_height(mid, 0.0) == pytest.approx(-1.0)
    # |f| grows downwards: the path should climb towards the upper lattice
    high = auto_contour(up, down, None, ctx, envelope=lambda x: -10 * np.imag(x))
    assert -0.5 < path_height(high, 0.0) < 0.0
    validate_contour(high, up, down, ctx)
    # a flat envelope gives no reason to leave the midpoint
    same = auto_contour(up, down, None, ctx, envelope=lambda x: np.zeros(np.shape(x)))
    assert path_height(same, 0.0) == pytest.approx(-1.0)
