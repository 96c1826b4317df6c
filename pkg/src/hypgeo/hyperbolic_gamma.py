"""Double sine function s_b(z).

In the strip |Im z| < Q/2 the function is given by

    s_b(z) = exp(i * int_0^inf dy/y (sin(2yz) / (2 sinh(y/b) sinh(by)) - z/y)),

and it is continued to the whole plane with the shift equation
s_b(z) = 2 cosh(pi beta (z - i beta/2)) s_b(z - i beta), beta in {b, 1/b}.

Evaluation in the strip splits the y integral at a small point a.  On [0, a]
the integrand is summed as a power series in y^2, which removes the
cancellation at y = 0.  Beyond a the sine is split into its two exponentials
and each piece is integrated along a ray rotated into the half plane where it
decays without oscillating.  The -z/y^2 piece is integrated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    pass


class AccuracyError(RuntimeError):
    pass


class PoleError(ZeroDivisionError):
    def __init__(self, z: complex, multiplicity: int):
        super().__init__(f"s_b has a pole of order {multiplicity} at z = {z}")
        self.z = z
        self.multiplicity = multiplicity


@dataclass(frozen=True)
class BContext:
    """Coupling b > 0 with Q = b + 1/b and q = exp(2 i pi b^2)."""

    b: float
    root_of_unity_margin: float = 1e-6
    Q: float = field(init=False)
    q: complex = field(init=False)

    def __post_init__(self):
        b = float(self.b)
        if not (b > 0.0 and math.isfinite(b)):
            raise DomainError(f"b must be a positive real, got {self.b!r}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "Q", b + 1.0 / b)
        phase = TWO_PI * b * b
        object.__setattr__(self, "q", complex(math.cos(phase), math.sin(phase)))

    def inverse(self) -> "BContext":
        return BContext(1.0 / self.b, self.root_of_unity_margin)

    @property
    def big_step(self) -> float:
        return max(self.b, 1.0 / self.b)

    @property
    def small_step(self) -> float:
        return min(self.b, 1.0 / self.b)


@dataclass(frozen=True)
class PointClassification:
    kind: Literal["regular", "zero", "pole"]
    multiplicity: int
    nearest_lattice_distance: float


@dataclass(frozen=True)
class PoleLattice:
    """Points base +/- i(m b + l/b), m, l >= 0."""

    base: complex
    direction: Literal["up", "down"]
    kind: Literal["pole", "zero"] = "pole"

    def points(self, b: float, height: float) -> list[tuple[complex, int, int]]:
        """Lattice points within vertical distance `height` of the base."""
        sign = 1.0 if self.direction == "up" else -1.0
        out = []
        for m in range(int(height / b) + 1):
            for l in range(int((height - m * b) * b) + 1):
                out.append((self.base + sign * 1j * (m * b + l / b), m, l))
        return out

    def multiplicity(self, z: complex, b: float, tol: float = 1e-8) -> int:
        d = z - self.base
        if abs(d.real) > tol:
            return 0
        h = d.imag if self.direction == "up" else -d.imag
        if h < -tol:
            return 0
        return sum(1 for p, _, _ in self.points(b, h + tol) if abs(p - z) <= tol)


# ---------------------------------------------------------------------------
# strip evaluation

_SERIES_TERMS = 20


@lru_cache(maxsize=64)
def _series_tables(b: float):
    """Coefficients of 1/D(u) with D(y^2) = sinh(by) sinh(y/b) / y^2."""
    K = _SERIES_TERMS
    fact = [math.factorial(2 * j + 1) for j in range(K)]
    s1 = np.array([b ** (2 * j) * b / fact[j] for j in range(K)])
    s2 = np.array([b ** (-2 * j) / b / fact[j] for j in range(K)])
    d = np.convolve(s1, s2)[:K]
    inv = np.zeros(K)
    inv[0] = 1.0 / d[0]
    for k in range(1, K):
        inv[k] = -np.dot(d[1 : k + 1], inv[k - 1 :: -1][:k]) / d[0]
    toeplitz = np.zeros((K, K))
    for i in range(K):
        toeplitz[i, i:] = inv[: K - i]
    # N(u) = sin(2yz)/(2y) = z sum_k (-1)^k (2z)^(2k) u^k / (2k+1)!
    ncoef = np.array([(-1) ** k / fact[k] for k in range(K)])
    return toeplitz, ncoef


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


# nodes in the scaled ray variable tau = |w| t, where the integrand behaves
# like exp(-tau) times slowly varying factors
_RAY_EDGES = (0.0, 0.5, 1.5, 3.5, 7.5, 15.5, 27.0, 45.0)
_RAY_NODES = _gauss_panels(_RAY_EDGES, 16)
_RAY_NODES_COARSE = _gauss_panels(_RAY_EDGES, 11)
# slow decay stretches y = tau / rate until the poles at i pi k / max(b, 1/b)
# sit close to the first panels; those points get a refined rule
_RAY_EDGES_DENSE = (0.0, 0.25, 0.5, 1.0, 1.5, 2.5, 3.5, 5.5, 7.5, 11.0, 15.5, 21.0, 27.0, 35.0, 45.0)
_RAY_NODES_DENSE = _gauss_panels(_RAY_EDGES_DENSE, 24)
_DENSE_FOR = {id(_RAY_NODES): _RAY_NODES_DENSE, id(_RAY_NODES_COARSE): _gauss_panels(_RAY_EDGES_DENSE, 17)}
_DENSE_BELOW = 3.0  # rate * pi / max(b, 1/b)
_MAX_RAY_ANGLE = math.radians(75.0)


def _ray_sum(w, a, b, scale, nodes):
    tau, wt = nodes
    y = a[:, None] + tau[None, :] * scale[:, None]
    ex = np.exp(w[:, None] * y)
    den = (1.0 - np.exp(-2.0 * b * y)) * (1.0 - np.exp(-2.0 * y / b))
    f = ex * 4.0 / (4j * y * den)
    return (f @ wt) * scale


def _ray_integral(z, a, b, Q, sign, nodes):
    """int_a^inf e^{sign 2iyz} / (4 i y sinh(by) sinh(y/b)) dy along a ray."""
    w = sign * 2j * z - Q
    # rotate so that w * direction is (asymptotically) real negative
    phi = np.clip(np.angle(-w), -_MAX_RAY_ANGLE, _MAX_RAY_ANGLE)
    d = np.exp(-1j * phi)
    rate = np.maximum(-(w * d).real, 1e-3)
    scale = d / rate
    out = _ray_sum(w, a, b, scale, nodes)
    slow = rate * math.pi / max(b, 1.0 / b) < _DENSE_BELOW
    dense = _DENSE_FOR.get(id(nodes))
    if dense is not None and np.any(slow):
        out[slow] = _ray_sum(w[slow], a[slow], b, scale[slow], dense)
    return out


def _log_sb_strip_nonneg(z, b, nodes=_RAY_NODES):
    """Exponent of s_b for arrays with Re z >= 0 inside the strip."""
    Q = b + 1.0 / b
    a = np.minimum(0.35 * min(b, 1.0 / b), 1.0 / (1.0 + np.abs(z)))
    toeplitz, ncoef = _series_tables(b)
    K = _SERIES_TERMS
    z2 = (2.0 * z) ** 2
    powers = np.cumprod(np.concatenate([np.ones((z.size, 1)), np.repeat(z2[:, None], K - 1, axis=1)], axis=1), axis=1)
    N = z[:, None] * powers * ncoef[None, :]
    E = N @ toeplitz
    u = a * a
    k = np.arange(1, K)
    upow = u[:, None] ** (k - 1)
    series = np.sum(E[:, 1:] * upow * a[:, None] / (2 * k - 1), axis=1)
    plus = _ray_integral(z, a, b, Q, 1.0, nodes)
    minus = _ray_integral(z, a, b, Q, -1.0, nodes)
    return 1j * (series - z / a + plus - minus)


def asymptote(z, ctx: BContext):
    """Leading behaviour: +/- ln s_b(z) ~ -i pi z^2/2 - i pi (b^2 + b^-2)/24."""
    z = np.asarray(z, dtype=complex)
    b = ctx.b
    lead = -1j * math.pi * z * z / 2.0 - 1j * math.pi * (b * b + 1.0 / (b * b)) / 24.0
    return np.where(z.real >= 0, lead, -lead)


def asymptote_threshold(ctx: BContext) -> float:
    """|Re z| beyond which the asymptote is exact to double precision."""
    return 6.5 * ctx.big_step + 1.0


def _log_sb_reduced(z, b, nodes=_RAY_NODES):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flip = z.real < 0
    zz = np.where(flip, -z, z)
    thr = 6.5 * max(b, 1.0 / b) + 1.0
    far = zz.real > thr
    if np.any(far):
        zf = zz[far]
        out[far] = -1j * math.pi * zf * zf / 2.0 - 1j * math.pi * (b * b + 1.0 / (b * b)) / 24.0
    near = ~far
    if np.any(near):
        out[near] = _log_sb_strip_nonneg(zz[near].ravel(), b, nodes).reshape(zz[near].shape)
    return np.where(flip, -out, out)


def log2cosh(w):
    """log(2 cosh w), stable for large |Re w|."""
    w = np.asarray(w, dtype=complex)
    s = np.where(w.real >= 0, w, -w)
    with np.errstate(divide="ignore"):
        return s + np.log1p(np.exp(-2.0 * s))


def _shift_down(z, beta, acc):
    """Move Im z to within beta/2 of 0 by steps of i beta, adding the cosh factors to acc."""
    k = np.rint(z.imag / beta).astype(int)
    kmax = int(np.max(np.abs(k))) if z.size else 0
    for j in range(kmax):
        down = k > j
        if np.any(down):
            acc[down] += log2cosh(math.pi * beta * (z[down] - 1j * j * beta - 0.5j * beta))
        up = k < -j
        if np.any(up):
            acc[up] -= log2cosh(math.pi * beta * (z[up] + 1j * (j + 1) * beta - 0.5j * beta))
    return z - 1j * k * beta


def log_sb(z, ctx: BContext):
    """Vectorised ln s_b(z) on any branch; -inf real part at zeros.

    No pole checks are made; callers must keep z off the pole lattice.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    acc = np.zeros(z.shape, dtype=complex)
    # big steps first, then small ones, leaving |Im z| <= min(b, 1/b) / 2
    red = _shift_down(z, ctx.big_step, acc)
    red = _shift_down(red, ctx.small_step, acc)
    return (acc + _log_sb_reduced(red, ctx.b)).reshape(shape)


# ---------------------------------------------------------------------------
# public scalar interface


def _check_tol(tol: float):
    if not tol > 0:
        raise DomainError("tol must be positive")


def sb_strip(z: complex, ctx: BContext, tol: float = 1e-13) -> complex:
    """s_b(z) from the integral representation, for |Im z| < Q/2 - margin."""
    _check_tol(tol)
    z = complex(z)
    margin = 10.0 * math.sqrt(tol) * ctx.Q
    if abs(z.imag) >= ctx.Q / 2 - margin:
        raise DomainError(f"|Im z| = {abs(z.imag)} is outside the strip |Im z| < {ctx.Q / 2 - margin}")
    zz = z if z.real >= 0 else -z
    fine = complex(_log_sb_strip_nonneg(np.array([zz]), ctx.b)[0])
    coarse = complex(_log_sb_strip_nonneg(np.array([zz]), ctx.b, _RAY_NODES_COARSE)[0])
    if abs(fine - coarse) > max(tol, 1e-12) * 1e3:
        raise AccuracyError(f"strip quadrature did not settle at z = {z}: {abs(fine - coarse):.2e}")
    val = fine if z.real >= 0 else -fine
    return complex(np.exp(val))


def sb_classify(z: complex, ctx: BContext, collision_tol: float | None = None) -> PointClassification:
    """Zero/pole classification of z against the lattices +/- (iQ/2 + imb + il/b)."""
    if collision_tol is None:
        collision_tol = 1e-8 * ctx.Q
    if not collision_tol > 0:
        raise DomainError("collision_tol must be positive")
    z = complex(z)
    b = ctx.b
    best = math.inf
    for kind, base, sign in (("zero", 0.5j * ctx.Q, 1.0), ("pole", -0.5j * ctx.Q, -1.0)):
        h = sign * (z - base).imag
        mult = 0
        hmax = max(h, 0.0) + 1.0
        for m in range(int(hmax / b) + 2):
            for l in range(int(max(hmax - m * b, 0.0) * b) + 2):
                p = base + sign * 1j * (m * b + l / b)
                dist = abs(p - z)
                best = min(best, dist)
                if dist <= collision_tol:
                    mult += 1
        if mult:
            return PointClassification(kind, mult, best)
    return PointClassification("regular", 0, best)


def log_sb_scalar(z: complex, ctx: BContext) -> complex:
    return complex(log_sb(np.array([complex(z)]), ctx)[0])


def sb(z: complex, ctx: BContext, tol: float = 1e-13, collision_tol: float | None = None) -> complex:
    """s_b(z) anywhere in the plane.

    Raises PoleError on the pole lattice and returns 0 on the zero lattice.
    """
    _check_tol(tol)
    cls = sb_classify(z, ctx, collision_tol)
    if cls.kind == "pole":
        raise PoleError(complex(z), cls.multiplicity)
    if cls.kind == "zero":
        return 0j
    val = log_sb_scalar(z, ctx)
    if val.real > 709.0:
        raise OverflowError(f"|s_b(z)| = exp({val.real:.1f}) overflows; use log_sb")
    return complex(np.exp(val))


def _pochhammer(a: complex, q: complex, m: int) -> complex:
    out = 1.0 + 0j
    for k in range(m):
        out *= 1.0 - a * q**k
    return out


def sb_shift_ratio(x: complex, m: int, branch: Literal["b", "b_inverse"], ctx: BContext) -> complex:
    """s_b(x + i m beta) / s_b(x) for beta = b or 1/b, as a finite product."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    beta = ctx.b if branch == "b" else 1.0 / ctx.b
    x = complex(x)
    pref = np.exp(-math.pi * beta * m * (2.0 * x + 1j * beta * m) / 2.0)
    a = -np.exp(1j * math.pi * beta * beta) * np.exp(TWO_PI * beta * x)
    qq = np.exp(2j * math.pi * beta * beta)
    return complex(pref * _pochhammer(a, qq, m))


def lattice_shift_ratio(x: complex, m: int, l: int, ctx: BContext) -> complex:
    """s_b(x + i m b + i l/b) / s_b(x)."""
    return sb_shift_ratio(x, m, "b", ctx) * sb_shift_ratio(x + 1j * m * ctx.b, l, "b_inverse", ctx)


def sb_pole_residue(m: int, l: int, ctx: BContext) -> complex:
    """Residue of s_b at the simple pole -iQ/2 - imb - il/b."""
    p = -0.5j * ctx.Q - 1j * (m * ctx.b + l / ctx.b)
    return (0.5j / math.pi) / lattice_shift_ratio(p, m, l, ctx)


def sb_leading(u0: complex, ctx: BContext, tol: float = 1e-9) -> tuple[complex, int]:
    """Leading Laurent term of s_b at u0: s_b(u0 + d) = C d^k + ...

    Returns (C, k) with k = 1 at simple zeros, -1 at simple poles, 0 at
    regular points (where C = s_b(u0)).
    """
    cls = sb_classify(u0, ctx, tol)
    if cls.kind == "regular":
        return sb(u0, ctx), 0
    if cls.multiplicity != 1:
        raise DomainError(f"lattice point {u0} has multiplicity {cls.multiplicity}; b^2 is too close to rational")
    m, l = _lattice_indices(u0, ctx, cls.kind, tol)
    r = sb_pole_residue(m, l, ctx)
    if cls.kind == "pole":
        return r, -1
    # s_b(z0 + d) = 1 / s_b(-z0 - d) and -z0 is the pole (m, l)
    return -1.0 / r, 1


def _lattice_indices(u0: complex, ctx: BContext, kind: str, tol: float) -> tuple[int, int]:
    b = ctx.b
    h = u0.imag - 0.5 * ctx.Q if kind == "zero" else -u0.imag - 0.5 * ctx.Q
    for m in range(int(h / b + 1e-9) + 1):
        l = round((h - m * b) * b)
        if l >= 0 and abs(m * b + l / b - h) <= tol:
            return m, l
    raise DomainError(f"{u0} is not on the {kind} lattice")
