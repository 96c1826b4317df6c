"""Contours from -inf to +inf through pole lattices, and quadrature along them.

A contour is a horizontal base line inside a window, optional straight end
segments (possibly tilted) and tails that run off to infinity along fixed
directions.  Lattice points that sit on the wrong side of the base line are
handled by small loops around them, which is the same as routing the path
around the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.special import erfcx

from .hyperbolic_gamma import BContext, PoleLattice

__all__ = [
    "ContourError",
    "PinchError",
    "QuadratureError",
    "Loop",
    "TailModel",
    "TailRule",
    "ContourSpec",
    "QuadratureConfig",
    "auto_contour",
    "validate_contour",
    "integrate_contour",
    "choose_tail_direction",
    "path_height",
]


class ContourError(ValueError):
    pass


class PinchError(ContourError):
    """An up-lattice point and a down-lattice point (nearly) coincide."""

    def __init__(self, up_point: complex, down_point: complex, up_base: complex, down_base: complex):
        self.up_point = up_point
        self.down_point = down_point
        self.up_base = up_base
        self.down_base = down_base
        super().__init__(
            f"contour pinched between up point {up_point:.6g} (base {up_base:.6g}) "
            f"and down point {down_point:.6g} (base {down_base:.6g})"
        )


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Loop:
    center: complex
    radius: float
    orientation: int  # +1 counterclockwise, -1 clockwise


@dataclass(frozen=True)
class TailModel:
    """log f(x) ~ c2 x^2 + c1 x + c0 as Re x -> +/-inf."""

    c2: complex
    c1: complex
    c0: complex = 0j

    def __call__(self, x):
        return (self.c2 * x + self.c1) * x + self.c0


@dataclass(frozen=True)
class TailRule:
    kind: Literal["strip", "right_tail_below", "right_tail_above", "none"] = "none"
    lo: float = -math.inf
    hi: float = math.inf

    @classmethod
    def strip(cls, lo: float, hi: float) -> "TailRule":
        return cls("strip", lo, hi)

    @classmethod
    def right_tail_below(cls, h: float) -> "TailRule":
        return cls("right_tail_below", -math.inf, h)

    @classmethod
    def right_tail_above(cls, h: float) -> "TailRule":
        return cls("right_tail_above", h, math.inf)


@dataclass(frozen=True)
class ContourSpec:
    waypoints: tuple[complex, ...]
    left_tail_height: float
    right_tail_height: float
    window: float
    left_dir: complex = -1.0 + 0j
    right_dir: complex = 1.0 + 0j
    loops: tuple[Loop, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        re = [w.real for w in self.waypoints]
        if len(re) < 2 or any(b <= a for a, b in zip(re, re[1:])):
            raise ContourError("waypoint real parts must be strictly increasing")

    @property
    def min_height(self) -> float:
        return min(w.imag for w in self.waypoints)

    @property
    def max_height(self) -> float:
        return max(w.imag for w in self.waypoints)

    def to_dict(self) -> dict:
        return {
            "waypoints": [[w.real, w.imag] for w in self.waypoints],
            "left_tail_height": self.left_tail_height,
            "right_tail_height": self.right_tail_height,
            "left_dir": [self.left_dir.real, self.left_dir.imag],
            "right_dir": [self.right_dir.real, self.right_dir.imag],
            "window": self.window,
            "loops": [
                {"center": [lp.center.real, lp.center.imag], "radius": lp.radius, "orientation": lp.orientation}
                for lp in self.loops
            ],
        }

    @classmethod
    def horizontal(cls, height: float, window: float = 8.0, **kw) -> "ContourSpec":
        return cls((complex(-window, height), complex(window, height)), height, height, window, **kw)


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_panels: int = 20000
    oscillation_density: float = 4.0
    tail_stop: int = 3
    nodes: int = 16
    max_panel_length: float = 0.5
    loop_nodes: int = 64

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_panels < 16:
            raise ValueError("max_panels must be at least 16")


# ---------------------------------------------------------------------------
# geometry


def path_height(contour: ContourSpec, x: float) -> float:
    """Height of the (graph-like) path at real part x."""
    w = contour.waypoints
    if x <= w[0].real:
        return contour.left_tail_height if contour.left_dir == -1 else w[0].imag
    if x >= w[-1].real:
        return contour.right_tail_height if contour.right_dir == 1 else w[-1].imag
    for a, b in zip(w, w[1:]):
        if a.real <= x <= b.real:
            t = (x - a.real) / (b.real - a.real)
            return a.imag + t * (b.imag - a.imag)
    raise AssertionError("unreachable")


def _seg_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _path_distance(contour: ContourSpec, p: complex) -> float:
    w = contour.waypoints
    best = min(_seg_distance(p, a, b) for a, b in zip(w, w[1:]))
    far = 1e6
    best = min(best, _seg_distance(p, w[0], w[0] + far * contour.left_dir))
    best = min(best, _seg_distance(p, w[-1], w[-1] + far * contour.right_dir))
    return best


def _lattice_points(lat: PoleLattice, ctx: BContext, ylo: float, yhi: float) -> list[complex]:
    base = complex(lat.base)
    if lat.direction == "down":
        h = base.imag - ylo
    else:
        h = yhi - base.imag
    if h < 0:
        return []
    return [p for p, _, _ in lat.points(ctx.b, h)]


def choose_tail_direction(model: TailModel | None, x0: complex, side: int, max_angle: float = 75.0) -> complex:
    """Direction along which exp(model) decays fastest from x0 (side=+1 right, -1 left)."""
    if model is None:
        return complex(side)
    step = 4.0
    horizontal = complex(side)
    if model.c2 == 0:
        rate = (model.c1 * horizontal).real
        if rate < -0.25:
            return horizontal
    best, best_val = horizontal, math.inf
    for phi in np.linspace(-max_angle, max_angle, 151):
        d = side * complex(math.cos(math.radians(phi)), math.sin(math.radians(phi)))
        val = (model(x0 + step * d) - model(x0)).real
        if val < best_val - 1e-12:
            best, best_val = d, val
    if best_val >= 0:
        raise ContourError(f"no decaying tail direction on the {'right' if side > 0 else 'left'}")
    return best


# ---------------------------------------------------------------------------
# automatic contours


# a natural-strip line is kept unless it passes this close (in units of Q)
# to a lattice point; panels refine near singularities, loops cost more
NATURAL_CLEARANCE = 0.01
TURN_PAD = 0.75


def _rule_range(rule: TailRule) -> tuple[float, float]:
    if rule.kind == "none":
        return -math.inf, math.inf
    return rule.lo, rule.hi


def auto_contour(
    up: Sequence[PoleLattice],
    down: Sequence[PoleLattice],
    tail_rule: TailRule | None,
    ctx: BContext,
    *,
    margin: float | None = None,
    tail_models: tuple[TailModel | None, TailModel | None] = (None, None),
    reach: tuple[float, float] | None = None,
    envelope: Callable | None = None,
) -> ContourSpec:
    """Separating contour for the given pole lattices.

    `reach` gives the real parts beyond which the integrand is described by
    its tail models; end segments are extended that far along the decaying
    directions picked from `tail_models`.  `envelope(x)`, the real part of
    the log integrand, lets the height inside the natural strip be chosen
    where the integrand stays smallest, which limits cancellation.
    """
    tail_rule = tail_rule or TailRule()
    Q = ctx.Q
    margin = 1e-3 * Q if margin is None else margin

    ups = [(complex(l.base), l) for l in up]
    downs = [(complex(l.base), l) for l in down]
    re_all = [z.real for z, _ in ups + downs] or [0.0]
    # lattices are vertical rays, so each tail may turn just past the
    # outermost base on its side; turning later lets growing tails blow up
    xL, xR = min(re_all) - TURN_PAD, max(re_all) + TURN_PAD
    window = max(abs(xL), abs(xR))

    def _ends(c: float):
        # end segments out to the asymptotic reach
        wps = [complex(xL, c), complex(xR, c)]
        left_dir, right_dir = -1 + 0j, 1 + 0j
        if reach is not None:
            lreach, rreach = reach
            mL, mR = tail_models
            left_dir = choose_tail_direction(mL, wps[0], -1)
            right_dir = choose_tail_direction(mR, wps[-1], 1)
            if lreach < wps[0].real:
                t = (wps[0].real - lreach) / -left_dir.real
                wps.insert(0, wps[0] + t * left_dir)
            if rreach > wps[-1].real:
                t = (rreach - wps[-1].real) / right_dir.real
                wps.append(wps[-1] + t * right_dir)
        return wps, left_dir, right_dir

    # natural strip from base heights
    lo = max((z.imag for z, _ in downs), default=-math.inf)
    hi = min((z.imag for z, _ in ups), default=math.inf)
    if lo == -math.inf and hi == math.inf:
        lo, hi = -Q / 2, 0.0
    elif lo == -math.inf:
        lo = hi - Q
    elif hi == math.inf:
        hi = lo + Q

    ylo = min(lo, hi) - 3 * Q
    yhi = max(lo, hi) + 3 * Q
    up_pts = [(p, z) for z, l in ups for p in _lattice_points(l, ctx, ylo, yhi)]
    down_pts = [(p, z) for z, l in downs for p in _lattice_points(l, ctx, ylo, yhi)]

    for pu, zu in up_pts:
        for pd, zd in down_pts:
            if abs(pu - pd) < 2 * margin:
                raise PinchError(pu, pd, zu, zd)

    all_pts = [p for p, _ in up_pts] + [p for p, _ in down_pts]

    def clearance(c: float) -> float:
        return min((abs(p.imag - c) for p in all_pts), default=math.inf)

    notes: list[str] = []
    c = None
    rlo, rhi = _rule_range(tail_rule)
    if lo < hi:
        a, b = max(lo, rlo), min(hi, rhi)
        if a < b:
            cand = 0.5 * (a + b)
        else:
            a, b = lo, hi
            cand = 0.5 * (lo + hi)
            notes.append("tail rule not met by the natural strip; tails rerouted")
        if clearance(cand) >= NATURAL_CLEARANCE * Q:
            c = cand
            if envelope is not None:
                c = _lowest_envelope(c, a, b, clearance, NATURAL_CLEARANCE * Q, envelope, _ends)
    if c is None:
        heights = sorted({round(p.imag, 12) for p in all_pts})
        cands = [0.5 * (u + v) for u, v in zip(heights, heights[1:])]
        if lo < hi:
            cands.append(0.5 * (lo + hi))
        best = -math.inf
        for cand in cands:
            nloops = sum(1 for p, _ in down_pts if p.imag > cand) + sum(1 for p, _ in up_pts if p.imag < cand)
            score = min(clearance(cand), 0.25 * Q) - 1e-3 * nloops - 1e-4 * abs(cand - 0.5 * (lo + hi))
            if score > best:
                best, c = score, cand
        notes.append("no horizontal separating line; wrong-side points encircled")

    loops = []
    for pts, wrong, orient in ((down_pts, lambda p: p.imag > c, -1), (up_pts, lambda p: p.imag < c, 1)):
        for p, _ in pts:
            if not wrong(p):
                continue
            others = [abs(q - p) for q in all_pts if q != p]
            r = min(0.25, 0.45 * min(others, default=1.0), 0.9 * abs(p.imag - c))
            if r < margin:
                raise ContourError(f"cannot encircle lattice point {p:.6g}")
            loops.append(Loop(p, r, orient))

    wps, left_dir, right_dir = _ends(c)

    spec = ContourSpec(
        tuple(wps),
        wps[0].imag,
        wps[-1].imag,
        window,
        left_dir=left_dir,
        right_dir=right_dir,
        loops=tuple(loops),
        notes=tuple(notes),
    )
    validate_contour(spec, up, down, ctx, margin=margin)
    return spec


def _peak(wps, envelope, n: int = 64) -> float:
    t = np.linspace(0.0, 1.0, n)
    xs = np.concatenate([a + (b - a) * t for a, b in zip(wps, wps[1:])])
    with np.errstate(all="ignore"):
        v = np.asarray(envelope(xs), dtype=float)
    v = v[np.isfinite(v)]
    return float(v.max()) if v.size else math.inf


# switching away from the strip midpoint must gain at least this much in log|f|
ENVELOPE_GAIN = 2.0


def _lowest_envelope(mid, a, b, clearance, min_clear, envelope, ends) -> float:
    best, best_peak = mid, _peak(ends(mid)[0], envelope)
    base = best_peak
    for f in (0.15, 0.3, 0.7, 0.85):
        cand = a + f * (b - a)
        if clearance(cand) < min_clear:
            continue
        peak = _peak(ends(cand)[0], envelope)
        if peak < best_peak:
            best, best_peak = cand, peak
    return best if best_peak < base - ENVELOPE_GAIN else mid


def validate_contour(
    contour: ContourSpec, up: Sequence[PoleLattice], down: Sequence[PoleLattice], ctx: BContext, margin: float | None = None
) -> None:
    """Raise ContourError unless every lattice point near the path is on its proper side."""
    margin = 1e-3 * ctx.Q if margin is None else margin
    ylo = contour.min_height - 4 * ctx.Q
    yhi = contour.max_height + 4 * ctx.Q
    lo_re = contour.waypoints[0].real
    hi_re = contour.waypoints[-1].real
    for lats, sign, orient in ((up, 1, 1), (down, -1, -1)):
        for lat in lats:
            for p in _lattice_points(lat, ctx, ylo, yhi):
                if not lo_re <= p.real <= hi_re:
                    continue
                inside = [lp for lp in contour.loops if abs(p - lp.center) < lp.radius]
                if inside:
                    if len(inside) > 1 or abs(p - inside[0].center) > 1e-12 or inside[0].orientation != orient:
                        raise ContourError(f"lattice point {p:.6g} inside a foreign loop")
                    continue
                h = path_height(contour, p.real)
                if sign * (p.imag - h) <= 0:
                    raise ContourError(f"lattice point {p:.6g} on the wrong side of the path")
                if _path_distance(contour, p) < margin:
                    raise ContourError(f"lattice point {p:.6g} closer than margin to the path")
    for lp in contour.loops:
        if _path_distance(contour, lp.center) <= lp.radius:
            raise ContourError(f"loop around {lp.center:.6g} touches the path")


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=16)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _eval(f, x, log):
    v = f(x)
    if log:
        v = np.exp(v)
    return np.asarray(v, dtype=complex)


def _segment_panels(a, b, cfg, sing, phase_rate):
    """Split segment [a, b] into panels respecting pole distance and phase."""
    L = abs(b - a)
    n0 = max(1, math.ceil(L / cfg.max_panel_length))
    edges = [a + (b - a) * k / n0 for k in range(n0 + 1)]
    panels = list(zip(edges, edges[1:]))
    nodes_phase = cfg.nodes / cfg.oscillation_density
    out = []
    while panels:
        p, q = panels.pop()
        h = abs(q - p)
        split = False
        if h > 1e-6:
            if len(sing):
                d = min(_seg_distance(s, p, q) for s in sing)
                split = h > 1.5 * d
            if not split and phase_rate is not None:
                rate = float(np.max(phase_rate(np.array([p, 0.5 * (p + q), q]))))
                split = rate * h > nodes_phase
        if split:
            m = 0.5 * (p + q)
            panels += [(p, m), (m, q)]
        else:
            out.append((p, q))
        if len(out) + len(panels) > cfg.max_panels:
            raise QuadratureError("panel budget exhausted while resolving the path")
    out.sort(key=lambda pq: (pq[0] - a).real * (b - a).real + (pq[0] - a).imag * (b - a).imag)
    return out


def _gauss_pair(f, panels, cfg, log):
    """High/low order Gauss values on each panel, vectorized."""
    n_hi, n_lo = cfg.nodes, max(4, (cfg.nodes * 5) // 8)
    xh, wh = _gl(n_hi)
    xl, wl = _gl(n_lo)
    P = np.array([p for p, _ in panels])
    Qe = np.array([q for _, q in panels])
    mid = 0.5 * (P + Qe)
    half = 0.5 * (Qe - P)
    X = np.concatenate([(mid[:, None] + half[:, None] * xh[None, :]).ravel(),
                        (mid[:, None] + half[:, None] * xl[None, :]).ravel()])
    V = _eval(f, X, log)
    k = len(panels) * n_hi
    Vh = V[:k].reshape(len(panels), n_hi)
    Vl = V[k:].reshape(len(panels), n_lo)
    hi = half * (Vh @ wh)
    lo = half * (Vl @ wl)
    absint = np.abs(half) * (np.abs(Vh) @ wh)
    return hi, np.abs(hi - lo), absint


def _integrate_panels(f, panels, cfg, log, scale_hint=0.0):
    vals, errs, absv = _gauss_pair(f, panels, cfg, log)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand not finite on the path")
    panels = list(panels)
    total_len = sum(abs(q - p) for p, q in panels)
    for _ in range(60):
        S = abs(vals.sum()) + scale_hint
        A = absv.sum()
        tol = max(cfg.abs_tol, cfg.rel_tol * S, 1e-15 * A)
        lens = np.array([abs(q - p) for p, q in panels])
        bad = errs > tol * np.maximum(lens / total_len, 1e-3)
        bad &= lens > 1e-9
        if not bad.any():
            break
        if len(panels) + bad.sum() > cfg.max_panels:
            raise QuadratureError("panel budget exhausted; integrand may not decay")
        new = []
        for i in np.flatnonzero(bad):
            p, q = panels[i]
            m = 0.5 * (p + q)
            new += [(p, m), (m, q)]
        keep = ~bad
        nv, ne, na = _gauss_pair(f, new, cfg, log)
        if not np.all(np.isfinite(nv)):
            raise QuadratureError("integrand not finite on the path")
        panels = [pq for pq, k in zip(panels, keep) if k] + new
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        absv = np.concatenate([absv[keep], na])
    return complex(vals.sum()), float(errs.sum()), float(absv.sum()), len(panels)


def _loop_integral(f, loop: Loop, cfg, log):
    n = cfg.loop_nodes
    t = 2 * np.pi * np.arange(n) / n
    e = np.exp(1j * t)
    v = _eval(f, loop.center + loop.radius * e, log) * (1j * loop.radius * e)
    full = v.mean() * 2 * np.pi
    half = v[::2].mean() * 2 * np.pi
    return loop.orientation * complex(full), float(abs(full - half))


def _analytic_tail(logf0: complex, x0: complex, d: complex, model: TailModel) -> complex:
    """Integral of exp(model) from x0 to infinity along d, given log f(x0)."""
    if abs(model.c2) > 1e-300:
        s = np.sqrt(-complex(model.c2))
        if (s * d).real < 0:
            s = -s
        u0 = x0 + model.c1 / (2 * model.c2)
        return complex(np.exp(logf0) * math.sqrt(math.pi) / (2 * s) * erfcx(s * u0))
    if (model.c1 * d).real >= 0:
        raise QuadratureError("tail model does not decay along the chosen direction")
    return complex(-np.exp(logf0) / model.c1)


def _numeric_tail(f, x0, d, cfg, log, scale):
    total, err, absint = 0j, 0.0, 0.0
    h, t, quiet = 0.5, 0.0, 0
    xh, wh = _gl(cfg.nodes)
    for _ in range(2000):
        a, b = x0 + t * d, x0 + (t + h) * d
        val, e, av, _n = _integrate_panels(f, [(a, b)], cfg, log, scale + abs(total))
        total += val
        err += e
        absint += av
        tol = max(cfg.abs_tol, cfg.rel_tol * (abs(total) + scale))
        quiet = quiet + 1 if abs(val) < tol / 10 else 0
        if quiet >= cfg.tail_stop:
            return total, err + abs(val) * 2, absint
        t += h
        h = min(8.0, h * 1.25)
    raise QuadratureError("tail does not decay numerically")


def integrate_contour(
    f: Callable,
    contour: ContourSpec,
    cfg: QuadratureConfig | None = None,
    *,
    log: bool = False,
    singularities: Sequence[complex] = (),
    phase_rate: Callable | None = None,
    tails: tuple[TailModel | None, TailModel | None] = (None, None),
    info: dict | None = None,
) -> tuple[complex, float]:
    """Integrate f along the contour; returns (value, err_est).

    f is vectorized over numpy complex arrays.  With log=True it returns the
    logarithm of the integrand (any branch).  When a tail model is supplied
    the corresponding tail is completed in closed form from the end waypoint.
    """
    cfg = cfg or QuadratureConfig()
    sing = [complex(s) for s in singularities]
    w = contour.waypoints
    panels = []
    for a, b in zip(w, w[1:]):
        panels += _segment_panels(a, b, cfg, sing, phase_rate)
    value, err, absint, npan = _integrate_panels(f, panels, cfg, log)

    for lp in contour.loops:
        v, e = _loop_integral(f, lp, cfg, log)
        value += v
        err += e

    for side, x0, d, model in ((-1, w[0], contour.left_dir, tails[0]), (1, w[-1], contour.right_dir, tails[1])):
        if model is not None:
            lf = f(np.array([x0]))[0] if log else np.log(complex(f(np.array([x0]))[0]))
            v = _analytic_tail(lf, x0, d, model)
            e = 1e-12 * abs(v)
        else:
            v, e, av = _numeric_tail(f, x0, d, cfg, log, abs(value))
            v *= 1.0
            absint += av
        value += -v if side < 0 else v
        err += e
    if info is not None:
        info.update(panels=npan, absint=absint)
    return value, err + 1e-15 * absint
