"""Acceptance criteria, each at its stated tolerance and time budget.

Every test appends one PASS/FAIL line to ACCEPTANCE; tests/conftest.py prints
them at the end of the run. ``python3 tests/test_acceptance.py`` runs the same
checks outside pytest.
"""
import json
import subprocess
import sys
import time

import pytest

from hypgeo import verifier as V
from hypgeo.difference_ops import operator_pairs
from hypgeo.scheme_functions import EDGES, LATTICES

ACCEPTANCE: list[str] = []
SEED = 7


def _record(n, name, ok, detail, elapsed, budget):
    within = elapsed < budget
    ACCEPTANCE.append(f"[{n}] {name}: {'PASS' if ok and within else 'FAIL'}  {detail}  ({elapsed:.1f} s of {budget:.0f} s)")
    print(ACCEPTANCE[-1])
    return ok and within


def _failures(reports):
    return [(r.check_id, r.residual, r.tolerance) for r in reports if not r.passed]


def _worst(reports):
    return max(reports, key=lambda r: r.residual / r.tolerance)


def test_1_sb_suite():
    t0 = time.perf_counter()
    reports = []
    for b in (0.7, 1.0, 1.31):
        reports += V.check_sb_suite(b, n_points=100, seed=SEED)
    el = time.perf_counter() - t0
    for r in reports:
        loose = r.check_id.startswith(("sb.residue", "sb.asymptotics"))
        assert r.tolerance == (1e-6 if loose else 1e-8), r.check_id
    kinds = {r.check_id.split("[")[0] for r in reports}
    assert {"sb.inversion", "sb.shift_b", "sb.shift_binv", "sb.modular", "sb.residue", "sb.asymptotics"} <= kinds
    w = _worst(reports)
    ok = _record(1, "s_b suite", not _failures(reports), f"{len(reports)} checks, worst {w.check_id} {w.residual:.2e}", el, 30)
    assert ok, _failures(reports)


QSERIES_SCRIPT = """
import json, sys, time
t0 = time.perf_counter()
from hypgeo.verifier import check_qseries_suite
reports = check_qseries_suite(seed=%d, draws=50, n_max=6)
el = time.perf_counter() - t0
loaded = [m for m in ('hypgeo.contour_engine', 'hypgeo.scheme_functions', 'hypgeo.difference_ops') if m in sys.modules]
print(json.dumps({"elapsed": el, "loaded": loaded, "reports": [r.to_dict() for r in reports]}))
""" % SEED


def test_2_qseries_suite_without_contour_code():
    out = subprocess.run([sys.executable, "-c", QSERIES_SCRIPT], capture_output=True, text=True, check=True)
    doc = json.loads(out.stdout)
    reps = doc["reports"]
    bad = [(r["check_id"], r["residual"]) for r in reps if not r["passed"]]
    limits = [r for r in reps if r["check_id"].startswith("qseries.limit[")]
    duals = [r for r in reps if r["category"] == "duality"]
    modes = [r for r in reps if r["check_id"].startswith("qseries.modes[")]
    assert len(limits) == 9 and len(duals) == 3 and len(modes) == 10
    assert all(r["tolerance"] == 1e-5 for r in limits)
    assert all(r["tolerance"] == 1e-10 for r in duals)
    assert all(r["tolerance"] == 1e-9 for r in modes)
    worst = max(limits, key=lambda r: r["residual"])
    detail = f"{len(reps)} checks, worst limit {worst['check_id']} {worst['residual']:.2e}, contour modules loaded: {doc['loaded'] or 'none'}"
    ok = _record(2, "q-series suite", not bad and not doc["loaded"], detail, doc["elapsed"], 10)
    assert ok, (bad, doc["loaded"])


def test_3_eigen_equations():
    t0 = time.perf_counter()
    reports = []
    for m in V.MEMBER_NAMES:
        descs = [V.default_descriptor(m)] + V.seeded_descriptors(m, 3, SEED)
        reports += V.eigen_member(m, descs, tol=1e-6)
    el = time.perf_counter() - t0
    assert len(reports) == 4 * len(operator_pairs()) == 4 * 34
    w = _worst(reports)
    ok = _record(3, "eigen equations", not _failures(reports), f"34 pairs x 4 points, worst {w.check_id} {w.residual:.2e}", el, 480)
    assert ok, _failures(reports)


def test_4_operator_square():
    V.check_operator_square()  # warm the operator tables
    t0 = time.perf_counter()
    r = V.check_operator_square(tol=1e-10)
    el = time.perf_counter() - t0
    assert r.inputs["basis_size"] == 5
    ok = _record(4, "operator square", r.passed, f"residual {r.residual:.2e}", el, 1)
    assert ok, r.residual


def test_5_polynomial_limits():
    t0 = time.perf_counter()
    reports = [V.check_poly_limit(m, var, n_max=3, tol=1e-5) for m, var in LATTICES]
    el = time.perf_counter() - t0
    assert len(reports) == 11
    n0 = max(r.details["n0_minus_one"] for r in reports)
    q = [r for r in reports if r.check_id.startswith("poly_limit[Q.")]
    q1 = q[0].details["n1_minus_2cosh"]
    w = _worst(reports)
    ok = not _failures(reports) and n0 < 1e-7 and q1 < 1e-6
    detail = f"worst {w.check_id} {w.residual:.2e}, max |n=0 - 1| {n0:.2e}, |Q(n=1) - 2cosh| {q1:.2e}"
    ok = _record(5, "polynomial limits", ok, detail, el, 240)
    assert ok, (_failures(reports), n0, q1)


def test_6_confluence():
    t0 = time.perf_counter()
    reports = [V.check_confluence(e, lams=(8, 12, 16), tol=1e-4) for e in EDGES]
    el = time.perf_counter() - t0
    assert len(reports) == 7
    w = _worst(reports)
    ok = _record(6, "confluence", not _failures(reports), f"7 edges, worst final {w.check_id} {w.residual:.2e}", el, 120)
    assert ok, _failures(reports)


def test_7_symmetries():
    t0 = time.perf_counter()
    reports = [V.check_symmetry("R", "self_duality", tol=1e-8)]
    reports += [V.check_symmetry("R", "evenness", variable=v, tol=1e-8) for v in ("sigmas", "sigmat")]
    reports += [V.check_symmetry(m, "b_inversion", tol=1e-8) for m in V.MEMBER_NAMES]
    el = time.perf_counter() - t0
    w = _worst(reports)
    ok = _record(7, "symmetries", not _failures(reports), f"{len(reports)} checks, worst {w.check_id} {w.residual:.2e}", el, 60)
    assert ok, _failures(reports)


def test_8_contour_robustness():
    t0 = time.perf_counter()
    reports = V.check_contour_robustness()
    el = time.perf_counter() - t0
    dep, gauss, fres = reports
    assert dep.tolerance == 1.0 and gauss.tolerance == 1e-10 and fres.tolerance == 1e-10
    assert len(dep.details["ratios"]) == 3
    detail = f"max |change|/err_est {dep.residual:.2f}, Gaussian {gauss.residual:.1e}, Fresnel {fres.residual:.1e}"
    ok = _record(8, "contour robustness", not _failures(reports), detail, el, 10)
    assert ok, _failures(reports)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
