"""Acceptance criteria, one test and one PASS/FAIL line each.

The lines are printed immediately and repeated in the terminal summary.
"""

import time

import sympy

from conftest import ACCEPTANCE_LINES
from waterbag import c_closed, c_oracle, construct, flat_map, make_waterbag, metric_closed, metric_oracle, push_to_flat, wdvv_check
from waterbag.exactalg import MultiPoly
from waterbag.frobenius import expected_flat_metric, flat_structure
from waterbag.numeric import canonical_check, numeric_wdvv
from waterbag.prepotential import (
    bn_restriction_check,
    homogeneity_check,
    intersection_form,
    k_decomposition_check,
    sample_points,
)
from waterbag.reference_cases import (
    COINCIDENT,
    EXACT,
    LEGENDRE_CORRECTED,
    UP_TO_SIGN,
    example_n0_m2,
    example_n1_m2,
    example_n2_m1,
)

t1, t2, t3 = (MultiPoly.var(n) for n in ("t1", "t2", "t3"))


def report(number, ok, text):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {text}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _points(chart, params, count, seed=0):
    return sample_points(list(chart) + list(params), count, seed, distinct=[x for x in chart if x.startswith("b")], nonzero=params)


def test_criterion_1_quartic_example():
    start = time.perf_counter()
    chart, eta, c, P = construct(make_waterbag(3, 0))
    elapsed = time.perf_counter() - start
    printed = t1 ** 2 * t3 / 8 + t1 * t2 ** 2 / 8 - t2 ** 2 * t3 ** 2 / 64 + t3 ** 5 / 3840
    # our F is the negative of the display; the display's sign disagrees with
    # the t-block metric -1/(N+1) that both routes produce
    ok = P.F0 == -printed and not P.F1 and chart.round_trip_ok() and elapsed < 1.0
    report(1, ok, f"N=3 M=0 prepotential equals the printed one up to overall sign, {elapsed:.3f}s < 1s")


def test_criterion_2_deformed_examples():
    parts = []
    ok = True
    for fn, wanted in ((example_n2_m1, UP_TO_SIGN), (example_n1_m2, EXACT), (example_n0_m2, EXACT)):
        start = time.perf_counter()
        res = fn()
        elapsed = time.perf_counter() - start
        good = res.status == wanted and elapsed < 5.0
        if fn is example_n1_m2:
            coeffs = set(res.detail["log_coeff_per_ordered_pair"].values())
            good &= coeffs == {"1/8"}
        ok &= good
        parts.append(f"{res.name}: {res.status} in {elapsed:.2f}s")
    report(2, ok, "; ".join(parts) + " (each < 5s, log coefficient 1/8 per ordered pair)")


def test_criterion_3_wdvv():
    start = time.perf_counter()
    parts = []
    ok = True
    for N, M in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]:
        W = make_waterbag(N, M)
        chart, eta, c, P = construct(W)
        rep = wdvv_check(P, eta, _points(chart.target, W.params, 20))
        checked = rep.details["points_checked"]
        ok &= rep.passed and checked >= 20
        parts.append(f"({N},{M}) {checked} pts")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report(3, ok, f"exact zero associators: {', '.join(parts)}; total {elapsed:.1f}s < 120s")


def test_criterion_4_oracle_equivalence():
    ok = True
    for N, M in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]:
        W = make_waterbag(N, M)
        ok &= metric_closed(W).differences(metric_oracle(W)) == []
        ok &= c_closed(W).differences(c_oracle(W)) == []
    report(4, ok, "closed forms equal residue oracle for metric and c at (1,1),(1,2),(2,1),(2,2),(3,1)")


def test_criterion_5_grading():
    ok = True
    cases = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2), (0, 2)]
    worst_defect = 0
    for N, M in cases:
        _, _, _, P = construct(make_waterbag(N, M))
        rep = homogeneity_check(P)
        ok &= rep.passed
        worst_defect = max(worst_defect, rep.details["defect_degree"])
    chart, eta, c, P = construct(make_waterbag(2, 1))
    _, lie = intersection_form(P, eta)
    five = [w for w in lie.witnesses if "informational" not in w["identity"]]
    ok &= len(five) == 5 and all(w["ok"] for w in five)
    report(
        5,
        ok,
        f"F0 degree 2N+4 and F1 degree N+3 for {len(cases)} cases, Euler defect degree {worst_defect} <= 2, "
        f"five Lie identities hold for (2,1)",
    )


def test_criterion_6_k_decomposition():
    W = make_waterbag(2, 2)
    chart, eta, c = flat_structure(W)
    rep = k_decomposition_check(c, eta, W.params, _points(chart.target, W.params, 10))
    ok = rep.passed and rep.details["linear_in_k"] and len([w for w in rep.witnesses if "nonzero" in w]) == 10
    report(6, ok, "raised structure functions linear in k, mixed associators vanish at 10 points for (2,2)")


def test_criterion_7_even_restriction():
    ok = True
    families = 0
    for N, M in [(1, 1), (2, 1)]:
        rep = bn_restriction_check(N, M, points=10)
        fam = [w for w in rep.witnesses if w["family"].startswith("c_")]
        families = len(fam)
        ok &= rep.passed and families == 6 and all(not w["nonzero"] for w in fam)
        ok &= any(w["family"] == "restricted WDVV" and w["ok"] and w["points"] == 10 for w in rep.witnesses)
    report(7, ok, f"{families} component families vanish and restricted WDVV passes at 10 points for (1,1),(2,1)")


def test_criterion_8_rational_and_closed_forms():
    W = make_waterbag(2, 1, "rational", [{"L": 2}])
    chart = flat_map(W)
    pushed = push_to_flat(metric_oracle(W), chart)
    expected = expected_flat_metric(W, chart)
    blocks_ok = expected.differences(pushed) == []
    blocks_ok &= expected[("x1_1", "x1_3")] == expected[("x1_2", "x1_2")] == -MultiPoly.const(1) / 2
    names = ["t1", "t2", "t3"]
    syms = {n: sympy.Symbol(n) for n in names + ["k"]}
    pts = sample_points(names + ["k"], 10, 0, nonzero=["k", "t2"])
    pts = [{**p, "t2": abs(p["t2"])} for p in pts]
    coincident = numeric_wdvv(sympy.sympify(COINCIDENT, locals=syms), names, pts, tol=1e-9, identity="t1")
    legendre = numeric_wdvv(sympy.sympify(LEGENDRE_CORRECTED, locals=syms), names, pts, tol=1e-9, identity="t2")
    ok = blocks_ok and coincident.passed and legendre.passed
    worst = max(w["max_residual"] for w in coincident.witnesses + legendre.witnesses)
    report(
        8,
        ok,
        f"pole metric blocks exact for K=1 L=2 M=1; coincident-pole and Legendre prepotentials pass at 10 points "
        f"(max residual {worst:.1e} < 1e-9)",
    )


def test_criterion_9_canonical():
    W = make_waterbag(2, 1)
    pts = _points(W.chart, W.params, 10)
    worst = {}
    ok = True
    for pt in pts:
        rep = canonical_check(W, pt, tol=1e-9, fd_tol=1e-6)
        ok &= rep.passed
        for w in rep.witnesses:
            worst[w["quantity"]] = max(worst.get(w["quantity"], 0.0), w["max_residual"])
    diag = worst["metric off-diagonal"]
    lam = worst["metric diagonal vs -1/lam''"]
    ego = worst["Egoroff potential -s1/(N+1)"]
    ok &= diag < 1e-9 and lam < 1e-9 and ego < 1e-6
    report(9, ok, f"(2,1) at 10 points: off-diagonal {diag:.1e}, -1/lam'' {lam:.1e} (< 1e-9), Egoroff {ego:.1e} (< 1e-6)")


def test_acceptance_lines_are_single_lines():
    assert all("\n" not in line for line in ACCEPTANCE_LINES)
    assert len(set(ACCEPTANCE_LINES)) == len(ACCEPTANCE_LINES)
