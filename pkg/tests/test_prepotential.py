from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from waterbag import construct, integrate_F, make_waterbag, wdvv_check
from waterbag.exactalg import Entry, MultiPoly
from waterbag.frobenius import CTensor, MetricTensor, flat_structure
from waterbag.prepotential import (
    EulerField,
    IntegrabilityError,
    PrepotentialDecomposition,
    bn_restriction_check,
    deformed_sections,
    f_manifold_check,
    homogeneity_check,
    integrate_hessian,
    intersection_form,
    k_decomposition_check,
    sample_points,
)

t1, t2, t3, b1, b2, k1, k2 = (MultiPoly.var(n) for n in ("t1", "t2", "t3", "b1", "b2", "k1", "k2"))


def _pts(chart, params, count=10, seed=0):
    b_like = [x for x in chart if x.startswith("b")]
    return sample_points(list(chart) + list(params), count, seed, distinct=b_like, nonzero=params)


# integration


def test_quartic_prepotential():
    _, _, _, P = construct(make_waterbag(3, 0))
    printed = t1 ** 2 * t3 / 8 + t1 * t2 ** 2 / 8 - t2 ** 2 * t3 ** 2 / 64 + t3 ** 5 / 3840
    assert P.F0 == -printed
    assert P.F1 == {} and P.log_terms == {}


def test_cubic_with_one_log_prepotential():
    _, _, _, P = construct(make_waterbag(2, 1))
    printed_F0 = t1 ** 2 * t2 / 6 - t2 ** 4 / 216
    printed_F1 = -(t1 * b1 ** 2 / 2 + (t2 ** 2 * b1 + t2 * b1 ** 3) / 6 + b1 ** 5 / 20)
    assert P.F0 == -printed_F0
    assert P.F1["b1"] == -printed_F1


def test_quadratic_with_two_logs_prepotential():
    _, _, _, P = construct(make_waterbag(1, 2))
    assert P.F0 == -(t1 ** 3) / 12
    for b in (b1, b2):
        assert P.F1[str(b)] == t1 * b ** 2 / 2 + b ** 4 / 12
    assert P.log_terms == {("b1", "b2"): k1 * k2 / 4}
    assert P.log_coeffs() == {("b1", "b2"): Fraction(1, 8), ("b2", "b1"): Fraction(1, 8)}


@pytest.mark.parametrize("N,M", [(1, 1), (1, 3), (2, 2), (3, 1), (0, 2), (4, 0)])
def test_third_derivatives_reproduce_structure(N, M):
    chart, eta, c, P = construct(make_waterbag(N, M))
    assert P.third_derivatives().differences(c) == []


@pytest.mark.parametrize("N,M", [(1, 2), (2, 2), (3, 1), (2, 3)])
def test_blocks_have_expected_k_dependence(N, M):
    _, _, _, P = construct(make_waterbag(N, M))
    assert all(P.F0.degree(k) == 0 for k in P.k_names)
    assert all(f.degree(k) == 0 for f in P.F1.values() for k in P.k_names)
    assert (M >= 2) == bool(P.log_terms)
    for coeff in P.log_terms.values():
        assert coeff.total_degree(P.k_names) == 2


def test_non_integrable_tensor_is_rejected():
    c = CTensor(("t1", "t2"), {("t1", "t1", "t2"): Entry(t1), ("t1", "t1", "t1"): Entry(MultiPoly.zero())})
    with pytest.raises(IntegrabilityError):
        integrate_F(c)


def test_json_round_trip():
    _, _, _, P = construct(make_waterbag(1, 3))
    back = PrepotentialDecomposition.from_json(P.to_json())
    assert back == P


# associativity


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_pure_case_is_associative(N):
    chart, eta, c, P = construct(make_waterbag(N, 0))
    assert wdvv_check(P, eta, _pts(chart.target, ())).passed


@pytest.mark.parametrize("N,M", [(2, 1), (0, 2), (1, 2)])
def test_deformed_case_is_associative(N, M):
    W = make_waterbag(N, M)
    chart, eta, c, P = construct(W)
    rep = wdvv_check(P, eta, _pts(chart.target, W.params, 20))
    assert rep.passed
    assert rep.details["points_checked"] == 20


def test_perturbed_tensor_fails_with_witness():
    W = make_waterbag(2, 1)
    chart, eta, c, P = construct(W)
    bumped = dict(c.entries)
    key = ("t2", "t2", "t2")
    bumped[key] = Entry.coerce(bumped.get(key, Entry())) + Entry(MultiPoly.var("b1"))
    rep = wdvv_check(CTensor(c.chart, bumped), eta, _pts(chart.target, W.params, 3))
    assert not rep.passed
    first = next(w for w in rep.witnesses if w["status"] == "fail")
    assert Fraction(first["first"]["residual"]) != 0


def test_mismatched_chart_order_is_rejected():
    chart, eta, c, P = construct(make_waterbag(2, 1))
    flipped = MetricTensor(tuple(reversed(eta.chart)), eta.entries)
    with pytest.raises(ValueError):
        wdvv_check(P, flipped, _pts(chart.target, ("k1",), 1))


# grading


def test_weights_of_listed_monomials():
    w = EulerField.for_chart(("t1", "t2"), ("b1",), ("k1",), 2).weights()
    assert (t1 ** 2 * t2).weighted_degrees(w) == {Fraction(8)}
    assert (t1 * b1 ** 2).weighted_degrees(w) == {Fraction(5)}


@pytest.mark.parametrize("N,M", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 0), (3, 1), (0, 2)])
def test_homogeneity(N, M):
    _, _, _, P = construct(make_waterbag(N, M))
    rep = homogeneity_check(P)
    assert rep.passed, rep.to_json()
    assert rep.details["defect_degree"] <= 2


@pytest.mark.parametrize("N", [1, 2, 3])
def test_log_block_scaling(N):
    """Extended Euler field on k1 k2 x^2 log x^2 gives (2N+4)/(N+1) times it plus a quadratic."""
    u, v, a, b = sympy.symbols("u v a b")
    x = u - v
    term = a * b * x ** 2 * sympy.log(x ** 2)
    E_term = (u * sympy.diff(term, u) + v * sympy.diff(term, v)) / (N + 1) + a * sympy.diff(term, a) + b * sympy.diff(term, b)
    rest = sympy.simplify(sympy.expand_log(E_term - sympy.Rational(2 * N + 4, N + 1) * term, force=True))
    assert sympy.Poly(rest, u, v).total_degree() == 2


def test_intersection_form_identities():
    chart, eta, c, P = construct(make_waterbag(2, 1))
    g, rep = intersection_form(P, eta)
    assert rep.passed
    names = {w["identity"]: w["ok"] for w in rep.witnesses}
    for name in ("[e,E] = e", "L^ext_E g^-1 = (d-1) g^-1", "L^ext_E eta^-1 = (d-2) eta^-1", "L^ext_e g^-1 = eta^-1", "L^ext_e eta^-1 = 0"):
        assert names[name]
    assert rep.details["identity"] == {"t1": "1"}


# k-decomposition and F-manifold


@pytest.mark.parametrize("N,M", [(2, 1), (2, 2)])
def test_k_decomposition(N, M):
    W = make_waterbag(N, M)
    chart, eta, c = flat_structure(W)
    rep = k_decomposition_check(c, eta, W.params, _pts(chart.target, W.params, 10))
    assert rep.passed
    assert rep.details["parts"] == ["0"] + list(W.params)


def test_k_decomposition_without_weights_is_plain_associativity():
    W = make_waterbag(3, 0)
    chart, eta, c = flat_structure(W)
    pts = _pts(chart.target, (), 5)
    rep = k_decomposition_check(c, eta, [], pts)
    assert rep.details["parts"] == ["0"]
    assert rep.passed == wdvv_check(c, eta, pts).passed == True  # noqa: E712


def test_f_manifold():
    W = make_waterbag(2, 1)
    chart, eta, c = flat_structure(W)
    assert f_manifold_check(c, eta, _pts(chart.target, W.params, 3)).passed


# deformed sections


def test_sections_of_the_quadratic():
    chart, eta, c, P = construct(make_waterbag(1, 0))
    levels = deformed_sections(P, eta, 3)["t1"]
    assert levels == [t1, -(t1 ** 2) / 2, t1 ** 3 / 6, -(t1 ** 4) / 24]


def test_level_one_sections_exist_with_one_log():
    chart, eta, c, P = construct(make_waterbag(2, 1))
    out = deformed_sections(P, eta, 1)
    assert set(out) == set(chart.target)
    for seed, levels in out.items():
        assert levels[0] == MultiPoly.var(seed)
        assert isinstance(levels[1], MultiPoly)


def test_sections_need_polynomial_prepotential():
    chart, eta, c, P = construct(make_waterbag(1, 2))
    with pytest.raises(ValueError):
        deformed_sections(P, eta, 1)


def test_non_closed_hessian_is_rejected():
    H = {("x", "x"): MultiPoly.var("y"), ("x", "y"): MultiPoly.zero(), ("y", "x"): MultiPoly.zero(), ("y", "y"): MultiPoly.zero()}
    with pytest.raises(IntegrabilityError):
        integrate_hessian(H, ("x", "y"))


# B_N restriction


@pytest.mark.parametrize("N,M", [(1, 1), (1, 0)])
def test_even_restriction(N, M):
    rep = bn_restriction_check(N, M, points=10)
    assert rep.passed, rep.to_json()


# sampling


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_sample_points_are_seeded_and_constrained(seed, count):
    names = ["t1", "b1", "b2", "b3", "k1"]
    pts = sample_points(names, count, seed, distinct=["b1", "b2", "b3"], nonzero=["k1"])
    assert pts == sample_points(names, count, seed, distinct=["b1", "b2", "b3"], nonzero=["k1"])
    for pt in pts:
        assert len({pt["b1"], pt["b2"], pt["b3"]}) == 3
        assert pt["k1"] != 0
