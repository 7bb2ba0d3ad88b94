from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from waterbag import c_closed, lambda_prime, make_waterbag
from waterbag.exactalg import (
    Frac,
    MultiPoly,
    NotInvertibleError,
    PSeries,
    RationalFunction,
    TruncationError,
    compose,
    residue_at_infinity,
    residue_at_pole,
    series_pow,
    series_reciprocal,
    series_revert,
    taylor_coefficient,
)
from waterbag.frobenius import mu_series

VARS = ("s1", "b1", "k1")
s1, b1, k1 = (MultiPoly.var(v) for v in VARS)
p = MultiPoly.var("p")

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def polys(draw, max_terms=4, max_exp=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        exp = tuple(draw(st.integers(0, max_exp)) for _ in VARS)
        terms[exp] = draw(fractions)
    return MultiPoly(VARS, terms)


points = st.fixed_dictionaries({v: fractions for v in VARS})


# polynomial arithmetic


def test_difference_of_squares():
    assert (s1 + b1) * (s1 - b1) == s1 ** 2 - b1 ** 2


def test_diff_example():
    assert (s1 ** 2 * b1).diff("s1") == 2 * s1 * b1


def test_eval_example():
    assert (s1 ** 2 - b1 ** 2).eval({"s1": 3, "b1": 2}) == 5


def test_no_stored_zero_coefficients():
    q = (s1 + b1) - b1
    assert [c for _, c in q.items()] == [1]
    assert list((s1 - s1).items()) == []


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        s1 ** -1


def test_eval_missing_variable_rejected():
    with pytest.raises(ValueError):
        (s1 + b1).eval({"s1": 1})


def test_json_round_trip_example():
    q = Fraction(3, 7) * s1 ** 2 * k1 - b1 + 12345678901234567890
    data = q.to_json()
    assert all(isinstance(t["num"], str) and isinstance(t["den"], str) for t in data["terms"])
    assert MultiPoly.from_json(data) == q


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == MultiPoly.zero(VARS)


@given(polys(), polys(), points)
def test_eval_is_a_ring_homomorphism(a, b, pt):
    assert (a * b).eval(pt) == a.eval(pt) * b.eval(pt)
    assert (a + b).eval(pt) == a.eval(pt) + b.eval(pt)


@given(polys(), polys())
def test_leibniz_rule(a, b):
    assert (a * b).diff("s1") == a.diff("s1") * b + a * b.diff("s1")


@given(polys())
def test_json_round_trip(a):
    assert MultiPoly.from_json(a.to_json()) == a


@given(polys(), points)
def test_agrees_with_sympy(a, pt):
    syms = {v: sympy.Symbol(v) for v in VARS}
    expected = a.to_sympy(syms).subs({syms[v]: sympy.Rational(x.numerator, x.denominator) for v, x in pt.items()})
    assert Fraction(str(expected)) == a.eval(pt)


# power series


def test_geometric_reciprocal():
    r = series_reciprocal(PSeries([1, 1], 4), 4)
    assert [r[i] for i in range(4)] == [1, -1, 1, -1]


def test_reciprocal_of_constant():
    W = make_waterbag(1, 0)
    mu = mu_series(W, 6)
    r = series_reciprocal(mu, 6)
    assert r[0] == Fraction(1, 2)
    assert all(r[i] == 0 for i in range(1, 6))


def test_reciprocal_mu_for_quartic():
    W = make_waterbag(3, 0)
    r = series_reciprocal(mu_series(W, 4), 4)
    assert r[2] == -MultiPoly.var("s1") / 8
    # multiply back
    prod = mu_series(W, 4) * r
    assert prod[0] == 1 and all(prod[i] == 0 for i in range(1, 4))


def test_reciprocal_not_invertible():
    with pytest.raises(NotInvertibleError):
        series_reciprocal(PSeries([0, 1], 3), 3)


def test_truncation_is_enforced():
    f = PSeries([1, 2], 3)
    with pytest.raises(TruncationError):
        f[3]
    assert (f * PSeries([1], 2)).order == 2


def test_revert_example_back_substitutes():
    f = PSeries([0, 1, 1], 4)
    g = series_revert(f, 4)
    assert [g[i] for i in range(4)] == [0, 1, -1, 2]
    h = compose(f, g)
    assert [h[i] for i in range(4)] == [0, 1, 0, 0]


def test_revert_identity():
    g = series_revert(PSeries([0, 1], 5), 5)
    assert [g[i] for i in range(5)] == [0, 1, 0, 0, 0]


def test_quadratic_inversion():
    """k = p (1 + s1/p^2)^(1/2) inverted in z = 1/k gives p = k - s1/(2k) + O(1/k^3)."""
    order = 6
    # 1/k = w (1 + s1 w^2)^(-1/2) with w = 1/p
    inner = series_pow(PSeries([1, 0, s1], order), Fraction(-1, 2), order)
    f = PSeries([0] + [inner[i] for i in range(order - 1)], order)
    w = series_revert(f, order)
    ratio = PSeries([w[i + 1] for i in range(order - 1)], order - 1)  # w / z
    p_times_z = series_reciprocal(ratio, 4)
    assert [p_times_z[i] for i in range(4)] == [1, 0, -s1 / 2, 0]
    # square: (p z)^2 = 1 - s1 z^2 + O(z^4), i.e. k^2 = p^2 + s1
    sq = p_times_z * p_times_z
    assert [sq[i] for i in range(4)] == [1, 0, -s1, 0]


@given(st.lists(fractions, min_size=1, max_size=5))
def test_reciprocal_property(tail):
    f = PSeries([Fraction(1)] + tail, len(tail) + 1)
    prod = f * series_reciprocal(f, f.order)
    assert prod[0] == 1 and all(prod[i] == 0 for i in range(1, prod.order))


@given(st.lists(fractions, min_size=1, max_size=5), fractions.filter(lambda x: x != 0))
def test_revert_property(tail, lead):
    order = len(tail) + 2
    f = PSeries([Fraction(0), lead] + tail, order)
    h = compose(f, series_revert(f, order))
    assert [h[i] for i in range(order)] == [0, 1] + [0] * (order - 2)


@given(st.lists(fractions, min_size=2, max_size=6), st.integers(0, 5))
def test_taylor_coefficient_two_routes(cs, n):
    f = PSeries(cs, len(cs))
    n = min(n, len(cs) - 1)
    assert taylor_coefficient(f, n) == taylor_coefficient(f, n, via_derivatives=True)


# residues


def test_residue_at_infinity_examples():
    one = MultiPoly.const(1)
    assert residue_at_infinity(RationalFunction(one, p)) == -1
    assert residue_at_infinity(RationalFunction(p ** 2, one)) == 0


def test_residue_at_infinity_of_reciprocal_derivative():
    lam_plus = lambda_prime(make_waterbag(1, 0))
    assert residue_at_infinity(RationalFunction(lam_plus.den, lam_plus.num)) == Fraction(-1, 2)


def test_residue_at_pole_examples():
    one = MultiPoly.const(1)
    b2 = MultiPoly.var("b2")
    assert Frac.coerce(residue_at_pole(RationalFunction(one, p - b1), b1, 1)) == Frac.coerce(1)
    r = residue_at_pole(RationalFunction(one, (p - b1) * (p - b2)), b1, 1)
    assert Frac.coerce(r) == Frac(MultiPoly.const(1), b1 - b2)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 2), (3, 1), (2, 3)])
def test_residue_reproduces_bbb_diagonal(N, M):
    # c(b1,b1,b1) is minus the residue at b1 of (k1/(p - b1))^3 / lam', the same
    # sign convention that makes eta(b1, b1) = k1
    W = make_waterbag(N, M)
    lp = lambda_prime(W)
    integrand = RationalFunction(k1 ** 3 * lp.den.exact_div(p - b1), (p - b1) ** 2 * lp.num)
    r = Frac.coerce(residue_at_pole(integrand, b1, 2))
    assert (r + Frac.coerce(c_closed(W)[("b1", "b1", "b1")])).cancel().is_zero()


@settings(max_examples=30, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=3, unique=True), st.lists(fractions, min_size=3, max_size=3))
def test_residues_sum_to_zero(poles, nums):
    """Residue theorem: finite residues plus the residue at infinity vanish."""
    den = MultiPoly.const(1)
    for a in poles:
        den = den * (p - a)
    num = MultiPoly.const(nums[0]) + nums[1] * p + nums[2] * p ** 2
    f = RationalFunction(num, den)
    total = Frac.coerce(residue_at_infinity(f))
    for a in poles:
        total = total + Frac.coerce(residue_at_pole(f, MultiPoly.const(a), 1))
    assert total.cancel().is_zero()
