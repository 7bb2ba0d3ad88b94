from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waterbag import lambda_prime, make_waterbag, truncate_plus
from waterbag.exactalg import MultiPoly
from waterbag.superpotential import from_json, regularised_is_homogeneous

p, s1, s2, s3, b1, b2, k1, k2 = (MultiPoly.var(n) for n in ("p", "s1", "s2", "s3", "b1", "b2", "k1", "k2"))


def test_cubic_with_one_log():
    W = make_waterbag(2, 1)
    assert W.poly == p ** 3 + s1 * p + s2
    assert [(log.weight, log.position) for log in W.logs] == [(k1, b1)]
    assert W.chart == ("s1", "s2", "b1")
    assert W.params == ("k1",)


def test_pure_quartic():
    W = make_waterbag(3, 0)
    assert W.poly == p ** 4 + s1 * p ** 2 + s2 * p + s3
    assert W.logs == () and W.params == ()


def test_linear_with_two_logs():
    W = make_waterbag(0, 2)
    assert W.poly == p
    assert [(log.weight, log.position) for log in W.logs] == [(k1, b1), (k2, b2)]


@pytest.mark.parametrize("N,M", [(-1, 0), (0, -1), (0, 0)])
def test_bad_sizes(N, M):
    with pytest.raises(ValueError):
        make_waterbag(N, M)


def test_bad_flavor_combinations():
    with pytest.raises(ValueError):
        make_waterbag(1, 1, "nonsense")
    with pytest.raises(ValueError):
        make_waterbag(1, 1, "rational")
    with pytest.raises(ValueError):
        make_waterbag(1, 1, "generic", [{"L": 1}])
    with pytest.raises(ValueError):
        make_waterbag(1, 1, "rational", [{"L": 0}])


def test_bn_shape_is_even_with_paired_logs():
    W = make_waterbag(1, 1, "bn")
    assert W.poly == p ** 4 + s1 * p ** 2 + s3
    assert all(e["p"] % 2 == 0 for e, _ in W.poly.items() if "p" in e)
    positions = sorted(str(log.position) for log in W.logs)
    assert positions == ["-b1", "b1"]


def test_rational_chart():
    W = make_waterbag(2, 1, "rational", [{"L": 2}])
    assert W.chart == ("s1", "s2", "a1", "v1_1", "v1_2", "b1")
    assert [pole.order for pole in W.poles] == [2]


def test_derivative_examples():
    lp = lambda_prime(make_waterbag(1, 0))
    assert lp.num == 2 * p and lp.den == MultiPoly.const(1)
    lp = lambda_prime(make_waterbag(1, 1))
    assert lp.num == 2 * p * (p - b1) + k1
    assert lp.den == p - b1


@pytest.mark.parametrize("N,M", [(1, 0), (1, 2), (2, 1), (3, 2), (0, 3)])
def test_numerator_degree_and_lead(N, M):
    lp = lambda_prime(make_waterbag(N, M))
    assert lp.num.degree("p") == N + M
    assert lp.num.coeff("p", N + M) == N + 1


@settings(max_examples=25, deadline=None)
@given(
    st.integers(1, 3),
    st.integers(0, 2),
    st.lists(st.fractions(-5, 5, max_denominator=4), min_size=10, max_size=10),
    st.fractions(1, 7, max_denominator=3),
)
def test_derivative_matches_difference_quotient(N, M, vals, q):
    """lam'(q) equals the symbolic derivative of each term evaluated at p = q."""
    W = make_waterbag(N, M)
    names = list(W.chart) + list(W.params)
    pt = dict(zip(names, vals))
    for b in W.b_names:
        pt[b] = pt[b] + 10 * (W.b_names.index(b) + 1)  # keep q away from the logs
    lp = lambda_prime(W)
    pt_q = {**pt, "p": q}
    expected = W.poly.diff("p").eval(pt_q)
    for log in W.logs:
        expected += log.weight.eval(pt) / (q - log.position.eval(pt))
    assert lp.eval(pt_q) == expected


def test_truncation_examples():
    assert truncate_plus(make_waterbag(2, 1)) == p ** 3 + s1 * p + s2
    assert truncate_plus(make_waterbag(0, 2)) == p


@pytest.mark.parametrize(
    "N,M,flavor,spec",
    [(1, 0, "generic", None), (2, 2, "generic", None), (3, 1, "generic", None), (1, 1, "bn", None), (2, 1, "rational", [{"L": 2}])],
)
def test_regularised_superpotential_is_homogeneous(N, M, flavor, spec):
    assert regularised_is_homogeneous(make_waterbag(N, M, flavor, spec))


def test_grading_weights():
    g = make_waterbag(2, 1).grading
    assert g.degree == 3
    assert [g.weight(n) for n in ("p", "s1", "s2", "b1", "k1")] == [1, 2, 3, 1, 3]
    assert g.degree_of(p ** 3 + s1 * p + s2) == {Fraction(3)}


def test_json_round_trip():
    for W in (make_waterbag(2, 1), make_waterbag(1, 1, "bn"), make_waterbag(1, 1, "rational", [{"L": 2}])):
        assert from_json(W.to_json()) == W
