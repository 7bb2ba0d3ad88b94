"""Rational functions of one variable with polynomial coefficients, and residues."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .frac import Frac
from .multipoly import MultiPoly
from .series import PSeries, series_reciprocal

_SHIFT = "_h"


@dataclass(frozen=True)
class RationalFunction:
    """``num(p) / den(p)``; ``num`` and ``den`` are polynomials that may involve ``var``."""

    num: MultiPoly
    den: MultiPoly
    var: str = "p"

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("denominator is identically zero")

    def degrees(self):
        return self.num.degree(self.var), self.den.degree(self.var)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den, self.var)

    def eval(self, assignment) -> Fraction:
        return self.num.eval(assignment) / self.den.eval(assignment)


def residue_at_infinity(f: RationalFunction) -> MultiPoly:
    """``res_{p=inf} f dp``, i.e. minus the coefficient of ``1/p`` at infinity.

    The expansion order is fixed from the degrees of numerator and denominator;
    the leading coefficient of the denominator must be a nonzero rational.
    """
    p = f.var
    a = f.num.degree(p)
    b = f.den.degree(p)
    if a < 0:
        return MultiPoly.zero()
    need = 1 + a - b  # coefficient of x^need in N~(x)/D~(x), x = 1/p
    if need < 0:
        return MultiPoly.zero()
    order = need + 1
    num = f.num.coeffs_in(p)
    den = f.den.coeffs_in(p)
    lead = den[b]
    if not lead.is_constant():
        raise ValueError(f"leading coefficient {lead} of the denominator is not a rational constant")
    zero = MultiPoly.zero()
    ntil = PSeries([num.get(a - j, zero) for j in range(order)], order, "x")
    dtil = PSeries([den.get(b - j, zero) for j in range(order)], order, "x")
    quotient = ntil * series_reciprocal(dtil, order)
    return -quotient[need]


def taylor_shift(poly: MultiPoly, var: str, point: MultiPoly, shift_var: str = _SHIFT) -> dict:
    """Coefficients of ``poly(point + h)`` as a polynomial in ``h``."""
    shifted = poly.subs({var: point + MultiPoly.var(shift_var)})
    return shifted.coeffs_in(shift_var)


def residue_at_pole(f: RationalFunction, point: MultiPoly, multiplicity: int) -> Frac:
    """Residue at ``p = point`` where the denominator has a zero of the given order.

    Evaluates ``(1/(m-1)!) d^(m-1)/dp^(m-1) [(p - point)^m f]`` at the point by
    expanding numerator and denominator about it.  The result lives in the
    fraction field because the cofactor of the denominator is generally a
    polynomial in the other symbols (e.g. ``b1 - b2``).
    """
    if multiplicity < 1:
        raise ValueError("multiplicity must be positive")
    point = point if isinstance(point, MultiPoly) else MultiPoly.const(point)
    m = multiplicity
    den = taylor_shift(f.den, f.var, point)
    zero = MultiPoly.zero()
    for j in range(m):
        c = den.get(j, zero)
        if not c.is_zero():
            raise ValueError(f"denominator does not vanish to order {m} at {point}: h^{j} coefficient {c}")
    lead = den.get(m, zero)
    if lead.is_zero():
        raise ValueError(f"denominator vanishes to order greater than {m} at {point}")
    num = taylor_shift(f.num, f.var, point)
    # 1 / (den / h^m) to order m, coefficients in the fraction field
    d0 = Frac(lead).inverse()
    inv = [d0]
    for n in range(1, m):
        acc = Frac(0)
        for i in range(1, n + 1):
            c = den.get(m + i, zero)
            if not c.is_zero():
                acc = acc + inv[n - i] * c
        inv.append(-(acc * d0))
    result = Frac(0)
    for i in range(m):
        c = num.get(i, zero)
        if not c.is_zero():
            result = result + inv[m - 1 - i] * c
    return result.cancel()
