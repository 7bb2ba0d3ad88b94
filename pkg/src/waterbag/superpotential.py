"""Water-bag superpotentials and their variants.

The general shape handled here is

    lam(p) = p^(d) + (lower polynomial coefficients)
             + sum_i sum_l v_{i,l} / (p - a_i)^l
             + sum_j w_j log(p - P_j)

where the polynomial coefficients, pole positions ``a_i``, pole coefficients
``v_{i,l}`` and log positions ``P_j`` are polynomials in the chart coordinates,
and the log weights ``w_j`` depend only on the parameters ``k``.  Logs are never
evaluated: everything downstream works with derivatives, which are rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

from .exactalg.multipoly import MultiPoly
from .exactalg.ratfunc import RationalFunction

P = "p"
FLAVORS = ("generic", "bn", "rational")


@dataclass(frozen=True)
class LogTerm:
    weight: MultiPoly
    position: MultiPoly


@dataclass(frozen=True)
class PoleTerm:
    position: MultiPoly
    coeffs: Tuple[MultiPoly, ...]  # coefficient of (p - a)^-l is coeffs[l-1]

    @property
    def order(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class GradingScheme:
    """Weights making the regularised superpotential homogeneous of degree ``degree``."""

    weights: Mapping[str, Fraction]
    degree: Fraction

    def weight(self, name: str) -> Fraction:
        return Fraction(self.weights.get(name, 0))

    def degree_of(self, poly: MultiPoly) -> set:
        return poly.weighted_degrees(self.weights)


@dataclass(frozen=True)
class WaterBagPotential:
    N: int
    M: int
    flavor: str
    poly: MultiPoly  # polynomial part, involves p
    poles: Tuple[PoleTerm, ...]
    logs: Tuple[LogTerm, ...]
    chart: Tuple[str, ...]
    params: Tuple[str, ...]
    s_names: Tuple[str, ...]
    b_names: Tuple[str, ...]
    pole_names: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()  # (position name, coefficient names)
    grading: GradingScheme | None = field(default=None, compare=False)

    @property
    def degree(self) -> int:
        return self.poly.degree(P)

    @property
    def k_names(self) -> Tuple[str, ...]:
        return self.params

    def coordinate_derivative(self, name: str):
        """``d lam / d name`` as a list of ``(numerator, {position_key: (position, exponent)})``."""
        out = [(self.poly.diff(name), {})]
        for pole in self.poles:
            key = pole.position.key()
            da = pole.position.diff(name)
            for l, v in enumerate(pole.coeffs, start=1):
                dv = v.diff(name)
                if not dv.is_zero():
                    out.append((dv, {key: (pole.position, l)}))
                if not da.is_zero():
                    out.append((v * da * l, {key: (pole.position, l + 1)}))
        for log in self.logs:
            if set(log.weight.used_vars()) & set(self.chart):
                raise ValueError("log weights must not depend on coordinates")
            dP = log.position.diff(name)
            if not dP.is_zero():
                out.append((-(log.weight * dP), {log.position.key(): (log.position, 1)}))
        return [t for t in out if not t[0].is_zero()]

    def pole_structure(self) -> Dict[frozenset, Tuple[MultiPoly, int]]:
        """Maximal order of each finite pole of ``lam'`` keyed by position."""
        out: Dict[frozenset, Tuple[MultiPoly, int]] = {}

        def bump(pos: MultiPoly, e: int):
            k = pos.key()
            if k not in out or out[k][1] < e:
                out[k] = (pos, e)

        for log in self.logs:
            bump(log.position, 1)
        for pole in self.poles:
            bump(pole.position, pole.order + 1)
        return out

    def to_json(self) -> dict:
        data = {"N": self.N, "M": self.M, "flavor": self.flavor}
        if self.flavor == "rational":
            data["rational"] = [{"L": len(names)} for _, names in self.pole_names]
        return data


def _p() -> MultiPoly:
    return MultiPoly.var(P)


def _plus_part(degree: int, coeff_names: Mapping[int, str]) -> MultiPoly:
    """``p^degree + sum name * p^power`` with ``coeff_names`` mapping power -> name."""
    p = _p()
    out = p ** degree
    for power, name in sorted(coeff_names.items()):
        out = out + MultiPoly.var(name) * p ** power
    return out


def make_waterbag(N: int, M: int, flavor: str = "generic", rational_spec: Sequence[Mapping] | None = None) -> WaterBagPotential:
    """Symbolic superpotential with fresh coordinates and parameters.

    * ``generic``: ``p^(N+1) + s1 p^(N-1) + ... + sN + sum k_i log(p - b_i)``.
    * ``bn``: even polynomial ``p^(2N+2) + s1 p^(2N) + s3 p^(2N-2) + ... + s_(2N+1)``
      with paired logs ``k_i log(p - b_i) + k_i log(p + b_i)``.
    * ``rational``: the generic shape plus, for each entry ``{"L": L}`` of
      ``rational_spec``, a pole ``v{i}_1/(p - a{i}) + ... + v{i}_L/(p - a{i})^L``.
    """
    if not isinstance(N, int) or not isinstance(M, int):
        raise TypeError("N and M must be integers")
    if N < 0 or M < 0:
        raise ValueError("N and M must be non-negative")
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    rational_spec = list(rational_spec or [])
    if flavor != "rational" and rational_spec:
        raise ValueError("rational_spec is only meaningful for the rational flavor")
    if flavor == "rational" and not rational_spec:
        raise ValueError("rational flavor needs at least one pole in rational_spec")
    if N == 0 and M == 0 and not rational_spec:
        raise ValueError("N = M = 0 without poles gives an empty chart")

    ks = tuple(f"k{j}" for j in range(1, M + 1))
    bs = tuple(f"b{j}" for j in range(1, M + 1))
    weights: Dict[str, Fraction] = {P: Fraction(1)}

    if flavor == "bn":
        degree = 2 * N + 2
        s_names = tuple(f"s{r}" for r in range(1, 2 * N + 2, 2))
        poly = _plus_part(degree, {degree - 1 - r: f"s{r}" for r in range(1, 2 * N + 2, 2)})
        logs = []
        for k, b in zip(ks, bs):
            logs.append(LogTerm(MultiPoly.var(k), MultiPoly.var(b)))
            logs.append(LogTerm(MultiPoly.var(k), -MultiPoly.var(b)))
        for r in range(1, 2 * N + 2, 2):
            weights[f"s{r}"] = Fraction(r + 1)
        k_weight = degree
    else:
        degree = N + 1
        s_names = tuple(f"s{i}" for i in range(1, N + 1))
        poly = _plus_part(degree, {N - i: f"s{i}" for i in range(1, N + 1)})
        logs = [LogTerm(MultiPoly.var(k), MultiPoly.var(b)) for k, b in zip(ks, bs)]
        for i in range(1, N + 1):
            weights[f"s{i}"] = Fraction(i + 1)
        k_weight = N + 1
    for k, b in zip(ks, bs):
        weights[b] = Fraction(1)
        weights[k] = Fraction(k_weight)

    poles = []
    pole_names = []
    for i, item in enumerate(rational_spec, start=1):
        L = int(item["L"])
        if L < 1:
            raise ValueError("pole order L must be at least 1")
        a = f"a{i}"
        vs = tuple(f"v{i}_{l}" for l in range(1, L + 1))
        poles.append(PoleTerm(MultiPoly.var(a), tuple(MultiPoly.var(v) for v in vs)))
        pole_names.append((a, vs))
        weights[a] = Fraction(1)
        for l, v in enumerate(vs, start=1):
            weights[v] = Fraction(degree + l)

    chart = list(s_names)
    for a, vs in pole_names:
        chart.append(a)
        chart.extend(vs)
    chart.extend(bs)
    grading = GradingScheme(weights, Fraction(degree))
    return WaterBagPotential(
        N=N,
        M=M,
        flavor=flavor,
        poly=poly,
        poles=tuple(poles),
        logs=tuple(logs),
        chart=tuple(chart),
        params=ks,
        s_names=s_names,
        b_names=bs,
        pole_names=tuple(pole_names),
        grading=grading,
    )


def make_coincident_example() -> WaterBagPotential:
    """``p^2 + t1 + t2/(p - t3) + k log(p - t3)``: a pole and a log at the same point."""
    t1, t2, t3 = (MultiPoly.var(n) for n in ("t1", "t2", "t3"))
    poly = _p() ** 2 + t1
    return WaterBagPotential(
        N=1,
        M=1,
        flavor="rational",
        poly=poly,
        poles=(PoleTerm(t3, (t2,)),),
        logs=(LogTerm(MultiPoly.var("k"), t3),),
        chart=("t1", "t2", "t3"),
        params=("k",),
        s_names=("t1",),
        b_names=(),
        pole_names=(("t3", ("t2",)),),
        grading=None,
    )


def from_json(data: Mapping | str) -> WaterBagPotential:
    if isinstance(data, str):
        data = json.loads(data)
    return make_waterbag(int(data["N"]), int(data.get("M", 0)), data.get("flavor", "generic"), data.get("rational"))


def truncate_plus(W: WaterBagPotential) -> MultiPoly:
    """The polynomial part of the superpotential (logs and poles dropped)."""
    return W.poly


def _factor_product(structure: Mapping[frozenset, Tuple[MultiPoly, int]], skip=None, drop: int = 0) -> MultiPoly:
    p = _p()
    out = MultiPoly.const(1)
    for key, (pos, e) in structure.items():
        ee = e - drop if key == skip else e
        out = out * (p - pos) ** ee
    return out


def lambda_prime(W: WaterBagPotential) -> RationalFunction:
    """``lam'(p) = nu(p) / D(p)`` with ``D`` the product of the finite pole factors."""
    structure = W.pole_structure()
    D = _factor_product(structure)
    nu = W.poly.diff(P) * D
    for log in W.logs:
        nu = nu + log.weight * _factor_product(structure, log.position.key(), 1)
    for pole in W.poles:
        key = pole.position.key()
        for l, v in enumerate(pole.coeffs, start=1):
            nu = nu - v * l * _factor_product(structure, key, l + 1)
    return RationalFunction(nu, D, P)


def regularised_terms(W: WaterBagPotential) -> List[MultiPoly]:
    """Terms of ``lam - (sum k) log p`` after expanding each log about infinity.

    ``w log(p - P) - w log p = -w sum_n (P/p)^n / n``; truncating at a few
    orders is enough to exhibit the weight of every term.
    """
    terms = [MultiPoly.const(c) * MultiPoly.monomial(dict(m)) for m, c in W.poly.items()]
    q = MultiPoly.var("pinv")
    for log in W.logs:
        for n in range(1, 4):
            terms.append(-(log.weight * log.position ** n * q ** n) * Fraction(1, n))
    for pole in W.poles:
        for l, v in enumerate(pole.coeffs, start=1):
            # v / (p - a)^l = v p^-l (1 - a/p)^-l, leading two terms
            terms.append(v * q ** l)
            terms.append(v * pole.position * q ** (l + 1) * l)
    return terms


def regularised_is_homogeneous(W: WaterBagPotential) -> bool:
    g = W.grading
    if g is None:
        raise ValueError("no grading attached")
    weights = dict(g.weights)
    weights["pinv"] = Fraction(-1)
    degrees = set()
    for t in regularised_terms(W):
        if not t.is_zero():
            degrees |= t.weighted_degrees(weights)
    return degrees == {g.degree}
