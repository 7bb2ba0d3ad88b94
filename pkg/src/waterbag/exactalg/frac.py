"""Fractions of polynomials with factored denominators, and simple-pole entries.

``Frac`` keeps its denominator as a product of normalized factors with
exponents, so sums only ever take least common multiples of known factors and
no multivariate gcd is needed.  Equality is decided by cross-multiplication.

``Entry`` is the tagged form used for tensor components: a polynomial plus a
sum of simple-pole terms ``num / (u - v)`` where ``u`` and ``v`` are coordinate
names (in practice the logarithmic positions ``b_i``).  Each pole numerator is
kept reduced modulo ``u - v`` (it does not involve ``u``), which makes the
representation unique.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Dict, Iterable, Mapping, Tuple

from .multipoly import MultiPoly, natural_key

FactorKey = frozenset


class PoleStructureError(ArithmeticError):
    """Result cannot be written as a polynomial plus simple b-difference poles."""


def _monic(p: MultiPoly) -> Tuple[Fraction, MultiPoly]:
    lead = p.canonical_lead()
    return lead, p * (1 / lead)


def split_factors(p: MultiPoly) -> Tuple[Fraction, Dict[FactorKey, Tuple[MultiPoly, int]]]:
    """Write ``p = scalar * prod(factor**e)``.

    Factors are monic.  Variable content and linear binomials ``x - y`` and
    ``x + y`` are split off; whatever remains is kept as one opaque factor.
    """
    if p.is_zero():
        raise ZeroDivisionError("cannot factor the zero polynomial")
    factors: Dict[FactorKey, Tuple[MultiPoly, int]] = {}

    def push(f: MultiPoly, e: int):
        k = f.key()
        if k in factors:
            factors[k] = (factors[k][0], factors[k][1] + e)
        else:
            factors[k] = (f, e)

    p = p.trim()
    # variable content
    if p.vars:
        mins = [min(exp[j] for exp in p.terms) for j in range(len(p.vars))]
        if any(mins):
            for v, m in zip(p.vars, mins):
                if m:
                    push(MultiPoly.var(v), m)
            p = MultiPoly._raw(p.vars, {tuple(e - m for e, m in zip(exp, mins)): c for exp, c in p.terms.items()}).trim()
    scalar = Fraction(1)
    if p.is_constant():
        return p.constant(), factors
    progress = True
    while progress and not p.is_constant() and p.total_degree() > 1:
        progress = False
        used = sorted(p.used_vars(), key=natural_key)
        for x, y in combinations(used, 2):
            for sign in (-1, 1):
                cand = MultiPoly.var(x) + MultiPoly.var(y) * sign
                q = p.exact_div(cand)
                if q is not None:
                    lead, mon = _monic(cand)
                    scalar *= lead
                    push(mon, 1)
                    p = q.trim()
                    progress = True
                    break
            if progress:
                break
    if p.is_constant():
        return scalar * p.constant(), factors
    lead, mon = _monic(p)
    push(mon, 1)
    return scalar * lead, factors


def _as_poly(x) -> MultiPoly:
    if isinstance(x, MultiPoly):
        return x
    return MultiPoly.const(x)


class Frac:
    __slots__ = ("num", "den")

    def __init__(self, num, den: MultiPoly | Rational | None = None):
        num = _as_poly(num)
        self.den: Dict[FactorKey, Tuple[MultiPoly, int]] = {}
        if den is None:
            self.num = num
            return
        den = _as_poly(den)
        scalar, factors = split_factors(den)
        self.num = num * (1 / scalar)
        self.den = factors

    @classmethod
    def _make(cls, num: MultiPoly, den: Dict[FactorKey, Tuple[MultiPoly, int]]) -> "Frac":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = {k: v for k, v in den.items() if v[1] > 0}
        return obj

    @staticmethod
    def coerce(x) -> "Frac":
        if isinstance(x, Frac):
            return x
        if isinstance(x, Entry):
            return x.to_frac()
        return Frac(_as_poly(x))

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = Frac.coerce(other)
        if not other.den and not self.den:
            return Frac._make(self.num + other.num, {})
        den = dict(self.den)
        for k, (p, e) in other.den.items():
            if k in den:
                den[k] = (p, max(den[k][1], e))
            else:
                den[k] = (p, e)
        a = self.num
        b = other.num
        for k, (p, e) in den.items():
            ea = self.den.get(k, (p, 0))[1]
            eb = other.den.get(k, (p, 0))[1]
            if e > ea:
                a = a * p ** (e - ea)
            if e > eb:
                b = b * p ** (e - eb)
        return Frac._make(a + b, den).cancel()

    __radd__ = __add__

    def __neg__(self):
        return Frac._make(-self.num, self.den)

    def __sub__(self, other):
        return self + (-Frac.coerce(other))

    def __rsub__(self, other):
        return Frac.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return Frac._make(self.num * other, self.den)
        other = Frac.coerce(other)
        den = dict(self.den)
        for k, (p, e) in other.den.items():
            den[k] = (p, den.get(k, (p, 0))[1] + e)
        return Frac._make(self.num * other.num, den).cancel()

    __rmul__ = __mul__

    def inverse(self) -> "Frac":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        scalar, factors = split_factors(self.num)
        num = MultiPoly.const(1 / scalar)
        for p, e in self.den.values():
            num = num * p ** e
        return Frac._make(num, factors)

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self * (1 / Fraction(other))
        return self * Frac.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Frac.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Frac(1)
        for _ in range(n):
            out = out * self
        return out

    def cancel(self) -> "Frac":
        if not self.den:
            return self
        num = self.num
        den = dict(self.den)
        if num.is_zero():
            return Frac._make(num, {})
        for k, (p, e) in list(den.items()):
            while e > 0:
                q = _divide(num, p)
                if q is None:
                    break
                num = q
                e -= 1
            den[k] = (p, e)
        return Frac._make(num, den)

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.cancel().den

    def denominator(self) -> MultiPoly:
        d = MultiPoly.const(1)
        for p, e in self.den.values():
            d = d * p ** e
        return d

    def __eq__(self, other):
        try:
            other = Frac.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("Frac is not hashable")

    # -- calculus / substitution ---------------------------------------
    def diff(self, var: str) -> "Frac":
        out = Frac._make(self.num.diff(var), self.den)
        for k, (p, e) in self.den.items():
            dp = p.diff(var)
            if dp.is_zero():
                continue
            den = dict(self.den)
            den[k] = (p, e + 1)
            out = out + Frac._make(-(self.num * dp) * e, den)
        return out

    def subs(self, mapping: Mapping[str, object]) -> "Frac":
        out = Frac(self.num.subs(mapping))
        for p, e in self.den.values():
            q = p.subs(mapping)
            if q.is_zero():
                raise ZeroDivisionError(f"denominator factor {p} vanishes under substitution")
            out = out * Frac(1, q ** e)
        return out

    def eval(self, assignment: Mapping[str, object]) -> Fraction:
        value = self.num.eval(assignment)
        for p, e in self.den.values():
            d = p.eval(assignment)
            if not d:
                raise ZeroDivisionError(f"denominator factor {p} vanishes at the point")
            value /= d ** e
        return value

    def eval_generic(self, assignment, one=1):
        value = self.num.eval_generic(assignment, one)
        for p, e in self.den.values():
            value = value / p.eval_generic(assignment, one) ** e
        return value

    def used_vars(self):
        out = set(self.num.used_vars())
        for p, _ in self.den.values():
            out.update(p.used_vars())
        return out

    def __str__(self):
        if not self.den:
            return str(self.num)
        dens = " * ".join(f"({p})" + (f"^{e}" if e > 1 else "") for p, e in self.den.values())
        return f"({self.num}) / ({dens})"

    __repr__ = lambda self: f"Frac({self})"

    # -- conversion to the tagged simple-pole form ----------------------
    def to_entry(self) -> "Entry":
        f = self.cancel()
        poles: Dict[Tuple[str, str], MultiPoly] = {}
        guard = 0
        while f.den:
            guard += 1
            if guard > 200:
                raise PoleStructureError("partial fraction reduction did not terminate")
            key, (p, e) = next(iter(sorted(f.den.items(), key=lambda kv: str(kv[1][0]))))
            pair = _difference_pair(p)
            if pair is None:
                raise PoleStructureError(f"denominator factor {p} is not a coordinate difference")
            if e != 1:
                raise PoleStructureError(f"pole of order {e} at {p} = 0")
            u, v = pair
            rest = Frac._make(f.num, {k: val for k, val in f.den.items() if k != key})
            q = rest.subs({u: MultiPoly.var(v)}).cancel()
            if q.den:
                raise PoleStructureError(f"residue along {p} = 0 is not polynomial: {q}")
            qn = q.num
            poles[pair] = poles.get(pair, MultiPoly.zero()) + qn
            f = (f - Frac._make(qn, {key: (p, 1)})).cancel()
            if key in f.den:
                raise PoleStructureError(f"could not remove the pole at {p} = 0")
        return Entry(f.num, poles)


def _divide(num: MultiPoly, p: MultiPoly):
    used = p.used_vars()
    if len(p.terms) == 1 and len(used) == 1:
        # monic single variable
        (v,) = used
        j = num.vars.index(v) if v in num.vars else None
        if j is None or any(exp[j] == 0 for exp in num.terms):
            return None
        return MultiPoly._raw(num.vars, {exp[:j] + (exp[j] - 1,) + exp[j + 1:]: c for exp, c in num.terms.items()})
    pair = _difference_pair(p)
    if pair is not None:
        u, v = pair
        if not num.subs({u: MultiPoly.var(v)}).is_zero():
            return None
    return num.exact_div(p)


def _difference_pair(p: MultiPoly):
    """``(u, v)`` if ``p == u - v`` for two variables, else ``None``."""
    if len(p.terms) != 2:
        return None
    plus = minus = None
    for powers, c in p.items():
        if len(powers) != 1 or list(powers.values()) != [1]:
            return None
        (name,) = powers
        if c == 1:
            plus = name
        elif c == -1:
            minus = name
        else:
            return None
    if plus is None or minus is None:
        return None
    return plus, minus


def pole_pair(u: str, v: str) -> Tuple[Tuple[str, str], int]:
    """Canonical orientation of ``1/(u - v)``: returns (pair, sign)."""
    if natural_key(u) <= natural_key(v):
        return (u, v), 1
    return (v, u), -1


class Entry:
    """Polynomial plus simple poles ``sum num / (u - v)``."""

    __slots__ = ("poly", "poles")

    def __init__(self, poly=None, poles: Mapping[Tuple[str, str], MultiPoly] | None = None):
        self.poly = _as_poly(poly if poly is not None else 0)
        canon: Dict[Tuple[str, str], MultiPoly] = {}
        for (u, v), num in (poles or {}).items():
            num = _as_poly(num)
            if num.is_zero():
                continue
            pair, sign = pole_pair(u, v)
            a, b = pair
            rem = num.subs({a: MultiPoly.var(b)})
            quot = (num - rem).exact_div(MultiPoly.var(a) - MultiPoly.var(b))
            if quot is None:
                raise ArithmeticError("reduction modulo a coordinate difference failed")
            self.poly = self.poly + quot * sign
            if rem.is_zero():
                continue
            canon[pair] = canon.get(pair, MultiPoly.zero()) + rem * sign
        self.poles = {k: v for k, v in canon.items() if not v.is_zero()}

    @classmethod
    def coerce(cls, x) -> "Entry":
        if isinstance(x, Entry):
            return x
        if isinstance(x, Frac):
            return x.to_entry()
        return cls(_as_poly(x))

    def __add__(self, other):
        other = Entry.coerce(other)
        poles = dict(self.poles)
        for k, v in other.poles.items():
            poles[k] = poles.get(k, MultiPoly.zero()) + v
        return Entry(self.poly + other.poly, poles)

    __radd__ = __add__

    def __neg__(self):
        return Entry(-self.poly, {k: -v for k, v in self.poles.items()})

    def __sub__(self, other):
        return self + (-Entry.coerce(other))

    def __rsub__(self, other):
        return Entry.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Entry):
            if not other.poles:
                other = other.poly
            elif not self.poles:
                return other * self.poly
            else:
                return (self.to_frac() * other.to_frac()).to_entry()
        if isinstance(other, Frac):
            return (self.to_frac() * other).to_entry()
        return Entry(self.poly * other, {k: v * other for k, v in self.poles.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.poly.is_zero() and not self.poles

    def __eq__(self, other):
        other = Entry.coerce(other)
        return (self - other).is_zero()

    __hash__ = None

    def to_frac(self) -> Frac:
        out = Frac(self.poly)
        for (u, v), num in self.poles.items():
            out = out + Frac(num, MultiPoly.var(u) - MultiPoly.var(v))
        return out

    def pole_vars(self):
        return {x for pair in self.poles for x in pair}

    def used_vars(self):
        out = set(self.poly.used_vars())
        for (u, v), num in self.poles.items():
            out.update((u, v))
            out.update(num.used_vars())
        return out

    def subs(self, mapping: Mapping[str, object]) -> "Entry | Frac":
        """Substitute; the result is a ``Frac`` when the poles stop being coordinate differences."""
        if self.pole_vars() & set(mapping):
            f = self.to_frac().subs(mapping)
            try:
                return f.to_entry()
            except PoleStructureError:
                return f.cancel()
        return Entry(self.poly.subs(mapping), {k: v.subs(mapping) for k, v in self.poles.items()})

    def map_polys(self, fn) -> "Entry":
        return Entry(fn(self.poly), {k: fn(v) for k, v in self.poles.items()})

    def diff(self, var: str) -> Frac:
        return self.to_frac().diff(var)

    def eval(self, assignment: Mapping[str, object]) -> Fraction:
        total = self.poly.eval(assignment)
        for (u, v), num in self.poles.items():
            d = Fraction(assignment[u]) - Fraction(assignment[v])
            if not d:
                raise ZeroDivisionError(f"pole {u} = {v} hit")
            total += num.eval(assignment) / d
        return total

    def eval_generic(self, assignment, one=1):
        total = self.poly.eval_generic(assignment, one)
        for (u, v), num in self.poles.items():
            total = total + num.eval_generic(assignment, one) / (assignment[u] - assignment[v])
        return total

    def weighted_degrees(self, weights) -> set:
        out = set(self.poly.weighted_degrees(weights))
        for (u, v), num in self.poles.items():
            wp = Fraction(weights.get(u, 0))
            out.update(d - wp for d in num.weighted_degrees(weights))
        return out

    def __str__(self):
        parts = [str(self.poly)] if not self.poly.is_zero() or not self.poles else []
        for (u, v), num in sorted(self.poles.items(), key=lambda kv: (natural_key(kv[0][0]), natural_key(kv[0][1]))):
            parts.append(f"({num})/({u} - {v})")
        return " + ".join(parts)

    def __repr__(self):
        return f"Entry({self})"

    def to_json(self) -> dict:
        data = self.poly.to_json()
        if self.poles:
            data["poles"] = [
                {"pair": [u, v], "num": num.to_json(), "exp": 1}
                for (u, v), num in sorted(self.poles.items(), key=lambda kv: (natural_key(kv[0][0]), natural_key(kv[0][1])))
            ]
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "Entry":
        poly = MultiPoly.from_json(data)
        poles = {}
        for item in data.get("poles", []):
            if item.get("exp", 1) != 1:
                raise ValueError("only simple poles are representable")
            u, v = item["pair"]
            poles[(u, v)] = MultiPoly.from_json(item["num"])
        return cls(poly, poles)


def as_entries(values: Iterable) -> list:
    return [Entry.coerce(v) for v in values]
