"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial carries an ordered tuple of variable names and a dict mapping
exponent vectors (same arity as the variable tuple) to ``Fraction``
coefficients.  Binary operations between polynomials over different variable
tuples align the two by name, so callers rarely need to think about ordering.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Mapping, Tuple, Union

Exp = Tuple[int, ...]
Scalar = Union[int, Fraction]

_NAT = re.compile(r"(\d+)")


def natural_key(name: str):
    """Sort key ordering ``b2`` before ``b10``."""
    return tuple(int(tok) if tok.isdigit() else tok for tok in _NAT.split(name))


class MultiPoly:
    __slots__ = ("vars", "terms")

    def __init__(self, vars: Iterable[str] = (), terms: Mapping[Exp, Scalar] | None = None):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variable names in {self.vars}")
        n = len(self.vars)
        clean: Dict[Exp, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != n:
                raise ValueError(f"exponent {exp} does not match arity {n}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent {exp}")
            c = Fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self.terms = clean

    @classmethod
    def _raw(cls, vars: Tuple[str, ...], terms: Dict[Exp, Fraction]) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj.vars = vars
        obj.terms = terms
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, c: Scalar, vars: Iterable[str] = ()) -> "MultiPoly":
        vars = tuple(vars)
        c = Fraction(c)
        return cls._raw(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def var(cls, name: str, vars: Iterable[str] | None = None) -> "MultiPoly":
        vars = tuple(vars) if vars is not None else (name,)
        if name not in vars:
            vars = vars + (name,)
        exp = tuple(1 if v == name else 0 for v in vars)
        return cls._raw(vars, {exp: Fraction(1)})

    @classmethod
    def monomial(cls, powers: Mapping[str, int], coeff: Scalar = 1) -> "MultiPoly":
        vars = tuple(powers)
        return cls(vars, {tuple(powers[v] for v in vars): coeff})

    @classmethod
    def zero(cls, vars: Iterable[str] = ()) -> "MultiPoly":
        return cls._raw(tuple(vars), {})

    # -- alignment ----------------------------------------------------
    def with_vars(self, vars: Tuple[str, ...]) -> "MultiPoly":
        """Re-express over ``vars``, which must contain every used variable."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = {v: i for i, v in enumerate(vars)}
        idx = []
        for j, v in enumerate(self.vars):
            if v in pos:
                idx.append((j, pos[v]))
            elif any(exp[j] for exp in self.terms):
                raise ValueError(f"variable {v!r} is used but missing from {vars}")
        n = len(vars)
        out = {}
        for exp, c in self.terms.items():
            new = [0] * n
            for j, i in idx:
                new[i] = exp[j]
            out[tuple(new)] = c
        return MultiPoly._raw(vars, out)

    def _align(self, other: "MultiPoly"):
        if self.vars == other.vars:
            return self.vars, self.terms, other.terms
        extra = tuple(v for v in other.vars if v not in self.vars)
        vars = self.vars + extra
        return vars, self.with_vars(vars).terms, other.with_vars(vars).terms

    @staticmethod
    def _coerce(x) -> "MultiPoly":
        if isinstance(x, MultiPoly):
            return x
        if isinstance(x, (int, Rational)):
            return MultiPoly.const(x)
        return NotImplemented

    # -- ring operations ---------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vars, a, b = self._align(other)
        out = dict(a)
        for exp, c in b.items():
            v = out.get(exp)
            if v is None:
                out[exp] = c
            else:
                v += c
                if v:
                    out[exp] = v
                else:
                    del out[exp]
        return MultiPoly._raw(vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            c = Fraction(other)
            if not c:
                return MultiPoly._raw(self.vars, {})
            return MultiPoly._raw(self.vars, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vars, a, b = self._align(other)
        out: Dict[Exp, Fraction] = {}
        get = out.get
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
        return MultiPoly._raw(vars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("polynomial powers must be integers")
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    def __hash__(self):
        return hash(self.key())

    def key(self):
        """Hashable canonical form independent of the variable tuple."""
        return frozenset(
            (tuple((v, e) for v, e in zip(self.vars, exp) if e), c) for exp, c in self.terms.items()
        )

    # -- predicates / accessors --------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(exp) for exp in self.terms)

    def constant(self) -> Fraction:
        """Value of a constant polynomial; raises if non-constant."""
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def used_vars(self) -> Tuple[str, ...]:
        return tuple(v for j, v in enumerate(self.vars) if any(exp[j] for exp in self.terms))

    def trim(self) -> "MultiPoly":
        return self.with_vars(self.used_vars())

    def degree(self, var: str) -> int:
        """Degree in ``var``; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        if var not in self.vars:
            return 0
        j = self.vars.index(var)
        return max(exp[j] for exp in self.terms)

    def total_degree(self, among: Iterable[str] | None = None) -> int:
        if not self.terms:
            return -1
        if among is None:
            return max(sum(exp) for exp in self.terms)
        idx = [j for j, v in enumerate(self.vars) if v in set(among)]
        return max(sum(exp[j] for j in idx) for exp in self.terms)

    def weighted_degrees(self, weights: Mapping[str, Fraction]) -> set:
        """Set of weighted degrees of the monomials; unknown variables weigh 0."""
        w = [Fraction(weights.get(v, 0)) for v in self.vars]
        return {sum((wi * e for wi, e in zip(w, exp)), Fraction(0)) for exp in self.terms}

    def coeffs_in(self, var: str) -> Dict[int, "MultiPoly"]:
        """Split as a polynomial in ``var``; coefficients keep the same variable tuple."""
        if var not in self.vars:
            return {0: self} if self.terms else {}
        j = self.vars.index(var)
        out: Dict[int, Dict[Exp, Fraction]] = {}
        for exp, c in self.terms.items():
            k = exp[j]
            e = exp[:j] + (0,) + exp[j + 1:]
            out.setdefault(k, {})[e] = c
        return {k: MultiPoly._raw(self.vars, t) for k, t in out.items()}

    def coeff(self, var: str, k: int) -> "MultiPoly":
        return self.coeffs_in(var).get(k, MultiPoly.zero(self.vars))

    def items(self):
        """Iterate ``({var: exp}, coeff)`` pairs."""
        for exp, c in self.terms.items():
            yield {v: e for v, e in zip(self.vars, exp) if e}, c

    # -- calculus and substitution -----------------------------------
    def diff(self, var: str, times: int = 1) -> "MultiPoly":
        if var not in self.vars:
            return MultiPoly._raw(self.vars, {})
        j = self.vars.index(var)
        out = {}
        for exp, c in self.terms.items():
            e = exp[j]
            if e < times:
                continue
            f = 1
            for r in range(times):
                f *= e - r
            new = exp[:j] + (e - times,) + exp[j + 1:]
            out[new] = c * f
        return MultiPoly._raw(self.vars, out)

    def eval(self, assignment: Mapping[str, Scalar]) -> Fraction:
        """Exact value at a full rational assignment."""
        missing = [v for v in self.used_vars() if v not in assignment]
        if missing:
            raise ValueError(f"no value assigned to {missing}")
        vals = [Fraction(assignment[v]) if v in assignment else Fraction(0) for v in self.vars]
        total = Fraction(0)
        for exp, c in self.terms.items():
            term = c
            for x, e in zip(vals, exp):
                if e:
                    term *= x ** e
            total += term
        return total

    def eval_generic(self, assignment: Mapping[str, object], one=1):
        """Evaluate with arbitrary numeric values (floats, mpmath numbers)."""
        missing = [v for v in self.used_vars() if v not in assignment]
        if missing:
            raise ValueError(f"no value assigned to {missing}")
        vals = [assignment.get(v) for v in self.vars]
        total = 0 * one
        for exp, c in self.terms.items():
            term = one * c.numerator / c.denominator
            for x, e in zip(vals, exp):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    def subs(self, mapping: Mapping[str, Union["MultiPoly", Scalar]]) -> "MultiPoly":
        """Substitute polynomials or scalars for some variables."""
        mapping = {v: MultiPoly._coerce(x) for v, x in mapping.items() if v in self.vars}
        if not mapping:
            return self
        keep = tuple(v for v in self.vars if v not in mapping)
        keep_idx = [j for j, v in enumerate(self.vars) if v not in mapping]
        sub_idx = [(j, mapping[v]) for j, v in enumerate(self.vars) if v in mapping]
        extra = []
        for _, p in sub_idx:
            for v in p.vars:
                if v not in keep and v not in extra:
                    extra.append(v)
        vars = keep + tuple(extra)
        pad = (0,) * len(extra)
        powers: Dict[Tuple[int, int], MultiPoly] = {}

        def power(j, p, e):
            key = (j, e)
            if key not in powers:
                if e == 1:
                    powers[key] = p.with_vars(vars) if set(p.used_vars()) <= set(vars) else p
                else:
                    powers[key] = power(j, p, e - 1) * power(j, p, 1)
            return powers[key]

        result: Dict[Exp, Fraction] = {}
        groups: Dict[Tuple[int, ...], Dict[Exp, Fraction]] = {}
        for exp, c in self.terms.items():
            sub_exp = tuple(exp[j] for j, _ in sub_idx)
            kept = tuple(exp[j] for j in keep_idx) + pad
            groups.setdefault(sub_exp, {})[kept] = c
        acc = MultiPoly._raw(vars, result)
        for sub_exp, kept_terms in groups.items():
            factor = MultiPoly.const(1, vars)
            for (j, p), e in zip(sub_idx, sub_exp):
                if e:
                    factor = factor * power(j, p, e)
            acc = acc + MultiPoly._raw(vars, kept_terms) * factor
        return acc.with_vars(vars) if set(acc.used_vars()) <= set(vars) else acc

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        vars = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(vars)) != len(vars):
            return self.subs({a: MultiPoly.var(b) for a, b in mapping.items()})
        return MultiPoly._raw(vars, dict(self.terms))

    # -- division ------------------------------------------------------
    def exact_div(self, other: "MultiPoly") -> "MultiPoly | None":
        """Quotient if ``other`` divides ``self`` exactly, else ``None``."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        vars, a, b = self._align(other)
        lead_b = max(b)
        cb = b[lead_b]
        rem = dict(a)
        quot: Dict[Exp, Fraction] = {}
        while rem:
            lead = max(rem)
            shift = tuple(x - y for x, y in zip(lead, lead_b))
            if any(s < 0 for s in shift):
                return None
            q = rem[lead] / cb
            quot[shift] = quot.get(shift, 0) + q
            for eb, c in b.items():
                e = tuple(x + y for x, y in zip(eb, shift))
                v = rem.get(e, 0) - q * c
                if v:
                    rem[e] = v
                else:
                    rem.pop(e, None)
        return MultiPoly._raw(vars, {e: c for e, c in quot.items() if c})

    def canonical_lead(self) -> Fraction:
        """Leading coefficient in lex order over naturally sorted variable names."""
        if not self.terms:
            return Fraction(0)
        order = sorted(range(len(self.vars)), key=lambda j: natural_key(self.vars[j]))
        best = max(self.terms, key=lambda exp: tuple(exp[j] for j in order))
        return self.terms[best]

    # -- display / serialization ---------------------------------------
    def sorted_terms(self):
        order = sorted(range(len(self.vars)), key=lambda j: natural_key(self.vars[j]))

        def key(exp):
            return (-sum(exp), tuple(-exp[j] for j in order))

        return sorted(self.terms.items(), key=lambda kv: key(kv[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                (v if e == 1 else f"{v}^{e}") for v, e in sorted(zip(self.vars, exp), key=lambda ve: natural_key(ve[0])) if e
            )
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"MultiPoly({self})"

    def to_json(self) -> dict:
        p = self.trim()
        vars = sorted(p.vars, key=natural_key)
        p = p.with_vars(tuple(vars))
        return {
            "vars": list(vars),
            "terms": [
                {"exp": list(exp), "num": str(c.numerator), "den": str(c.denominator)}
                for exp, c in sorted(p.terms.items(), reverse=True)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        vars = tuple(data["vars"])
        terms = {}
        for t in data["terms"]:
            terms[tuple(t["exp"])] = Fraction(int(t["num"]), int(t["den"]))
        return cls(vars, terms)

    def to_sympy(self, symbols: Mapping[str, object] | None = None):
        import sympy

        syms = {v: (symbols or {}).get(v) or sympy.Symbol(v) for v in self.vars}
        expr = sympy.Integer(0)
        for exp, c in self.terms.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for v, e in zip(self.vars, exp):
                if e:
                    term *= syms[v] ** e
            expr += term
        return expr


def var(name: str) -> MultiPoly:
    return MultiPoly.var(name)


def const(c: Scalar) -> MultiPoly:
    return MultiPoly.const(c)


def poly_vars(*names: str):
    return tuple(MultiPoly.var(n) for n in names)
