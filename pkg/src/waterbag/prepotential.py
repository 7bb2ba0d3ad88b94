"""Prepotentials from flat structure tensors, and the verification battery.

A prepotential is stored as

    F = F0(t) + sum_i k_i F1_i(t, b_i) + sum_{i<j} C_ij (b_i - b_j)^2 log (b_i - b_j)^2

with polynomial ``F0``, ``F1_i`` and coefficients ``C_ij`` (polynomials in the
parameters).  The gauge is fixed by dropping every monomial of degree at most
two in the flat coordinates.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Sequence, Tuple

from .exactalg.frac import Entry, Frac
from .exactalg.linalg import SingularMatrixError, inverse as rational_inverse
from .exactalg.multipoly import MultiPoly, natural_key
from .frobenius import CTensor, MetricTensor, add_values, flat_structure, identity_vector, tidy
from .superpotential import WaterBagPotential, make_waterbag

GAUGE = "no monomials of total degree <= 2 in the flat coordinates"


class IntegrabilityError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    check: str
    passed: bool
    witnesses: List[dict] = field(default_factory=list)
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        out = {"check": self.check, "status": self.status, "witnesses": self.witnesses}
        if self.details:
            out["details"] = self.details
        return out


def sample_points(
    names: Sequence[str],
    count: int,
    seed: int,
    *,
    distinct: Sequence[str] = (),
    nonzero: Sequence[str] = (),
    spread: int = 9,
) -> List[Dict[str, Fraction]]:
    """Seeded random rational points; ``distinct`` names get pairwise distinct values."""
    rng = random.Random(seed)
    points = []
    while len(points) < count:
        pt = {}
        for n in names:
            while True:
                v = Fraction(rng.randint(-spread, spread), rng.randint(1, 5))
                if n in nonzero and v == 0:
                    continue
                if n in distinct and any(pt.get(m) == v for m in distinct if m != n):
                    continue
                break
            pt[n] = v
        points.append(pt)
    return points


def format_point(point: Mapping[str, Fraction]) -> Dict[str, str]:
    return {k: str(v) for k, v in sorted(point.items(), key=lambda kv: natural_key(kv[0]))}


# ---------------------------------------------------------------------------
# prepotential data


def _x2logx2_third(u: str, v: str, coeff: MultiPoly) -> Dict[Tuple[str, str, str], Entry]:
    """Third derivatives of ``coeff (u - v)^2 log (u - v)^2`` in the (u, v) directions."""
    four = coeff * 4
    return {
        (u, u, u): Entry(None, {(u, v): four}),
        (u, u, v): Entry(None, {(u, v): -four}),
        (u, v, v): Entry(None, {(u, v): four}),
        (v, v, v): Entry(None, {(u, v): -four}),
    }


@dataclass
class PrepotentialDecomposition:
    chart: Tuple[str, ...]
    t_names: Tuple[str, ...]
    b_names: Tuple[str, ...]
    k_names: Tuple[str, ...]
    F0: MultiPoly
    F1: Dict[str, MultiPoly]  # keyed by b name, k factor pulled out
    log_terms: Dict[Tuple[str, str], MultiPoly]  # coefficient of (u - v)^2 log (u - v)^2
    gauge: str = GAUGE

    @property
    def N(self) -> int:
        return len(self.t_names)

    def k_of(self, b: str) -> str:
        return self.k_names[self.b_names.index(b)]

    def polynomial(self) -> MultiPoly:
        out = self.F0
        for b, f in self.F1.items():
            out = out + MultiPoly.var(self.k_of(b)) * f
        return out

    def log_coeffs(self) -> Dict[Tuple[str, str], Fraction]:
        """Scalar per ordered pair multiplying ``k_i k_j (b_i - b_j)^2 log (b_i - b_j)^2``."""
        out = {}
        for (u, v), coeff in self.log_terms.items():
            kk = MultiPoly.var(self.k_of(u)) * MultiPoly.var(self.k_of(v))
            q = coeff.exact_div(kk)
            if q is None or not q.is_constant():
                raise ValueError(f"log coefficient {coeff} is not a rational multiple of {kk}")
            out[(u, v)] = q.constant() / 2
            out[(v, u)] = q.constant() / 2
        return out

    def third_derivatives(self) -> CTensor:
        poly = self.polynomial()
        entries = {}
        for idx in itertools.combinations_with_replacement(self.chart, 3):
            d = poly
            for x in idx:
                d = d.diff(x)
            entries[idx] = Entry(d)
        for (u, v), coeff in self.log_terms.items():
            for idx, val in _x2logx2_third(u, v, coeff).items():
                key = tuple(sorted(idx, key=self.chart.index))
                entries[key] = entries.get(key, Entry()) + val
        return CTensor(self.chart, entries)

    def to_sympy(self, symbols: Mapping[str, object] | None = None):
        import sympy

        syms = dict(symbols or {})
        names = set(self.chart) | set(self.k_names)
        for n in names:
            syms.setdefault(n, sympy.Symbol(n))
        expr = self.polynomial().to_sympy(syms)
        for (u, v), coeff in self.log_terms.items():
            x = syms[u] - syms[v]
            expr += coeff.to_sympy(syms) * x ** 2 * sympy.log(x ** 2)
        return expr

    def to_json(self) -> dict:
        return {
            "chart": list(self.chart),
            "t": list(self.t_names),
            "b": list(self.b_names),
            "k": list(self.k_names),
            "gauge": self.gauge,
            "F0": self.F0.to_json(),
            "F1": {str(self.b_names.index(b) + 1): f.to_json() for b, f in self.F1.items()},
            "log": [
                {"pair": [u, v], "coeff": c.to_json()}
                for (u, v), c in sorted(self.log_terms.items(), key=lambda kv: (natural_key(kv[0][0]), natural_key(kv[0][1])))
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PrepotentialDecomposition":
        b_names = tuple(data["b"])
        return cls(
            chart=tuple(data["chart"]),
            t_names=tuple(data["t"]),
            b_names=b_names,
            k_names=tuple(data["k"]),
            F0=MultiPoly.from_json(data["F0"]),
            F1={b_names[int(i) - 1]: MultiPoly.from_json(f) for i, f in data["F1"].items()},
            log_terms={tuple(item["pair"]): MultiPoly.from_json(item["coeff"]) for item in data["log"]},
            gauge=data.get("gauge", GAUGE),
        )


# ---------------------------------------------------------------------------
# integration


def _falling(exp: Mapping[str, int], idx: Sequence[str]) -> int:
    need: Dict[str, int] = {}
    for x in idx:
        need[x] = need.get(x, 0) + 1
    out = 1
    for x, n in need.items():
        e = exp.get(x, 0)
        if e < n:
            return 0
        out *= factorial(e) // factorial(e - n)
    return out


def integrate_polynomial_tensor(entries: Mapping[Tuple[str, ...], MultiPoly], coords: Sequence[str]) -> MultiPoly:
    """Polynomial ``F`` with prescribed third derivatives, in the zero gauge.

    Each monomial of ``F`` is determined from every index triple dividing it;
    disagreeing determinations, or a failed re-differentiation, mean the
    tensor is not a third derivative.
    """
    coords = tuple(coords)
    found: Dict[Tuple[Tuple[str, int], ...], Tuple[Fraction, Tuple[str, ...]]] = {}
    for idx, poly in entries.items():
        for powers, c in poly.items():
            mono = dict(powers)
            for x in idx:
                mono[x] = mono.get(x, 0) + 1
            factor = _falling(mono, idx)
            value = c / factor
            key = tuple(sorted(mono.items()))
            if key in found and found[key][0] != value:
                raise IntegrabilityError(
                    f"monomial {MultiPoly.monomial(mono)}: coefficient {found[key][0]} from {found[key][1]} "
                    f"but {value} from {idx}"
                )
            found[key] = (value, tuple(idx))
    F = MultiPoly.zero()
    for key, (value, _) in found.items():
        F = F + MultiPoly.monomial(dict(key), value)
    for idx in itertools.combinations_with_replacement(coords, 3):
        d = F
        for x in idx:
            d = d.diff(x)
        want = entries.get(idx, MultiPoly.zero())
        if not (d - want).is_zero():
            raise IntegrabilityError(f"third derivative {idx} of the candidate does not reproduce the tensor")
    return F


def _default_k(b: str) -> str:
    return "k" + b[1:]


def integrate_F(c_flat: CTensor, eta_flat: MetricTensor | None = None, k_of: Mapping[str, str] | None = None) -> PrepotentialDecomposition:
    """Integrate a flat (3,0) tensor to the decomposed prepotential."""
    chart = c_flat.chart
    t_names = tuple(n for n in chart if n.startswith("t"))
    b_names = tuple(n for n in chart if n.startswith("b"))
    k_map = dict(k_of) if k_of else {b: _default_k(b) for b in b_names}
    k_names = tuple(k_map[b] for b in b_names)
    if eta_flat is not None and not eta_flat.is_constant_in(chart):
        raise ValueError("metric is not constant: chart is not flat")

    entries: Dict[Tuple[str, ...], Entry] = {}
    for idx in c_flat.index_tuples():
        val = c_flat[idx]
        if isinstance(val, Frac):
            val = val.to_entry()
        entries[idx] = val

    # log block read off the (u, u, u) poles
    log_terms: Dict[Tuple[str, str], MultiPoly] = {}
    for u in b_names:
        for (a, b), num in entries[(u, u, u)].poles.items():
            if a != u:
                continue
            if set(num.used_vars()) & set(chart):
                raise IntegrabilityError(f"pole numerator {num} on {a} - {b} depends on coordinates")
            log_terms[(a, b)] = num * Fraction(1, 4)
    for (u, v), coeff in log_terms.items():
        for idx, val in _x2logx2_third(u, v, coeff).items():
            key = c_flat.key(idx)
            entries[key] = entries[key] - val
    leftover = [idx for idx, val in entries.items() if val.poles]
    if leftover:
        raise IntegrabilityError(f"pole part does not match the x^2 log x^2 pattern at {leftover}")

    F = integrate_polynomial_tensor({idx: v.poly for idx, v in entries.items() if not v.poly.is_zero()}, chart)
    F0 = MultiPoly.zero()
    F1: Dict[str, MultiPoly] = {b: MultiPoly.zero() for b in b_names}
    kset = set(k_names)
    for powers, c in F.items():
        kpow = {x: e for x, e in powers.items() if x in kset}
        mono = MultiPoly.monomial({x: e for x, e in powers.items() if x not in kset}, c)
        if not kpow:
            F0 = F0 + mono
        elif len(kpow) == 1 and list(kpow.values()) == [1]:
            (k,) = kpow
            F1[b_names[k_names.index(k)]] += mono
        else:
            raise IntegrabilityError(f"polynomial part has a term {MultiPoly.monomial(powers, c)} beyond linear order in k")
    for b, f in F1.items():
        stray = set(f.used_vars()) - set(t_names) - {b}
        if stray:
            raise IntegrabilityError(f"k-linear block for {b} depends on {sorted(stray)}")
    return PrepotentialDecomposition(chart, t_names, b_names, k_names, F0, F1, log_terms)


def construct(W: WaterBagPotential, route: str = "closed"):
    """``(chart, eta_flat, c_flat, prepotential)`` for a superpotential."""
    chart, eta, c = flat_structure(W, route)
    k_of = dict(zip(W.b_names, W.params))
    return chart, eta, c, integrate_F(c, eta, k_of)


# ---------------------------------------------------------------------------
# exact WDVV


def _raised(cvals: Mapping, chart: Sequence[str], etainv: List[List[Fraction]]):
    n = len(chart)
    pos = {x: i for i, x in enumerate(chart)}
    C = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for idx, v in cvals.items():
        for a, b, c in set(itertools.permutations(idx)):
            C[pos[a]][pos[b]][pos[c]] = v
    X = [[[sum(C[a][b][l] * etainv[l][m] for l in range(n)) for m in range(n)] for b in range(n)] for a in range(n)]
    return C, X


def associator_residuals(C, X) -> List[Tuple[Tuple[int, int, int, int], Fraction]]:
    n = len(C)
    out = []
    for a, b, g, d in itertools.product(range(n), repeat=4):
        r = sum(X[a][b][m] * C[m][g][d] - X[d][b][m] * C[m][g][a] for m in range(n))
        if r:
            out.append(((a, b, g, d), r))
    return out


def _degree_bound(c: CTensor) -> int:
    """Crude bound on the total degree of a cleared associator numerator."""
    deg = 0
    factors: Dict[object, int] = {}
    for v in c.entries.values():
        if isinstance(v, Entry):
            v = v.to_frac()
        deg = max(deg, v.num.total_degree())
        for key, (f, e) in v.den.items():
            factors[key] = max(factors.get(key, 0), e * f.total_degree())
    return 2 * (deg + sum(factors.values())) + 1


def wdvv_check(
    P: PrepotentialDecomposition | CTensor,
    eta_flat: MetricTensor,
    sample: Sequence[Mapping[str, Fraction]],
    check: str = "wdvv",
) -> CheckReport:
    """Exact associativity of ``c eta^-1 c`` at rational sample points."""
    c = P.third_derivatives() if isinstance(P, PrepotentialDecomposition) else P
    chart = c.chart
    witnesses = []
    ok = True
    skipped = 0
    if list(eta_flat.chart) != list(chart):
        raise ValueError("metric and tensor charts must be in the same order")
    for pt in sample:
        try:
            etainv = rational_inverse(eta_flat.matrix_at(pt))
        except SingularMatrixError:
            skipped += 1
            witnesses.append({"point": format_point(pt), "status": "skipped", "reason": "singular metric"})
            continue
        try:
            C, X = _raised(c.eval(pt), chart, etainv)
        except ZeroDivisionError:
            skipped += 1
            witnesses.append({"point": format_point(pt), "status": "skipped", "reason": "pole hit"})
            continue
        bad = associator_residuals(C, X)
        item = {"point": format_point(pt), "status": "pass" if not bad else "fail", "nonzero": len(bad)}
        if bad:
            ok = False
            (a, b, g, d), r = bad[0]
            item["first"] = {"indices": [chart[a], chart[b], chart[g], chart[d]], "residual": str(r)}
        witnesses.append(item)
    checked = len(sample) - skipped
    details = {
        "points_checked": checked,
        "points_skipped": skipped,
        "degree_bound": _degree_bound(c),
        "note": "associator numerators have total degree at most degree_bound after clearing the b-difference "
        "and k denominators; a nonzero one vanishes at a random grid point with probability at most "
        "degree_bound / grid_size",
    }
    return CheckReport(check, ok and checked > 0, witnesses, details)


# ---------------------------------------------------------------------------
# symbolic helpers on Frac-valued tensors


def frac_matrix_inverse(m: List[List[object]]) -> List[List[Frac]]:
    n = len(m)
    a = [[Frac.coerce(x) for x in row] + [Frac(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if pivot is None:
            raise SingularMatrixError("symbolic matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col].inverse()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def inverse_metric(eta: MetricTensor) -> Dict[Tuple[str, str], Frac]:
    inv = frac_matrix_inverse(eta.matrix())
    return {(a, b): inv[i][j] for i, a in enumerate(eta.chart) for j, b in enumerate(eta.chart)}


def raise_last(c: CTensor, eta: MetricTensor) -> Dict[Tuple[str, str, str], object]:
    """Structure functions ``c_ab^g = c_abd eta^dg`` (entries tidied)."""
    etainv = inverse_metric(eta)
    chart = c.chart
    out = {}
    for a, b in itertools.combinations_with_replacement(chart, 2):
        for g in chart:
            total = Frac(0)
            for d in chart:
                e = etainv[(d, g)]
                if e.is_zero():
                    continue
                v = c[(a, b, d)]
                if v.is_zero():
                    continue
                total = total + Frac.coerce(v) * e
            val = tidy(total)
            out[(a, b, g)] = val
            out[(b, a, g)] = val
    return out


def _diff(v, x):
    return tidy(v.diff(x)) if isinstance(v, Entry) else tidy(Frac.coerce(v).diff(x))


def _is_zero_value(v) -> bool:
    return tidy(v).is_zero() if isinstance(v, Frac) else v.is_zero()


# ---------------------------------------------------------------------------
# grading and Euler field


@dataclass
class EulerField:
    """``E = (1/(N+1)) [sum (N+2-i) t^i d/dt^i + sum b d/db]``."""

    N: int
    components: Dict[str, MultiPoly]
    k_names: Tuple[str, ...]

    @property
    def charge(self) -> Fraction:
        return Fraction(self.N - 1, self.N + 1)

    @classmethod
    def for_chart(cls, t_names: Sequence[str], b_names: Sequence[str], k_names: Sequence[str], N: int) -> "EulerField":
        comps = {}
        for t in t_names:
            i = int(t[1:])
            comps[t] = MultiPoly.var(t) * Fraction(N + 2 - i, N + 1)
        for b in b_names:
            comps[b] = MultiPoly.var(b) * Fraction(1, N + 1)
        return cls(N, comps, tuple(k_names))

    def weights(self) -> Dict[str, Fraction]:
        """Flat-coordinate weights ``(N+1) * E-eigenvalue``, with ``k`` of weight ``N+1``."""
        w = {}
        for x, comp in self.components.items():
            w[x] = comp.diff(x).constant() * (self.N + 1)
        for k in self.k_names:
            w[k] = Fraction(self.N + 1)
        return w

    def apply(self, f: MultiPoly, extended: bool = False) -> MultiPoly:
        out = MultiPoly.zero()
        for x, comp in self.components.items():
            out = out + comp * f.diff(x)
        if extended:
            for k in self.k_names:
                out = out + MultiPoly.var(k) * f.diff(k)
        return out


def homogeneity_check(P: PrepotentialDecomposition, E: EulerField | None = None) -> CheckReport:
    """Weighted degrees of ``F0`` and ``F1``, and the extended Euler identity modulo quadratics."""
    N = P.N
    E = E or EulerField.for_chart(P.t_names, P.b_names, P.k_names, N)
    w = E.weights()
    witnesses = []
    ok = True
    deg0 = P.F0.weighted_degrees(w)
    good0 = deg0 <= {Fraction(2 * N + 4)}
    witnesses.append({"block": "F0", "degrees": sorted(str(d) for d in deg0), "expected": str(2 * N + 4), "ok": good0})
    ok &= good0
    for b, f in P.F1.items():
        dg = f.weighted_degrees(w)
        good = dg <= {Fraction(N + 3)}
        witnesses.append({"block": f"F1[{b}]", "degrees": sorted(str(d) for d in dg), "expected": str(N + 3), "ok": good})
        ok &= good
    # L^ext_E F - (3 - d) F on the polynomial part
    scale = 3 - E.charge
    poly = P.polynomial()
    resid = E.apply(poly, extended=True) - poly * scale
    good_poly = resid.is_zero()
    witnesses.append({"block": "polynomial Euler identity", "residual": str(resid), "ok": good_poly})
    ok &= good_poly
    # log block: E(x) = x/(N+1) and k d/dk doubles k_i k_j, leaving a quadratic defect
    defect = MultiPoly.zero()
    for (u, v), coeff in P.log_terms.items():
        x = MultiPoly.var(u) - MultiPoly.var(v)
        ex = E.apply(x)
        ratio = ex.exact_div(x) if not x.is_zero() else None
        if ratio is None or not ratio.is_constant():
            ok = False
            witnesses.append({"block": f"log[{u},{v}]", "ok": False, "reason": "Euler field does not scale the log argument"})
            continue
        r = ratio.constant()
        kdeg = sum(coeff.weighted_degrees({k: 1 for k in P.k_names}))
        coeff_ext = E.apply(coeff, extended=True)
        # E(coeff x^2 log x^2) = E(coeff) x^2 log x^2 + coeff (2 r) (x^2 log x^2 + x^2)
        log_factor = coeff_ext + coeff * (2 * r)
        good = (log_factor - coeff * scale).is_zero()
        defect = defect + coeff * (2 * r) * x ** 2
        witnesses.append({"block": f"log[{u},{v}]", "k_degree": kdeg, "ok": good})
        ok &= good
    coord_deg = defect.total_degree(P.chart) if not defect.is_zero() else 0
    good_defect = coord_deg <= 2
    ok &= good_defect
    return CheckReport(
        "homogeneity",
        ok,
        witnesses,
        {"scale": str(scale), "defect": str(defect), "defect_degree": coord_deg},
    )


# ---------------------------------------------------------------------------
# intersection form and Lie derivatives


def _lie_contravariant2(X: Mapping[str, MultiPoly], T: Mapping[Tuple[str, str], object], chart, k_names=(), extended=False):
    out = {}
    for i, j in itertools.product(chart, repeat=2):
        acc = Frac(0)
        for k in chart:
            xk = X.get(k)
            if xk is not None and not xk.is_zero():
                acc = acc + Frac(xk) * Frac.coerce(_diff(T[(i, j)], k))
            dxi = X.get(i, MultiPoly.zero()).diff(k)
            if not dxi.is_zero():
                acc = acc - Frac.coerce(T[(k, j)]) * dxi
            dxj = X.get(j, MultiPoly.zero()).diff(k)
            if not dxj.is_zero():
                acc = acc - Frac.coerce(T[(i, k)]) * dxj
        if extended:
            for kk in k_names:
                acc = acc + Frac.coerce(_diff(T[(i, j)], kk)) * MultiPoly.var(kk)
        out[(i, j)] = acc
    return out


def _same(A, B, chart, scale=Fraction(1)) -> List[Tuple[str, str]]:
    bad = []
    for i, j in itertools.product(chart, repeat=2):
        if not (Frac.coerce(A[(i, j)]) - Frac.coerce(B[(i, j)]) * scale).is_zero():
            bad.append((i, j))
    return bad


def intersection_form(P: PrepotentialDecomposition, eta: MetricTensor, E: EulerField | None = None, e: Mapping[str, Fraction] | None = None):
    """``g^ij = c^ij_k E^k`` and the five scaling identities.

    The extended Lie derivative is taken as the ordinary Lie derivative on the
    enlarged space of coordinates and parameters: ``E`` lifts to
    ``E + sum k d/dk`` while ``e`` has no parameter component, so for ``e`` it
    reduces to the ordinary one.  Adding ``sum k d/dk`` to the ``e`` identities
    regardless is also evaluated and reported (it fails on the ``1/k`` block).

    ``e`` defaults to the identity solved from ``c(., ., e) = eta``.
    """
    chart = P.chart
    c = P.third_derivatives()
    E = E or EulerField.for_chart(P.t_names, P.b_names, P.k_names, P.N)
    if e is None:
        pts = sample_points(list(chart) + list(P.k_names), 1, 7, distinct=P.b_names, nonzero=P.k_names)
        e = identity_vector(c, eta, pts[0])
    e_field = {x: MultiPoly.const(v) for x, v in e.items() if v}
    etainv = inverse_metric(eta)
    raised = raise_last(c, eta)
    g = {}
    for i, j in itertools.product(chart, repeat=2):
        acc = Frac(0)
        for k, Ek in E.components.items():
            # c^ij_k = eta^ia c_a j... via c_jk^i raised once more
            for a in chart:
                ea = etainv[(i, a)]
                if ea.is_zero():
                    continue
                v = raised[(a, k, j)]
                if _is_zero_value(v):
                    continue
                acc = acc + ea * Frac.coerce(v) * Ek
        g[(i, j)] = acc
    d = E.charge
    witnesses = []
    # [e, E] = e
    bracket_ok = True
    for x in chart:
        val = MultiPoly.zero()
        for y, ey in e_field.items():
            val = val + ey * E.components.get(x, MultiPoly.zero()).diff(y)
        for y, Ey in E.components.items():
            val = val - Ey * e_field.get(x, MultiPoly.zero()).diff(y)
        if not (val - e_field.get(x, MultiPoly.zero())).is_zero():
            bracket_ok = False
    witnesses.append({"identity": "[e,E] = e", "ok": bracket_ok})
    k_names = P.k_names
    LEg = _lie_contravariant2(E.components, g, chart, k_names, extended=True)
    LEeta = _lie_contravariant2(E.components, etainv, chart, k_names, extended=True)
    Leg = _lie_contravariant2(e_field, g, chart)
    Leeta = _lie_contravariant2(e_field, etainv, chart)
    Leg_ext = _lie_contravariant2(e_field, g, chart, k_names, extended=True)
    Leeta_ext = _lie_contravariant2(e_field, etainv, chart, k_names, extended=True)
    zero = {key: Frac(0) for key in etainv}
    checks = [
        ("L^ext_E g^-1 = (d-1) g^-1", _same(LEg, g, chart, d - 1)),
        ("L^ext_E eta^-1 = (d-2) eta^-1", _same(LEeta, etainv, chart, d - 2)),
        ("L^ext_e g^-1 = eta^-1", _same(Leg, etainv, chart)),
        ("L^ext_e eta^-1 = 0", _same(Leeta, zero, chart)),
    ]
    ok = bracket_ok
    for name, bad in checks:
        witnesses.append({"identity": name, "ok": not bad, "failing": [list(b) for b in bad[:4]]})
        ok &= not bad
    witnesses.append({"identity": "(L_e + sum k d/dk) g^-1 = eta^-1 (informational)", "ok": not _same(Leg_ext, etainv, chart)})
    witnesses.append({"identity": "(L_e + sum k d/dk) eta^-1 = 0 (informational)", "ok": not _same(Leeta_ext, zero, chart)})
    report = CheckReport("intersection_form", ok, witnesses, {"charge": str(d), "identity": {k: str(v) for k, v in e.items() if v}})
    return g, report


# ---------------------------------------------------------------------------
# k-decomposition


def _coefficient_in(v, k: str, power: int):
    f = Frac.coerce(v)
    for _ in range(power):
        f = f.diff(k)
    return f


def k_decomposition_check(c_flat: CTensor, eta_flat: MetricTensor, k_names: Sequence[str], sample: Sequence[Mapping[str, Fraction]]) -> CheckReport:
    """Split the raised structure functions as ``c0 + sum k_i c_i`` and test mixed associators."""
    raised = raise_last(c_flat, eta_flat)
    chart = c_flat.chart
    witnesses = []
    linear_ok = True
    parts: Dict[str, Dict[Tuple[str, str, str], object]] = {"0": {}}
    for k in k_names:
        parts[k] = {}
    zero_k = {k: MultiPoly.zero() for k in k_names}
    for key, v in raised.items():
        f = Frac.coerce(v)
        for k1, k2 in itertools.combinations_with_replacement(k_names, 2):
            if not f.diff(k1).diff(k2).is_zero():
                linear_ok = False
                witnesses.append({"component": list(key), "nonlinear_in": [k1, k2]})
        parts["0"][key] = tidy(f.subs(zero_k))
        for k in k_names:
            parts[k][key] = tidy(f.diff(k))
    if not linear_ok:
        return CheckReport("k_decomposition", False, witnesses, {"reason": "structure functions are not linear in k"})
    labels = list(parts)
    n = len(chart)
    ok = True
    for pt in sample:
        mats = {}
        for lab in labels:
            arr = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
            for (a, b, g), v in parts[lab].items():
                arr[chart.index(a)][chart.index(b)][chart.index(g)] = v.eval(pt)
            mats[lab] = arr
        worst = 0
        for li, lj in itertools.combinations_with_replacement(labels, 2):
            A, B = mats[li], mats[lj]
            for x, y, z, w in itertools.product(range(n), repeat=4):
                # x o_i (y o_j z) + x o_j (y o_i z) - (x o_i y) o_j z - (x o_j y) o_i z, component w
                lhs = sum(A[x][m][w] * B[y][z][m] + B[x][m][w] * A[y][z][m] for m in range(n))
                rhs = sum(A[x][y][m] * B[m][z][w] + B[x][y][m] * A[m][z][w] for m in range(n))
                if lhs != rhs:
                    ok = False
                    worst += 1
                    if worst == 1:
                        witnesses.append(
                            {
                                "point": format_point(pt),
                                "pair": [li, lj],
                                "indices": [chart[x], chart[y], chart[z], chart[w]],
                                "residual": str(lhs - rhs),
                            }
                        )
        witnesses.append({"point": format_point(pt), "nonzero": worst})
    return CheckReport("k_decomposition", ok, witnesses, {"parts": labels, "linear_in_k": linear_ok})


# ---------------------------------------------------------------------------
# F-manifold identity


def f_manifold_check(c_flat: CTensor, eta_flat: MetricTensor, sample: Sequence[Mapping[str, Fraction]]) -> CheckReport:
    """``L_{X o Y}(o) = X o L_Y(o) + Y o L_X(o)`` for coordinate fields, at sample points."""
    raised = raise_last(c_flat, eta_flat)
    chart = c_flat.chart
    n = len(chart)
    derivs = {(key, x): _diff(v, x) for key, v in raised.items() for x in chart}
    ok = True
    witnesses = []
    for pt in sample:
        C = [[[raised[(a, b, g)].eval(pt) for g in chart] for b in chart] for a in chart]
        dC = [[[[derivs[((a, b, g), x)].eval(pt) for g in chart] for b in chart] for a in chart] for x in chart]
        bad = 0
        for X, Y in itertools.combinations_with_replacement(range(n), 2):
            Z = C[X][Y]  # components of X o Y
            dZ = [[dC[d][X][Y][g] for g in range(n)] for d in range(n)]  # dZ[d][g] = d_d Z^g
            for a, b, g in itertools.product(range(n), repeat=3):
                lie = sum(Z[d] * dC[d][a][b][g] for d in range(n))
                lie -= sum(C[a][b][d] * dZ[d][g] for d in range(n))
                lie += sum(C[d][b][g] * dZ[a][d] for d in range(n))
                lie += sum(C[a][d][g] * dZ[b][d] for d in range(n))
                rhs = sum(C[X][d][g] * dC[Y][a][b][d] + C[Y][d][g] * dC[X][a][b][d] for d in range(n))
                if lie != rhs:
                    bad += 1
        ok &= bad == 0
        witnesses.append({"point": format_point(pt), "nonzero": bad})
    return CheckReport("f_manifold", ok, witnesses)


# ---------------------------------------------------------------------------
# deformed flat sections


def integrate_hessian(H: Mapping[Tuple[str, str], MultiPoly], coords: Sequence[str]) -> MultiPoly:
    """``psi`` with Hessian ``H`` and no constant or linear part.

    Uses ``psi(x) = sum x_i x_j int_0^1 (1 - s) H_ij(s x) ds`` after checking
    that ``d_k H_ij`` is symmetric in all three indices.
    """
    coords = tuple(coords)
    for i, j, k in itertools.product(coords, repeat=3):
        if not (H[(i, j)].diff(k) - H[(i, k)].diff(j)).is_zero():
            raise IntegrabilityError(f"Hessian data not closed: d_{k} H_{i}{j} != d_{j} H_{i}{k}")
    cset = set(coords)
    psi = MultiPoly.zero()
    for i, j in itertools.product(coords, repeat=2):
        for powers, c in H[(i, j)].items():
            d = sum(e for x, e in powers.items() if x in cset)
            term = MultiPoly.monomial(dict(powers), c * Fraction(1, (d + 1) * (d + 2)))
            psi = psi + term * MultiPoly.var(i) * MultiPoly.var(j)
    for i, j in itertools.product(coords, repeat=2):
        if not (psi.diff(i).diff(j) - H[(i, j)]).is_zero():
            raise IntegrabilityError(f"integrated section fails the Hessian check at ({i}, {j})")
    return psi


def deformed_sections(P: PrepotentialDecomposition, eta: MetricTensor, n_max: int) -> Dict[str, List[MultiPoly]]:
    """Levels ``0..n_max`` of ``d_i d_j psi^(n) = -c_ij^k d_k psi^(n-1)`` seeded by each flat coordinate."""
    if P.log_terms:
        raise ValueError("deformed sections need a polynomial prepotential (M <= 1)")
    chart = P.chart
    raised = raise_last(P.third_derivatives(), eta)
    poly_raised = {}
    for key, v in raised.items():
        v = tidy(v)
        if isinstance(v, Frac) or v.poles:
            raise ValueError(f"structure function {key} is not polynomial")
        poly_raised[key] = v.poly
    out = {}
    for seed in chart:
        levels = [MultiPoly.var(seed)]
        for _ in range(n_max):
            prev = levels[-1]
            grads = {k: prev.diff(k) for k in chart}
            H = {}
            for i, j in itertools.product(chart, repeat=2):
                acc = MultiPoly.zero()
                for k in chart:
                    if not grads[k].is_zero():
                        acc = acc - poly_raised[(i, j, k)] * grads[k]
                H[(i, j)] = acc
            levels.append(integrate_hessian(H, chart))
        out[seed] = levels
    return out


# ---------------------------------------------------------------------------
# B_N restriction


def bn_restriction_check(N: int, M: int, points: int = 10, seed: int = 0) -> CheckReport:
    """Restrict the paired-log ``A_(2N+1)`` structure to the even, symmetric locus.

    Builds ``A_(2N+1)`` with ``2M`` logs, identifies ``k_(i+M) = k_i``, moves to
    ``(bt_i, d_i) = (b_i, b_i + b_(i+M))``, raises with the full metric and
    checks that products of tangent directions have no normal components on
    ``d = 0``, ``t^even = 0``.  The restricted structure is then tested for
    associativity and compared with the directly built ``bn`` flavor.
    """
    W = make_waterbag(2 * N + 1, 2 * M)
    chart, eta, c = flat_structure(W, "closed")
    kid = {f"k{i + M}": MultiPoly.var(f"k{i}") for i in range(1, M + 1)}
    eta = eta.subs(kid)
    c = c.subs(kid)
    t_names = [t for t in chart.target if t.startswith("t")]
    bt = [f"bt{i}" for i in range(1, M + 1)]
    dd = [f"d{i}" for i in range(1, M + 1)]
    new_chart = t_names + bt + dd
    # old b in new coordinates, and the old-from-new Jacobian
    old_of_new = {f"b{i}": MultiPoly.var(f"bt{i}") for i in range(1, M + 1)}
    old_of_new.update({f"b{i + M}": MultiPoly.var(f"d{i}") - MultiPoly.var(f"bt{i}") for i in range(1, M + 1)})
    J = {}
    for old in chart.target:
        f = old_of_new.get(old, MultiPoly.var(old))
        for new in new_chart:
            J[(old, new)] = f.diff(new)

    def transform(T, rank):
        moved = {k: v.subs(old_of_new) for k, v in T.entries.items()}
        ents = {}
        for idx in itertools.combinations_with_replacement(new_chart, rank):
            total = Entry()
            for key, val in moved.items():
                for perm in set(itertools.permutations(key)):
                    w = Fraction(1)
                    for o, nn in zip(perm, idx):
                        jj = J[(o, nn)]
                        w *= jj.constant() if not jj.is_zero() else 0
                        if not w:
                            break
                    if w:
                        total = add_values(total, val * w)
            ents[idx] = tidy(total)
        return ents

    eta2 = MetricTensor(new_chart, transform(eta, 2))
    c2 = CTensor(new_chart, transform(c, 3))
    raised = raise_last(c2, eta2)
    restrict = {f"d{i}": 0 for i in range(1, M + 1)}
    for t in t_names:
        if int(t[1:]) % 2 == 0:
            restrict[t] = 0

    def on_locus(v):
        return tidy(Frac.coerce(v).subs(restrict))

    odd = [t for t in t_names if int(t[1:]) % 2 == 1]
    even = [t for t in t_names if int(t[1:]) % 2 == 0]
    families = {
        "c_{bt bt}^{d}": [(x, y, z) for x in bt for y in bt for z in dd],
        "c_{bt bt}^{t even}": [(x, y, z) for x in bt for y in bt for z in even],
        "c_{bt t odd}^{d}": [(x, y, z) for x in bt for y in odd for z in dd],
        "c_{bt t odd}^{t even}": [(x, y, z) for x in bt for y in odd for z in even],
        "c_{t odd t odd}^{d}": [(x, y, z) for x in odd for y in odd for z in dd],
        "c_{t odd t odd}^{t even}": [(x, y, z) for x in odd for y in odd for z in even],
    }
    witnesses = []
    ok = True
    for name, comps in families.items():
        bad = [list(cmp) for cmp in comps if not _is_zero_value(on_locus(raised[cmp]))]
        witnesses.append({"family": name, "components": len(comps), "nonzero": bad[:4], "ok": not bad})
        ok &= not bad
    # restricted structure with the induced metric
    tangent = odd + bt
    c_r = CTensor(tangent, {idx: on_locus(c2[idx]) for idx in itertools.combinations_with_replacement(tangent, 3)})
    eta_r = MetricTensor(tangent, {idx: on_locus(eta2[idx]) for idx in itertools.combinations_with_replacement(tangent, 2)})
    ks = [f"k{i}" for i in range(1, M + 1)]
    sample = sample_points(tangent + ks, points, seed, distinct=bt, nonzero=ks + bt)
    wd = wdvv_check(c_r, eta_r, sample, check="bn_restricted_wdvv")
    witnesses.append({"family": "restricted WDVV", "ok": wd.passed, "points": wd.details["points_checked"]})
    ok &= wd.passed
    # direct construction of the even superpotential, pushed to the same coordinates
    Wb = make_waterbag(N, M, "bn")
    _, eta_b, c_b = flat_structure(Wb, "oracle")
    ren = {f"b{i}": MultiPoly.var(f"bt{i}") for i in range(1, M + 1)}
    c_b = CTensor(tangent, {tuple(f"bt{x[1:]}" if x.startswith("b") else x for x in k): v.subs(ren) for k, v in c_b.entries.items()})
    eta_b = MetricTensor(tangent, {tuple(f"bt{x[1:]}" if x.startswith("b") else x for x in k): v.subs(ren) for k, v in eta_b.entries.items()})
    same_c = not c_b.differences(c_r)
    same_eta = not eta_b.differences(eta_r)
    witnesses.append({"family": "matches direct even construction", "ok": same_c and same_eta})
    ok &= same_c and same_eta
    return CheckReport("bn_restriction", ok, witnesses, {"N": N, "M": M, "ambient": f"A_{2 * N + 1} with {2 * M} logs"})
