"""Flat metric, structure tensor and flat coordinates of a water-bag superpotential.

Two independent routes are provided for the metric and the (3,0) tensor:

* closed forms, assembled from reciprocal-series coefficients of
  ``mu(q) = q^(d-1) lam_+'(1/q)`` and a handful of explicit b-components;
* a residue oracle that sums residues of ``prod(d_x lam) / lam' dp`` at
  infinity and at every finite pole, which by the residue theorem equals the
  negated sum over the critical points of ``lam``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactalg.frac import Entry, Frac, PoleStructureError
from .exactalg.linalg import solve
from .exactalg.multipoly import MultiPoly
from .exactalg.ratfunc import RationalFunction, residue_at_infinity, residue_at_pole
from .exactalg.series import PSeries, series_pow, series_reciprocal, series_revert, taylor_coefficient
from .superpotential import P, WaterBagPotential, lambda_prime

Q = "q"  # the local variable 1/p at infinity


class ChartMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# tensors


def _is_zero(v) -> bool:
    return v.is_zero()


def add_values(a, b):
    if isinstance(a, Frac) or isinstance(b, Frac):
        return Frac.coerce(a) + Frac.coerce(b)
    return a + b


def tidy(v):
    """Prefer the tagged simple-pole form whenever it exists."""
    if isinstance(v, Frac):
        try:
            return v.to_entry()
        except PoleStructureError:
            return v.cancel()
    return v


class SymTensor:
    """Totally symmetric covariant tensor stored by sorted index tuples."""

    rank = 0

    def __init__(self, chart: Sequence[str], entries: Mapping[Tuple[str, ...], object] | None = None):
        self.chart = tuple(chart)
        self._pos = {n: i for i, n in enumerate(self.chart)}
        self.entries: Dict[Tuple[str, ...], object] = {}
        for idx, val in (entries or {}).items():
            if len(idx) != self.rank:
                raise ValueError(f"index {idx} has wrong rank")
            if val is None or _is_zero(val):
                continue
            self.entries[self.key(idx)] = val

    def key(self, idx: Iterable[str]) -> Tuple[str, ...]:
        try:
            return tuple(sorted(idx, key=self._pos.__getitem__))
        except KeyError as exc:
            raise ChartMismatchError(f"index {exc} not in chart {self.chart}") from None

    def __getitem__(self, idx):
        return self.entries.get(self.key(idx), Entry())

    def index_tuples(self):
        return itertools.combinations_with_replacement(self.chart, self.rank)

    def map(self, fn) -> "SymTensor":
        return type(self)(self.chart, {k: fn(v) for k, v in self.entries.items()})

    def subs(self, mapping) -> "SymTensor":
        return self.map(lambda v: tidy(v.subs(mapping)))

    def equals(self, other: "SymTensor") -> bool:
        return not self.differences(other)

    def differences(self, other: "SymTensor") -> List[Tuple[str, ...]]:
        if set(self.chart) != set(other.chart):
            raise ChartMismatchError("tensors live on different charts")
        bad = []
        for idx in self.index_tuples():
            a, b = self[idx], other[idx]
            if isinstance(a, Frac) or isinstance(b, Frac):
                same = Frac.coerce(a) == Frac.coerce(b)
            else:
                same = a == b
            if not same:
                bad.append(idx)
        return bad

    def eval(self, point: Mapping[str, Fraction]) -> Dict[Tuple[str, ...], Fraction]:
        return {k: v.eval(point) for k, v in self.entries.items()}

    def used_vars(self) -> set:
        out = set()
        for v in self.entries.values():
            out |= set(v.used_vars())
        return out

    def to_json(self) -> dict:
        ents = []
        for idx, val in self.entries.items():
            if isinstance(val, Frac):
                item = {"num": val.num.to_json(), "den": val.denominator().to_json()}
            else:
                item = val.to_json()
            ents.append({"index": list(idx), "value": item})
        return {"chart": list(self.chart), "rank": self.rank, "entries": ents}

    @classmethod
    def from_json(cls, data: Mapping) -> "SymTensor":
        entries = {}
        for item in data["entries"]:
            val = item["value"]
            if "den" in val and isinstance(val["den"], dict):
                entries[tuple(item["index"])] = Frac(MultiPoly.from_json(val["num"]), MultiPoly.from_json(val["den"]))
            else:
                entries[tuple(item["index"])] = Entry.from_json(val)
        return cls(data["chart"], entries)

    def __repr__(self):
        body = ", ".join(f"{','.join(k)}: {v}" for k, v in self.entries.items())
        return f"{type(self).__name__}({body})"


class MetricTensor(SymTensor):
    rank = 2

    def matrix(self):
        return [[self[(a, b)] for b in self.chart] for a in self.chart]

    def matrix_at(self, point) -> List[List[Fraction]]:
        return [[self[(a, b)].eval(point) for b in self.chart] for a in self.chart]

    def is_constant_in(self, names: Iterable[str]) -> bool:
        names = set(names)
        return all(not (set(v.used_vars()) & names) for v in self.entries.values())


class CTensor(SymTensor):
    rank = 3


# ---------------------------------------------------------------------------
# reciprocal-series building blocks


def mu_series(W: WaterBagPotential, order: int) -> PSeries:
    """``q^(d-1) lam_+'(1/q)`` as a series in ``q``."""
    d = W.degree
    parts = W.poly.diff(P).coeffs_in(P)
    zero = MultiPoly.zero()
    return PSeries([parts.get(d - 1 - j, zero) for j in range(order)], order, Q)


def _geometric(b: MultiPoly, order: int) -> PSeries:
    """``1/(1 - b q)``."""
    return PSeries([b ** j for j in range(order)], order, Q)


def _sigma_range(sigma: int, lo: int, hi: int, what: str):
    if not lo <= sigma <= hi:
        raise ValueError(f"{what} index sigma={sigma} outside [{lo}, {hi}]")


def S_sigma(W: WaterBagPotential, sigma: int, b: MultiPoly) -> MultiPoly:
    """Coefficient of ``q^(N-sigma)`` in ``1/((1 - b q) mu(q))``; zero for ``sigma > N``."""
    N = W.N
    _sigma_range(sigma, 2, 2 * N, "S")
    if sigma > N:
        return MultiPoly.zero()
    order = N - sigma + 1
    f = _geometric(b, order) * series_reciprocal(mu_series(W, order), order)
    return taylor_coefficient(f, N - sigma, via_derivatives=True)


def R0_sigma(W: WaterBagPotential, sigma: int) -> MultiPoly:
    """Minus the coefficient of ``q^(2N+1-sigma)`` in ``1/mu(q)``."""
    N = W.N
    _sigma_range(sigma, 3, 3 * N, "R0")
    if sigma > 2 * N + 1:
        return MultiPoly.zero()
    order = 2 * N + 2 - sigma
    f = series_reciprocal(mu_series(W, order), order)
    return -taylor_coefficient(f, 2 * N + 1 - sigma, via_derivatives=True)


def R1_sigma(W: WaterBagPotential, sigma: int, b: MultiPoly) -> MultiPoly:
    """Coefficient of ``q^(N-sigma)`` in ``1/((1 - b q) mu(q)^2)``."""
    N = W.N
    _sigma_range(sigma, 3, 3 * N, "R1")
    if sigma > N:
        return MultiPoly.zero()
    order = N - sigma + 1
    inv = series_reciprocal(mu_series(W, order), order)
    f = _geometric(b, order) * inv * inv
    return taylor_coefficient(f, N - sigma, via_derivatives=True)


def _s_exponent(W: WaterBagPotential, name: str) -> int:
    """Power of ``p`` multiplying coordinate ``name`` in the polynomial part."""
    parts = W.poly.coeffs_in(P)
    for e, c in parts.items():
        if name in c.used_vars():
            return e
    raise KeyError(name)


def _s_block(W: WaterBagPotential) -> Dict[Tuple[str, str], Entry]:
    d = W.degree
    names = W.s_names
    if not names:
        return {}
    exps = {n: _s_exponent(W, n) for n in names}
    order = max(exps.values()) * 2 + 3 - d
    inv = series_reciprocal(mu_series(W, max(order, 1)), max(order, 1))
    out = {}
    for a, b in itertools.combinations_with_replacement(names, 2):
        n = exps[a] + exps[b] + 2 - d
        if n >= 0:
            out[(a, b)] = Entry(-inv[n])
    return out


# ---------------------------------------------------------------------------
# closed forms


def metric_closed(W: WaterBagPotential) -> MetricTensor:
    """Metric from the closed-form block structure.

    The s-block is the residue metric of the polynomial part alone, the s-b
    block vanishes and the b-block is diagonal.  In the ``bn`` flavor each
    coordinate ``b_i`` moves a pair of logs, doubling its weight.  In the
    ``rational`` flavor the pole blocks are given in the local flat coordinates
    ``x{i}_j``, so the chart is ``(s, x, b)``.
    """
    entries: Dict[Tuple[str, ...], object] = dict(_s_block(W))
    chart = list(W.s_names)
    for _, vs in W.pole_names:
        i = vs[0].split("_")[0][1:]
        L = len(vs)
        xs = [f"x{i}_{j}" for j in range(1, L + 2)]
        chart.extend(xs)
        for j in range(1, L + 2):
            for k in range(j, L + 2):
                if j + k == L + 2:
                    entries[(xs[j - 1], xs[k - 1])] = Entry(Fraction(-1, L))
    mult = 2 if W.flavor == "bn" else 1
    for k, b in zip(W.params, W.b_names):
        entries[(b, b)] = Entry(MultiPoly.var(k) * mult)
        chart.append(b)
    return MetricTensor(chart, entries)


def c_closed(W: WaterBagPotential) -> CTensor:
    """Structure tensor from the closed-form component list (generic flavor)."""
    if W.flavor != "generic":
        raise ValueError("closed forms cover the generic flavor; use c_oracle")
    N = W.N
    s = W.s_names
    bs = [MultiPoly.var(b) for b in W.b_names]
    ks = [MultiPoly.var(k) for k in W.params]
    lp = W.poly.diff(P)
    entries: Dict[Tuple[str, ...], object] = {}
    for (i, a), (j, b), (l, c) in itertools.combinations_with_replacement(list(enumerate(s, 1)), 3):
        val = R0_sigma(W, i + j + l)
        for k, bb in zip(ks, bs):
            val = val + k * R1_sigma(W, i + j + l, bb)
        entries[(a, b, c)] = Entry(val)
    for al, bname in enumerate(W.b_names):
        k, bb = ks[al], bs[al]
        for (i, a), (j, c) in itertools.combinations_with_replacement(list(enumerate(s, 1)), 2):
            entries[(a, c, bname)] = Entry(k * S_sigma(W, i + j, bb))
        for g, a in enumerate(s, 1):
            entries[(a, bname, bname)] = Entry(k * bb ** (N - g))
    for al, ba in enumerate(W.b_names):
        poles = {}
        for r, br in enumerate(W.b_names):
            if r == al:
                continue
            kk = ks[al] * ks[r]
            # k_a k_r / (b_a - b_r), and the (a, a, r) entry k_a k_r / (b_r - b_a)
            poles[(ba, br)] = poles.get((ba, br), MultiPoly.zero()) + kk
            entries[(ba, ba, br)] = Entry(None, {(br, ba): kk})
        diag = ks[al] * lp.subs({P: bs[al]})
        entries[(ba, ba, ba)] = Entry(diag, poles)
    return CTensor(list(s) + list(W.b_names), entries)


# ---------------------------------------------------------------------------
# residue oracle


@dataclass
class _Integrand:
    num: MultiPoly
    exps: Dict[frozenset, Tuple[MultiPoly, int]]


def _common_form(W: WaterBagPotential, name: str) -> _Integrand:
    terms = W.coordinate_derivative(name)
    exps: Dict[frozenset, Tuple[MultiPoly, int]] = {}
    for _, d in terms:
        for key, (pos, e) in d.items():
            if key not in exps or exps[key][1] < e:
                exps[key] = (pos, e)
    p = MultiPoly.var(P)
    num = MultiPoly.zero()
    for t, d in terms:
        extra = MultiPoly.const(1)
        for key, (pos, e) in exps.items():
            have = d.get(key, (pos, 0))[1]
            extra = extra * (p - pos) ** (e - have)
        num = num + t * extra
    return _Integrand(num, exps)


class ResidueOracle:
    """Sums of residues of ``prod(d_x lam) / lam'`` over the critical points."""

    def __init__(self, W: WaterBagPotential):
        self.W = W
        lp = lambda_prime(W)
        self.nu = lp.num
        self.D_exps = W.pole_structure()
        self._forms = {n: _common_form(W, n) for n in W.chart}

    def pairing(self, names: Sequence[str]) -> Frac:
        """``-sum over lam'=0 of res prod(d_name lam) / lam' dp``."""
        p = MultiPoly.var(P)
        num = MultiPoly.const(1)
        exps: Dict[frozenset, Tuple[MultiPoly, int]] = {}
        for n in names:
            form = self._forms[n]
            if form.num.is_zero():
                return Frac(0)
            num = num * form.num
            for key, (pos, e) in form.exps.items():
                exps[key] = (pos, exps.get(key, (pos, 0))[1] + e)
        # 1/lam' = D / nu
        poles = {}
        for key, (pos, e) in self.D_exps.items():
            net = exps.get(key, (pos, 0))[1] - e
            if net < 0:
                num = num * (p - pos) ** (-net)
            elif net > 0:
                poles[key] = (pos, net)
        for key, (pos, e) in exps.items():
            if key not in self.D_exps:
                poles[key] = (pos, e)
        den = self.nu
        for pos, e in poles.values():
            den = den * (p - pos) ** e
        f = RationalFunction(num, den, P)
        total = Frac(residue_at_infinity(f))
        for pos, e in poles.values():
            total = total + residue_at_pole(f, pos, e)
        return total.cancel()


def metric_oracle(W: WaterBagPotential) -> MetricTensor:
    oracle = ResidueOracle(W)
    entries = {idx: tidy(oracle.pairing(idx)) for idx in itertools.combinations_with_replacement(W.chart, 2)}
    return MetricTensor(W.chart, entries)


def c_oracle(W: WaterBagPotential) -> CTensor:
    oracle = ResidueOracle(W)
    entries = {idx: tidy(oracle.pairing(idx)) for idx in itertools.combinations_with_replacement(W.chart, 3)}
    return CTensor(W.chart, entries)


# ---------------------------------------------------------------------------
# flat coordinates


@dataclass
class FlatChart:
    """Polynomial change of coordinates between a source chart and flat coordinates.

    ``inverse`` expresses every source coordinate as a polynomial in the flat
    ones.  ``forward`` gives flat coordinates in terms of the source ones when
    that map is polynomial (it is not for the pole-local coordinates, whose
    forward map involves roots), otherwise the entry is ``None``.
    """

    source: Tuple[str, ...]
    target: Tuple[str, ...]
    forward: Dict[str, Optional[MultiPoly]]
    inverse: Dict[str, MultiPoly]
    jacobian: List[List[MultiPoly]] = field(default_factory=list)  # d source_i / d target_j

    def __post_init__(self):
        if not self.jacobian:
            self.jacobian = [[self.inverse[s].diff(t) for t in self.target] for s in self.source]

    def round_trip_ok(self) -> bool:
        """``forward`` composed with ``inverse`` is the identity wherever both exist."""
        for t, f in self.forward.items():
            if f is None:
                continue
            if not (f.subs(self.inverse) - MultiPoly.var(t)).is_zero():
                return False
        return True

    def jacobian_determinant(self) -> MultiPoly:
        return _poly_det([row[:] for row in self.jacobian])

    def to_json(self) -> dict:
        return {
            "source": list(self.source),
            "target": list(self.target),
            "forward": {k: (v.to_json() if v is not None else None) for k, v in self.forward.items()},
            "inverse": {k: v.to_json() for k, v in self.inverse.items()},
        }


def _poly_det(m: List[List[MultiPoly]]) -> MultiPoly:
    n = len(m)
    if n == 0:
        return MultiPoly.const(1)
    if n == 1:
        return m[0][0]
    total = MultiPoly.zero()
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _poly_det(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def puiseaux_flat(poly: MultiPoly) -> Dict[int, MultiPoly]:
    """Flat coordinates of a monic polynomial ``p^d + ...`` with no ``p^(d-1)`` term.

    Writes ``p = k + (1/d)(T_(d-1)/k + ... + T_1/k^(d-1)) + O(k^-d)`` where
    ``poly(p) = k^d`` and returns ``{i: -T_i}``.
    """
    d = poly.degree(P)
    if d < 1:
        raise ValueError("polynomial part must have positive degree")
    coeffs = poly.coeffs_in(P)
    if coeffs.get(d) != MultiPoly.const(1):
        raise ValueError("polynomial part must be monic")
    if d - 1 in coeffs and not coeffs[d - 1].is_zero():
        raise ValueError("polynomial part must have no p^(d-1) term")
    order = d + 2
    zero = MultiPoly.zero()
    # poly(p) = p^d (1 + X(u)), u = 1/p
    X = PSeries([coeffs.get(d - j, zero) if j else MultiPoly.const(1) for j in range(order)], order, "u")
    h = series_pow(X, Fraction(-1, d), order)
    f = h.shift(1).truncate(order)  # z = u (1 + X)^(-1/d)
    g = series_revert(f, order)  # u = g(z)
    ratio = series_reciprocal(PSeries(g.coeffs[1:], order - 1, "z"), order - 1)  # z p = z / g(z)
    return {i: -(ratio[d + 1 - i] * d) for i in range(1, d)}


def _coefficient_names(poly: MultiPoly) -> Dict[int, str]:
    """Map power of ``p`` to the coordinate name multiplying it."""
    out = {}
    for e, c in poly.coeffs_in(P).items():
        used = c.used_vars()
        if used:
            (name,) = used
            out[e] = name
    return out


def _invert_triangular(forward: Dict[str, MultiPoly], pairing: Dict[str, str]) -> Dict[str, MultiPoly]:
    """Solve ``t = forward(s)`` for ``s`` where ``t_name`` is ``s_pairing[t] + (earlier s)``.

    ``pairing`` lists ``t -> s`` in an order where each forward map only
    involves earlier s-coordinates besides its own linear term.
    """
    inverse: Dict[str, MultiPoly] = {}
    for t, s in pairing.items():
        f = forward[t]
        lin = f.diff(s)
        if not (lin.is_constant() and lin.constant() != 0) or f.degree(s) != 1:
            raise ValueError(f"flat coordinate {t} is not triangular in {s}")
        rest = (f - MultiPoly.var(s) * lin.constant()).subs(inverse)
        inverse[s] = (MultiPoly.var(t) - rest) * (1 / lin.constant())
    return inverse


def _polynomial_flat(W: WaterBagPotential, poly: MultiPoly, names_by_power: Dict[int, str]):
    flat = puiseaux_flat(poly)
    forward: Dict[str, MultiPoly] = {}
    pairing: Dict[str, str] = {}
    for e in sorted(names_by_power, reverse=True):
        tname = f"t{e + 1}"
        forward[tname] = flat[e + 1]
        pairing[tname] = names_by_power[e]
    inverse = _invert_triangular(forward, pairing)
    return forward, inverse


def pole_local_inverse(position: str, coeff_names: Sequence[str], x_names: Sequence[str]) -> Dict[str, MultiPoly]:
    """Pole coordinates in terms of the local flat coordinates ``x_1..x_(L+1)``.

    Near the pole write ``p = a + z Q(z)`` with
    ``Q = (x_L + x_(L-1) z + ... + x_1 z^(L-1)) / L`` and ``z = 1/w``; requiring
    ``sum v_l (p - a)^-l = z^-L + O(1)`` fixes ``v_L, ..., v_1`` one at a time.
    ``x_(L+1) = L a``.
    """
    L = len(coeff_names)
    xs = [MultiPoly.var(x) for x in x_names]
    Qs = [Frac(xs[L - 1 - j] * Fraction(1, L)) for j in range(L)]
    Qser = PSeries(Qs, L, "z")
    inv = series_reciprocal(Qser, L)
    powers = [None, inv]
    for l in range(2, L + 1):
        powers.append((powers[-1] * inv).truncate(L))
    v: Dict[int, Frac] = {}
    for m in range(L, 0, -1):
        rhs = Frac(1) if m == L else Frac(0)
        for l in range(m + 1, L + 1):
            rhs = rhs - v[l] * powers[l][l - m]
        v[m] = (rhs / powers[m][0]).cancel()
    out = {position: xs[L] * Fraction(1, L)}
    for l, name in enumerate(coeff_names, start=1):
        val = v[l].cancel()
        if val.den:
            raise ArithmeticError(f"pole coefficient {name} is not polynomial in the local flat coordinates")
        out[name] = val.num
    return out


def flat_map(W: WaterBagPotential) -> FlatChart:
    """Flat chart for ``W``: Puiseaux t-block, pole-local x-blocks, b unchanged."""
    names = _coefficient_names(W.poly)
    if W.flavor == "bn":
        forward, inverse = _polynomial_flat(W, W.poly, names)
        # drop t's that vanish identically on the even polynomials
        forward = {t: f for t, f in forward.items() if not f.is_zero()}
    elif names:
        forward, inverse = _polynomial_flat(W, W.poly, names)
    else:
        forward, inverse = {}, {}
    forward = dict(sorted(forward.items(), key=lambda kv: int(kv[0][1:])))
    target = list(forward)
    for a, vs in W.pole_names:
        i = vs[0].split("_")[0][1:]
        xs = [f"x{i}_{j}" for j in range(1, len(vs) + 2)]
        inverse.update(pole_local_inverse(a, vs, xs))
        for x in xs:
            forward[x] = None
        target.extend(xs)
    for b in W.b_names:
        forward[b] = MultiPoly.var(b)
        inverse[b] = MultiPoly.var(b)
        target.append(b)
    source = tuple(W.chart)
    inverse = {s: inverse[s] for s in source}
    return FlatChart(source, tuple(target), forward, inverse)


def expected_flat_metric(W: WaterBagPotential, chart: FlatChart | None = None) -> MetricTensor:
    """Constant flat metric: ``-delta/(deg)`` on t, ``-delta/L`` on each x-block, ``k`` (or ``2k``) on b."""
    chart = chart or flat_map(W)
    deg = W.degree
    entries = {}
    for a, b in itertools.combinations_with_replacement(chart.target, 2):
        val = MultiPoly.zero()
        if a.startswith("t") and b.startswith("t") and int(a[1:]) + int(b[1:]) == deg:
            val = MultiPoly.const(Fraction(-1, deg))
        elif a.startswith("x") and b.startswith("x"):
            (ia, ja), (ib, jb) = (tuple(int(z) for z in n[1:].split("_")) for n in (a, b))
            L = len(W.pole_names[ia - 1][1])
            if ia == ib and ja + jb == L + 2:
                val = MultiPoly.const(Fraction(-1, L))
        elif a == b and a in W.b_names:
            k = W.params[W.b_names.index(a)]
            val = MultiPoly.var(k) * (2 if W.flavor == "bn" else 1)
        entries[(a, b)] = Entry(val)
    return MetricTensor(chart.target, entries)


def push_to_flat(tensor: SymTensor, chart: FlatChart) -> SymTensor:
    """Covariant transformation ``T'(A, ..) = sum J^i_A .. T(i, ..)`` with ``J = d source / d target``."""
    if set(tensor.chart) != set(chart.source):
        raise ChartMismatchError(f"tensor chart {tensor.chart} does not match {chart.source}")
    src = list(chart.source)
    jac = {(s, t): chart.jacobian[i][j] for i, s in enumerate(src) for j, t in enumerate(chart.target)}
    moved = {k: v.subs(chart.inverse) for k, v in tensor.entries.items()}
    entries = {}
    for idx in itertools.combinations_with_replacement(chart.target, tensor.rank):
        total = Entry()
        for key, val in moved.items():
            # sum over all orderings of the stored (sorted) source index tuple
            for perm in set(itertools.permutations(key)):
                w = MultiPoly.const(1)
                for s, t in zip(perm, idx):
                    w = w * jac[(s, t)]
                    if w.is_zero():
                        break
                if w.is_zero():
                    continue
                total = add_values(total, val * w)
        entries[idx] = tidy(total)
    return type(tensor)(chart.target, entries)


def identity_vector(c: CTensor, eta: MetricTensor, point: Mapping[str, Fraction]) -> Dict[str, Fraction]:
    """Constant vector ``e`` with ``c(., ., e) = eta``, solved at a point and verified exactly."""
    chart = c.chart
    rows, rhs = [], []
    for a, b in itertools.combinations_with_replacement(chart, 2):
        rows.append([c[(a, b, z)].eval(point) for z in chart])
        rhs.append(eta[(a, b)].eval(point))
    e = solve(rows, rhs)
    vec = {z: v for z, v in zip(chart, e)}
    for a, b in itertools.combinations_with_replacement(chart, 2):
        total = Entry()
        for z, v in vec.items():
            if v:
                total = add_values(total, c[(a, b, z)] * v)
        diff = add_values(total, eta[(a, b)] * -1)
        if not tidy(diff).is_zero():
            raise ArithmeticError(f"no constant identity vector: component ({a}, {b}) fails")
    return vec


def flat_structure(W: WaterBagPotential, route: str = "closed"):
    """``(chart, eta_flat, c_flat)`` in flat coordinates."""
    chart = flat_map(W)
    if route == "closed" and W.flavor == "generic":
        eta_s = metric_closed(W)
        c_s = c_closed(W)
    else:
        eta_s = metric_oracle(W)
        c_s = c_oracle(W)
    return chart, push_to_flat(eta_s, chart), push_to_flat(c_s, chart)

