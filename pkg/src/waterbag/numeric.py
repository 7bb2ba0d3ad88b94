"""High-precision floating-point checks that need the critical points of the superpotential.

The zeros of ``lam'`` are algebraic, so canonical coordinates, Lame
coefficients and rotation coefficients are only available numerically.
Logs use mpmath's principal branch; only branch-independent quantities
(derivatives, diagonality, symmetry) are asserted.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

import mpmath

from .frobenius import c_closed, c_oracle, identity_vector, metric_closed, metric_oracle
from .prepotential import CheckReport, format_point
from .superpotential import P, WaterBagPotential, lambda_prime

DEFAULT_DPS = 40


class ConvergenceError(ArithmeticError):
    pass


class ConditioningError(ValueError):
    """Raised when roots or pole positions nearly collide."""


def mpf_of(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)


def _horner(coeffs, z):
    val = coeffs[0]
    for c in coeffs[1:]:
        val = val * z + c
    return val


def roots_aberth(coeffs: Sequence, tol: float | None = None, seed: int = 0, max_iter: int = 500, start: Sequence | None = None) -> List:
    """All roots of ``coeffs[0] z^n + ... + coeffs[n]`` by Aberth-Ehrlich iteration.

    Initial guesses sit on a circle of the Cauchy radius with a seeded phase
    offset, unless ``start`` supplies them (used for root tracking).  The
    default step tolerance follows the working precision.
    """
    if tol is None:
        tol = mpmath.mpf(10) ** (5 - mpmath.mp.dps)
    coeffs = [mpmath.mpmathify(c) for c in coeffs]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    n = len(coeffs) - 1
    if n < 1:
        raise ValueError("polynomial must have degree at least 1")
    lead = coeffs[0]
    deriv = [c * (n - i) for i, c in enumerate(coeffs[:-1])]
    scale = max(abs(c) for c in coeffs)
    if start is not None:
        z = [mpmath.mpc(s) for s in start]
        if len(z) != n:
            raise ValueError("start must have one guess per root")
    else:
        radius = 1 + max(abs(c / lead) for c in coeffs[1:])
        phase = random.Random(seed).random()
        z = [radius * mpmath.expjpi(2 * (k + phase) / n) for k in range(n)]
    for _ in range(max_iter):
        worst = 0
        for i in range(n):
            pv = _horner(coeffs, z[i])
            dv = _horner(deriv, z[i])
            ratio = pv / dv if dv != 0 else mpmath.mpf(1)
            s = sum(1 / (z[i] - z[j]) for j in range(n) if j != i)
            delta = ratio / (1 - ratio * s)
            z[i] -= delta
            worst = max(worst, abs(delta))
        if worst < tol * max(1, max(abs(x) for x in z)):
            break
    else:
        raise ConvergenceError(f"Aberth iteration did not converge in {max_iter} steps")
    for r in z:
        if abs(_horner(coeffs, r)) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2) * scale * max(1, abs(r)) ** n:
            raise ConvergenceError(f"root {r} has a large residual")
    return z


# ---------------------------------------------------------------------------
# superpotential evaluation


def _values(point: Mapping[str, object]) -> Dict[str, object]:
    return {k: mpf_of(v) for k, v in point.items()}


def lam_value(W: WaterBagPotential, p, vals: Mapping[str, object]):
    """``lam(p)`` with principal-branch logs."""
    env = dict(vals)
    env[P] = p
    out = W.poly.eval_generic(env, mpmath.mpf(1))
    for pole in W.poles:
        a = pole.position.eval_generic(vals, mpmath.mpf(1))
        for l, v in enumerate(pole.coeffs, start=1):
            out += v.eval_generic(vals, mpmath.mpf(1)) / (p - a) ** l
    for log in W.logs:
        out += log.weight.eval_generic(vals, mpmath.mpf(1)) * mpmath.log(p - log.position.eval_generic(vals, mpmath.mpf(1)))
    return out


def lam_increment(W: WaterBagPotential, p_new, vals_new, p_old, vals_old):
    """``lam(p_new; new) - lam(p_old; old)`` with each log difference taken as one log of a ratio.

    Nearby arguments give a ratio near 1, so the result does not jump when a
    real critical point picks up a rounding-level imaginary part on the cut.
    """
    one = mpmath.mpf(1)
    env_new = dict(vals_new)
    env_new[P] = p_new
    env_old = dict(vals_old)
    env_old[P] = p_old
    out = W.poly.eval_generic(env_new, one) - W.poly.eval_generic(env_old, one)
    for pole in W.poles:
        a_new = pole.position.eval_generic(vals_new, one)
        a_old = pole.position.eval_generic(vals_old, one)
        for l, v in enumerate(pole.coeffs, start=1):
            out += v.eval_generic(vals_new, one) / (p_new - a_new) ** l - v.eval_generic(vals_old, one) / (p_old - a_old) ** l
    for log in W.logs:
        w = log.weight.eval_generic(vals_new, one)
        ratio = (p_new - log.position.eval_generic(vals_new, one)) / (p_old - log.position.eval_generic(vals_old, one))
        out += w * mpmath.log(ratio)
    return out


def coordinate_derivative_value(W: WaterBagPotential, name: str, p, vals: Mapping[str, object]):
    env = dict(vals)
    env[P] = p
    total = 0
    for num, factors in W.coordinate_derivative(name):
        term = num.eval_generic(env, mpmath.mpf(1))
        for pos, e in factors.values():
            term /= (p - pos.eval_generic(vals, mpmath.mpf(1))) ** e
        total += term
    return total


@dataclass
class CanonicalFrame:
    point: Dict[str, object]
    roots: List
    u: List
    lam2: List
    lame: List = field(default_factory=list)  # H_i with H_i^2 = 1/lam''(xi_i)
    jacobian: List[List] = field(default_factory=list)  # d u_i / d x_a, chart order

    @property
    def size(self) -> int:
        return len(self.roots)


def canonical_frame(W: WaterBagPotential, point: Mapping[str, object], seed: int = 0, start=None, min_gap: float = 1e-8) -> CanonicalFrame:
    vals = _values(point)
    lp = lambda_prime(W)
    by_power = lp.num.coeffs_in(P)
    deg = max(by_power)
    coeffs = [by_power[d].eval_generic(vals, mpmath.mpf(1)) if d in by_power else mpmath.mpf(0) for d in range(deg, -1, -1)]
    roots = roots_aberth(coeffs, seed=seed, start=start)
    gap = min((abs(a - b) for a, b in itertools.combinations(roots, 2)), default=mpmath.inf)
    if gap < min_gap:
        raise ConditioningError(f"critical points nearly collide (gap {mpmath.nstr(gap, 5)})")
    nu_d = lp.num.diff(P)
    lam2 = []
    for xi in roots:
        env = dict(vals)
        env[P] = xi
        lam2.append(nu_d.eval_generic(env, mpmath.mpf(1)) / lp.den.eval_generic(env, mpmath.mpf(1)))
    u = [lam_value(W, xi, vals) for xi in roots]
    jac = [[coordinate_derivative_value(W, x, xi, vals) for x in W.chart] for xi in roots]
    lame = [mpmath.sqrt(1 / l2) for l2 in lam2]
    return CanonicalFrame(dict(point), roots, u, lam2, lame, jac)


def _frame_at(W, point, base: CanonicalFrame):
    fr = canonical_frame(W, point, start=base.roots)
    order = [min(range(fr.size), key=lambda i: abs(fr.roots[i] - r)) for r in base.roots]
    if sorted(order) != list(range(fr.size)):
        raise ConditioningError("root tracking lost a critical point")
    return CanonicalFrame(
        fr.point,
        [fr.roots[i] for i in order],
        [fr.u[i] for i in order],
        [fr.lam2[i] for i in order],
        [fr.lame[i] for i in order],
        [fr.jacobian[i] for i in order],
    )


def _exact_tensors(W: WaterBagPotential):
    if W.flavor == "generic":
        return metric_closed(W), c_closed(W)
    return metric_oracle(W), c_oracle(W)


def _float(x) -> float:
    return float(abs(x))


def canonical_check(
    W: WaterBagPotential,
    point: Mapping[str, Fraction],
    tol: float = 1e-9,
    fd_tol: float = 1e-6,
    step: float = 1e-12,
    seed: int = 0,
    dps: int = DEFAULT_DPS,
) -> CheckReport:
    """Diagonal metric, identity and multiplication in canonical coordinates, plus Egoroff data.

    ``d u_i / d x_a`` is ``d lam / d x_a`` at ``xi_i``; the exact metric and
    structure tensor at ``point`` are pushed through its inverse.  The Egoroff
    potential and rotation coefficients use central finite differences of
    ``u(x)`` with tracked roots.
    """
    with mpmath.workdps(dps):
        return _canonical_check(W, point, tol, fd_tol, step, seed)


def _canonical_check(W, point, tol, fd_tol, step, seed) -> CheckReport:
    eta, c = _exact_tensors(W)
    chart = list(W.chart)
    n = len(chart)
    frame = canonical_frame(W, point, seed=seed)
    if frame.size != n:
        raise ConditioningError(f"{frame.size} critical points for {n} coordinates")
    J = mpmath.matrix(frame.jacobian)
    Jinv = J ** -1
    eta_x = mpmath.matrix([[mpf_of(v) for v in row] for row in eta.matrix_at(point)])
    eta_u = Jinv.T * eta_x * Jinv
    diag_expected = [-1 / l2 for l2 in frame.lam2]
    off = max((_float(eta_u[i, j]) for i in range(n) for j in range(n) if i != j), default=0.0)
    diag = max(_float(eta_u[i, i] - diag_expected[i]) for i in range(n))

    witnesses = [
        {"quantity": "metric off-diagonal", "max_residual": off, "tol": tol, "pass": off < tol},
        {"quantity": "metric diagonal vs -1/lam''", "max_residual": diag, "tol": tol, "pass": diag < tol},
    ]

    # product and identity
    cvals = {k: mpf_of(v) for k, v in c.eval(point).items()}
    C = {}
    for idx, v in cvals.items():
        for perm in sorted(set(itertools.permutations(idx))):
            C[perm] = v
    cu_off = 0.0
    cu_diag = 0.0
    for i, j, k in itertools.combinations_with_replacement(range(n), 3):
        total = 0
        for (a, b, cc), v in C.items():
            total += v * Jinv[chart.index(a), i] * Jinv[chart.index(b), j] * Jinv[chart.index(cc), k]
        if i == j == k:
            cu_diag = max(cu_diag, _float(total - eta_u[i, i]))
        else:
            cu_off = max(cu_off, _float(total))
    witnesses.append({"quantity": "product off-diagonal", "max_residual": cu_off, "tol": tol, "pass": cu_off < tol})
    witnesses.append({"quantity": "product diagonal vs metric", "max_residual": cu_diag, "tol": tol, "pass": cu_diag < tol})
    e = identity_vector(c, eta, point)
    e_u = [sum(J[i, chart.index(a)] * mpf_of(v) for a, v in e.items()) for i in range(n)]
    e_res = max(_float(x - 1) for x in e_u)
    witnesses.append({"quantity": "identity vs sum d/du", "max_residual": e_res, "tol": tol, "pass": e_res < tol})

    # finite differences of u and of h = -1/lam'' in each chart direction
    h = mpmath.mpf(step)
    dU = mpmath.matrix(n, n)
    dH = mpmath.matrix(n, n)
    for a, x in enumerate(chart):
        plus = dict(point)
        minus = dict(point)
        plus[x] = mpf_of(point[x]) + h
        minus[x] = mpf_of(point[x]) - h
        fp = _frame_at(W, plus, frame)
        fm = _frame_at(W, minus, frame)
        for i in range(n):
            dU[i, a] = lam_increment(W, fp.roots[i], _values(plus), fm.roots[i], _values(minus)) / (2 * h)
            dH[i, a] = (-1 / fp.lam2[i] + 1 / fm.lam2[i]) / (2 * h)
    fd_jac = max(_float(dU[i, a] - J[i, a]) for i in range(n) for a in range(n))
    witnesses.append({"quantity": "finite-difference Jacobian", "max_residual": fd_jac, "tol": fd_tol, "pass": fd_jac < fd_tol})
    dUinv = dU ** -1
    if W.s_names and W.flavor == "generic":
        s1 = chart.index("s1")
        scale = mpmath.mpf(-1) / (W.N + 1)
        egoroff = max(_float(scale * dUinv[s1, i] - diag_expected[i]) for i in range(n))
        witnesses.append({"quantity": "Egoroff potential -s1/(N+1)", "max_residual": egoroff, "tol": fd_tol, "pass": egoroff < fd_tol})
    # rotation coefficients beta_ij = d_i H_j / H_i = d_i h_j / (2 H_i H_j)
    dh_du = dH * dUinv  # [j, i] = d h_j / d u_i
    H = [mpmath.sqrt(-1 / l2) for l2 in frame.lam2]
    beta = [[dh_du[j, i] / (2 * H[i] * H[j]) for j in range(n)] for i in range(n)]
    asym = max((_float(beta[i][j] - beta[j][i]) for i in range(n) for j in range(n) if i != j), default=0.0)
    witnesses.append({"quantity": "rotation coefficients symmetric", "max_residual": asym, "tol": fd_tol, "pass": asym < fd_tol})
    ok = all(w["pass"] for w in witnesses)
    return CheckReport(
        "canonical",
        ok,
        witnesses,
        {"point": format_point(point), "roots": [mpmath.nstr(r, 12) for r in frame.roots]},
    )


# ---------------------------------------------------------------------------
# WDVV in floating point for closed-form expressions


def numeric_wdvv(
    F,
    variables: Sequence[str],
    points: Sequence[Mapping[str, object]],
    tol: float = 1e-9,
    eta: Optional[Sequence[Sequence]] = None,
    identity: Optional[str] = None,
    dps: int = DEFAULT_DPS,
    check: str = "numeric_wdvv",
) -> CheckReport:
    """Associativity of a sympy expression's third derivatives at the given points.

    ``eta`` is either supplied as a constant matrix or read off as
    ``F_(identity, i, j)`` at each point (``identity`` defaults to the first
    variable).
    """
    import sympy

    syms = [sympy.Symbol(v) for v in variables]
    params = sorted((s for s in F.free_symbols if s.name not in variables), key=lambda s: s.name)
    args = syms + params
    n = len(syms)
    third = {}
    for idx in itertools.combinations_with_replacement(range(n), 3):
        expr = sympy.diff(F, syms[idx[0]], syms[idx[1]], syms[idx[2]])
        third[idx] = sympy.lambdify(args, expr, modules="mpmath")
    e_index = variables.index(identity) if identity else 0
    witnesses = []
    ok = True
    skipped = 0
    with mpmath.workdps(dps):
        for pt in points:
            argv = [mpf_of(pt[s.name]) for s in args]
            C = {}
            for idx, fn in third.items():
                v = fn(*argv)
                for perm in sorted(set(itertools.permutations(idx))):
                    C[perm] = v
            if eta is None:
                G = mpmath.matrix([[C[(e_index, i, j)] for j in range(n)] for i in range(n)])
            else:
                G = mpmath.matrix([[mpf_of(x) for x in row] for row in eta])
            try:
                Ginv = G ** -1
            except ZeroDivisionError:
                skipped += 1
                witnesses.append({"check": check, "point": format_point(pt), "pass": None, "skipped": "singular metric"})
                continue
            X = {(a, b, m): sum(C[(a, b, l)] * Ginv[l, m] for l in range(n)) for a in range(n) for b in range(n) for m in range(n)}
            worst = mpmath.mpf(0)
            for a, b, g, d in itertools.product(range(n), repeat=4):
                r = sum(X[(a, b, m)] * C[(m, g, d)] - X[(d, b, m)] * C[(m, g, a)] for m in range(n))
                worst = max(worst, abs(r))
            good = worst < tol
            ok &= bool(good)
            witnesses.append(
                {"check": check, "point": format_point(pt), "max_residual": float(worst), "tol": tol, "pass": bool(good)}
            )
    return CheckReport(check, ok and skipped < len(points), witnesses, {"points_skipped": skipped})
