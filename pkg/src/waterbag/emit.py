"""Deterministic JSON, LaTeX and text renderings of prepotentials and reports."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from .exactalg.multipoly import MultiPoly, natural_key
from .prepotential import EulerField, PrepotentialDecomposition

FORMATS = ("json", "latex", "text")


def to_json_text(obj) -> str:
    data = obj.to_json() if hasattr(obj, "to_json") else obj
    return json.dumps(data, indent=2, sort_keys=True, default=str) + "\n"


def parse_prepotential(text: str) -> PrepotentialDecomposition:
    return PrepotentialDecomposition.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# LaTeX


def latex_symbol(name: str) -> str:
    """``t1 -> t_1``, ``x1_2 -> x_{1,2}``, ``bt1 -> \\tilde{b}_1``."""
    m = re.fullmatch(r"([a-z]+?)(\d+)(?:_(\d+))?", name)
    if not m:
        return name
    base, i, j = m.groups()
    if base in ("bt", "dt"):
        base = r"\tilde{" + base[0] + "}"
    sub = f"{i},{j}" if j else i
    return f"{base}_{{{sub}}}" if len(sub) > 1 else f"{base}_{sub}"


def _monomial_latex(powers: Mapping[str, int]) -> str:
    parts = []
    for v in sorted(powers, key=natural_key):
        e = powers[v]
        sym = latex_symbol(v)
        parts.append(sym if e == 1 else f"{sym}^{{{e}}}")
    return " ".join(parts)


def _coeff_latex(c: Fraction, first: bool, has_mono: bool) -> str:
    sign = "-" if c < 0 else ("" if first else "+")
    a = abs(c)
    if a == 1 and has_mono:
        body = ""
    elif a.denominator == 1:
        body = str(a.numerator)
    else:
        body = rf"\frac{{{a.numerator}}}{{{a.denominator}}}"
    return (sign + " " if sign and not first else sign) + body


def _term_order(item: Tuple[Dict[str, int], Fraction]):
    powers, _ = item
    return (-sum(powers.values()), [(natural_key(v), -powers[v]) for v in sorted(powers, key=natural_key)])


def poly_latex(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    terms = sorted(((dict(pw), c) for pw, c in p.items()), key=_term_order)
    out = []
    for n, (powers, c) in enumerate(terms):
        mono = _monomial_latex(powers)
        coeff = _coeff_latex(c, n == 0, bool(mono))
        out.append((coeff + " " + mono).strip() if mono else coeff)
    return " ".join(out)


def prepotential_latex(P: PrepotentialDecomposition) -> str:
    """``F = F0 + k_i ( ... ) + c k_i k_j (b_i - b_j)^2 log (b_i - b_j)^2`` grouped by parameter."""
    pieces = []
    if not P.F0.is_zero():
        pieces.append(poly_latex(P.F0))
    for b in sorted(P.F1, key=natural_key):
        f = P.F1[b]
        if f.is_zero():
            continue
        pieces.append(rf"{latex_symbol(P.k_of(b))} \left( {poly_latex(f)} \right)")
    for (u, v) in sorted(P.log_terms, key=lambda uv: (natural_key(uv[0]), natural_key(uv[1]))):
        diff = rf"({latex_symbol(u)} - {latex_symbol(v)})"
        coeff = P.log_terms[(u, v)]
        c = poly_latex(coeff) if len(list(coeff.items())) == 1 else rf"\left( {poly_latex(coeff)} \right)"
        pieces.append(rf"{c} {diff}^{{2}} \log {diff}^{{2}}")
    body = " + ".join(pieces) if pieces else "0"
    body = body.replace("+ -", "- ")
    return "F = " + body + "\n"


# ---------------------------------------------------------------------------
# text


def _degree_label(p: MultiPoly, weights: Mapping[str, Fraction]) -> str:
    degs = sorted(p.weighted_degrees(weights)) if not p.is_zero() else []
    return ", ".join(str(d) for d in degs) or "-"


def prepotential_text(P: PrepotentialDecomposition) -> str:
    E = EulerField.for_chart(P.t_names, P.b_names, P.k_names, P.N)
    w = E.weights()
    lines = [f"chart: {' '.join(P.chart)}", f"gauge: {P.gauge}"]
    lines.append(f"F0 [weighted degree {_degree_label(P.F0, w)}]: {P.F0}")
    for b in sorted(P.F1, key=natural_key):
        lines.append(f"F1[{b}] (times {P.k_of(b)}) [weighted degree {_degree_label(P.F1[b], w)}]: {P.F1[b]}")
    for (u, v), c in sorted(P.log_terms.items(), key=lambda kv: (natural_key(kv[0][0]), natural_key(kv[0][1]))):
        lines.append(f"log[{u},{v}]: ({c}) * ({u} - {v})^2 * log(({u} - {v})^2)")
    return "\n".join(lines) + "\n"


def report_text(reports: List) -> str:
    lines = []
    for r in reports:
        data = r.to_json() if hasattr(r, "to_json") else r
        name = data.get("check") or data.get("name")
        lines.append(f"{name}: {data['status']}")
    return "\n".join(lines) + "\n"


def emit(obj, fmt: str = "json") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    if fmt == "json":
        return to_json_text(obj)
    if isinstance(obj, PrepotentialDecomposition):
        return prepotential_latex(obj) if fmt == "latex" else prepotential_text(obj)
    items = obj if isinstance(obj, list) else [obj]
    return report_text(items)
