"""Command-line front end.

Subcommands: ``construct``, ``verify``, ``flatcoords``, ``examples`` and
``reduce-bn``.  Options come from flags, then a JSON ``--config`` file, then
built-in defaults.  Exit codes: 0 all checks pass, 1 a check failed, 2 usage
error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence

from .emit import FORMATS, emit, to_json_text
from .exactalg.frac import PoleStructureError
from .frobenius import (
    c_closed,
    c_oracle,
    expected_flat_metric,
    flat_map,
    flat_structure,
    metric_closed,
    metric_oracle,
    push_to_flat,
)
from .prepotential import (
    CheckReport,
    IntegrabilityError,
    bn_restriction_check,
    f_manifold_check,
    homogeneity_check,
    integrate_F,
    intersection_form,
    k_decomposition_check,
    sample_points,
    wdvv_check,
)
from .numeric import canonical_check
from .reference_cases import run_example_suite
from .superpotential import FLAVORS, make_waterbag

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    n: int = 1
    m: int = 0
    flavor: str = "generic"
    rational_spec: Optional[list] = None
    points: int = 20
    seed: int = 0
    tol: float = 1e-9
    format: str = "json"
    out: Optional[str] = None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="polynomial degree minus one")
    common.add_argument("--m", type=int, default=None, help="number of log terms")
    common.add_argument("--flavor", choices=FLAVORS, default=None)
    common.add_argument("--rational-spec", default=None, metavar="FILE", help='JSON list like [{"L": 2}]')
    common.add_argument("--points", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--config", default=None, metavar="FILE", help="JSON file with defaults for these options")

    parser = argparse.ArgumentParser(prog="waterbag", description="WDVV prepotentials from water-bag superpotentials")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("construct", parents=[common], help="build the flat structure and prepotential")
    sub.add_parser("verify", parents=[common], help="run the verification battery")
    sub.add_parser("flatcoords", parents=[common], help="print the flat coordinate map")
    sub.add_parser("examples", parents=[common], help="reproduce the printed examples")
    sub.add_parser("reduce-bn", parents=[common], help="check the even restriction of A_(2N+1)")
    return parser


def _load_json_file(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path} is not valid JSON: {exc}") from exc


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    names = {f.name for f in fields(RunConfig)} - {"command"}
    if ns.config:
        data = _load_json_file(ns.config, "config file")
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(k.replace("-", "_") for k in data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k.replace("-", "_"), v)
    for name in names:
        v = getattr(ns, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if isinstance(cfg.rational_spec, str):
        cfg.rational_spec = _load_json_file(cfg.rational_spec, "rational spec")
    if cfg.format not in FORMATS:
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.points < 1:
        raise UsageError("--points must be positive")
    return cfg


def _potential(cfg: RunConfig):
    try:
        return make_waterbag(int(cfg.n), int(cfg.m), cfg.flavor, cfg.rational_spec)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _sample(chart: Sequence[str], W, cfg: RunConfig):
    b_like = [x for x in chart if x.startswith("b")]
    nonzero = list(W.params) + [x for x in chart if x.startswith("x") and x.endswith(f"_{_pole_top(x, W)}")]
    return sample_points(list(chart) + list(W.params), cfg.points, cfg.seed, distinct=b_like, nonzero=nonzero)


def _pole_top(name: str, W) -> int:
    """Index of the pole-local coordinate that sits in denominators (``x_{i,L}``)."""
    i = int(name[1:].split("_")[0])
    return len(W.pole_names[i - 1][1])


def _equivalence_report(W) -> CheckReport:
    witnesses = []
    if W.flavor == "generic":
        dm = metric_closed(W).differences(metric_oracle(W))
        dc = c_closed(W).differences(c_oracle(W))
        witnesses.append({"tensor": "metric", "differences": [list(d) for d in dm]})
        witnesses.append({"tensor": "c", "differences": [list(d) for d in dc]})
        return CheckReport("oracle_equivalence", not dm and not dc, witnesses)
    chart = flat_map(W)
    dm = expected_flat_metric(W, chart).differences(push_to_flat(metric_oracle(W), chart))
    witnesses.append({"tensor": "flat metric", "differences": [list(d) for d in dm]})
    return CheckReport("oracle_equivalence", not dm, witnesses, {"note": "c has no closed form for this flavor"})


def _construct(cfg: RunConfig):
    W = _potential(cfg)
    chart, eta, c = flat_structure(W, "closed")
    try:
        P = integrate_F(c, eta, dict(zip(W.b_names, W.params)))
    except (IntegrabilityError, PoleStructureError) as exc:
        return W, chart, eta, c, None, str(exc)
    return W, chart, eta, c, P, None


def cmd_construct(cfg: RunConfig):
    W, chart, eta, c, P, why = _construct(cfg)
    if P is not None:
        return EXIT_OK, emit(P, cfg.format)
    data = {
        "superpotential": W.to_json(),
        "chart": chart.to_json(),
        "eta": eta.to_json(),
        "c": c.to_json(),
        "prepotential": None,
        "reason": why,
    }
    return EXIT_OK, to_json_text(data)


def cmd_verify(cfg: RunConfig):
    W, chart, eta, c, P, why = _construct(cfg)
    pts = _sample(chart.target, W, cfg)
    reports: List[CheckReport] = [_equivalence_report(W)]
    if P is not None:
        reports.append(wdvv_check(P, eta, pts))
        reports.append(homogeneity_check(P))
        reports.append(intersection_form(P, eta)[1])
    else:
        reports.append(wdvv_check(c, eta, pts))
    if W.flavor == "generic" and W.M:
        reports.append(k_decomposition_check(c, eta, W.params, pts[: min(len(pts), 10)]))
    if W.flavor == "generic":
        reports.append(f_manifold_check(c, eta, pts[: min(len(pts), 3)]))
        npts = sample_points(list(W.chart) + list(W.params), min(cfg.points, 3), cfg.seed, distinct=W.b_names, nonzero=W.params)
        for pt in npts:
            reports.append(canonical_check(W, pt, tol=cfg.tol))
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    if cfg.format == "json":
        return code, to_json_text({"superpotential": W.to_json(), "reports": [r.to_json() for r in reports]})
    return code, emit(reports, cfg.format)


def cmd_flatcoords(cfg: RunConfig):
    W = _potential(cfg)
    chart = flat_map(W)
    data = chart.to_json()
    data["round_trip"] = chart.round_trip_ok()
    data["jacobian_determinant"] = str(chart.jacobian_determinant())
    return EXIT_OK, to_json_text(data)


def cmd_examples(cfg: RunConfig):
    code, results = run_example_suite(points=min(cfg.points, 10), seed=cfg.seed, tol=cfg.tol)
    if cfg.format == "json":
        return code, to_json_text({"examples": [r.to_json() for r in results]})
    return code, "\n".join(f"{r.name}: {r.status}" for r in results) + "\n"


def cmd_reduce_bn(cfg: RunConfig):
    rep = bn_restriction_check(int(cfg.n), int(cfg.m), points=min(cfg.points, 10), seed=cfg.seed)
    return (EXIT_OK if rep.passed else EXIT_FAIL), emit(rep, cfg.format)


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "flatcoords": cmd_flatcoords,
    "examples": cmd_examples,
    "reduce-bn": cmd_reduce_bn,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(ns)
        code, text = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"waterbag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - surfaced as an internal error code
        print(f"waterbag: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
