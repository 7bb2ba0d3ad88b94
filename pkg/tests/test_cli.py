import json
import subprocess
import sys

import pytest

from waterbag import construct, make_waterbag
from waterbag.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from waterbag.emit import emit, latex_symbol, parse_prepotential, prepotential_latex, prepotential_text
from waterbag.prepotential import CheckReport
from waterbag.reference_cases import EXACT, FAIL, UP_TO_SIGN, run_example_suite


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# emit


def test_json_round_trip():
    _, _, _, P = construct(make_waterbag(1, 2))
    assert parse_prepotential(emit(P, "json")) == P


def test_latex_symbols():
    assert latex_symbol("t1") == "t_1"
    assert latex_symbol("x1_2") == "x_{1,2}"
    assert latex_symbol("bt1") == r"\tilde{b}_1"
    assert latex_symbol("k12") == "k_{12}"


def test_latex_groups_by_weight():
    _, _, _, P = construct(make_waterbag(1, 2))
    text = prepotential_latex(P)
    assert r"k_1 \left(" in text and r"k_2 \left(" in text
    assert r"\frac{1}{4} k_1 k_2 (b_1 - b_2)^{2} \log (b_1 - b_2)^{2}" in text


def test_text_shows_weighted_degrees():
    _, _, _, P = construct(make_waterbag(2, 1))
    text = prepotential_text(P)
    assert "F0 [weighted degree 8]" in text
    assert "F1[b1] (times k1) [weighted degree 5]" in text


def test_report_emit_formats():
    rep = CheckReport("demo", True)
    assert json.loads(emit(rep, "json"))["status"] == "pass"
    assert emit([rep, CheckReport("other", False)], "text") == "demo: pass\nother: fail\n"
    with pytest.raises(ValueError):
        emit(rep, "yaml")


# command line


def test_construct_latex_has_five_monomials(capsys):
    code, out, _ = run(capsys, "construct", "--n", "2", "--m", "1", "--format", "latex")
    assert code == EXIT_OK
    # the log position is b_1 here and variables are listed alphabetically
    for mono in ("t_1^{2} t_2", "b_1^{2} t_1", "t_2^{4}", "b_1 t_2^{2}", "b_1^{3} t_2", "b_1^{5}"):
        assert mono in out, mono


def test_construct_is_byte_identical(capsys):
    a = run(capsys, "construct", "--n", "2", "--m", "2")[1]
    b = run(capsys, "construct", "--n", "2", "--m", "2")[1]
    assert a == b
    assert parse_prepotential(a).log_terms


def test_verify_passes_and_is_deterministic(capsys):
    code, first, _ = run(capsys, "verify", "--n", "2", "--m", "1", "--points", "4", "--seed", "3")
    assert code == EXIT_OK
    _, second, _ = run(capsys, "verify", "--n", "2", "--m", "1", "--points", "4", "--seed", "3")
    assert first == second
    checks = [r["check"] for r in json.loads(first)["reports"]]
    assert checks[:4] == ["oracle_equivalence", "wdvv", "homogeneity", "intersection_form"]


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--n", "1", "--m", "1", "--flavor", "bn", "--points", "3"],
        ["verify", "--n", "0", "--m", "2", "--points", "3"],
    ],
)
def test_verify_other_flavors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_OK


def test_verify_rational(capsys, tmp_path):
    spec = tmp_path / "poles.json"
    spec.write_text('[{"L": 2}]')
    code, out, _ = run(capsys, "verify", "--n", "2", "--m", "1", "--flavor", "rational", "--rational-spec", str(spec), "--points", "3")
    assert code == EXIT_OK
    assert json.loads(out)["superpotential"]["rational"] == [{"L": 2}]


def test_flatcoords(capsys):
    code, out, _ = run(capsys, "flatcoords", "--n", "3")
    data = json.loads(out)
    assert code == EXIT_OK and data["round_trip"] and data["target"] == ["t1", "t2", "t3"]


def test_reduce_bn(capsys):
    code, out, _ = run(capsys, "reduce-bn", "--n", "1", "--m", "1", "--points", "3")
    assert code == EXIT_OK and json.loads(out)["status"] == "pass"


@pytest.mark.parametrize(
    "argv",
    [["construct", "--n", "-1"], ["bogus"], ["construct", "--format", "pdf"], ["construct", "--points", "0"], ["verify", "--flavor", "rational"]],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "m": 0, "format": "text"}))
    _, from_file, _ = run(capsys, "construct", "--config", str(cfg))
    assert from_file.startswith("chart: t1 t2 t3")
    _, flag_wins, _ = run(capsys, "construct", "--config", str(cfg), "--n", "1")
    assert flag_wins.startswith("chart: t1\n")
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "construct", "--config", str(cfg))[0] == EXIT_USAGE


def test_out_file(capsys, tmp_path):
    target = tmp_path / "F.json"
    assert run(capsys, "construct", "--n", "3", "--out", str(target))[0] == EXIT_OK
    assert parse_prepotential(target.read_text()).t_names == ("t1", "t2", "t3")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "waterbag", "construct", "--n", "1", "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("chart: t1")


# example suite


def test_example_suite_passes():
    code, results = run_example_suite(points=10)
    assert code == 0
    status = {r.name: r.status for r in results}
    assert status["A3 (N=3, M=0)"] == UP_TO_SIGN
    assert status["N=2, M=1"] == UP_TO_SIGN
    assert status["N=1, M=2"] == EXACT
    assert status["N=0, M=2"] == EXACT
    assert FAIL not in status.values()


def test_example_suite_without_weights():
    code, results = run_example_suite(k_zero=True)
    assert code == 0
    assert [r.name for r in results] == ["A3 (N=3, M=0)", "B restriction (N=1, M=0)", "B restriction (N=2, M=0)"]


def test_examples_command_fails_loudly_on_mismatch(capsys, monkeypatch):
    import waterbag.reference_cases as rc

    monkeypatch.setattr(rc, "EXAMPLE_A3", "t1**2*t3/7")
    code, results = rc.run_example_suite(points=2)
    assert code == EXIT_FAIL
    assert results[0].status == FAIL
