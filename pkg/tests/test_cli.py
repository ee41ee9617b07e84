import csv
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from hypersurf.cli import main, parse_domain, parse_params, parse_range
from hypersurf.errors import InputError
from hypersurf.report import load_schema


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def analyze(capsys, *argv):
    code, out, err = run(capsys, "analyze", "--no-timing", *argv)
    assert code == 0, err
    return json.loads(out)


def test_parse_params():
    assert parse_params("A=1,rho=0.5,gamma=1,c=1,1") == {"A": 1.0, "rho": 0.5, "gamma": 1.0, "c": [1.0, 1.0]}
    assert parse_params("c=2") == {"c": [2.0]}
    for bad in ["1,2", "A=x", "A=1,A=2", "=3"]:
        with pytest.raises(InputError):
            parse_params(bad)


def test_parse_range_and_domain():
    assert parse_range("0.5:2") == (0.5, 2.0)
    assert parse_domain("1:2", 3) == [(1.0, 2.0)] * 3
    assert parse_domain("1:2,3:4", 2) == [(1.0, 2.0), (3.0, 4.0)]
    for bad in ["2:1", "a:b", "1:2:3"]:
        with pytest.raises(InputError):
            parse_range(bad)
    with pytest.raises(InputError):
        parse_domain("1:2,3:4", 3)


def test_analyze_multinomial(capsys):
    rep = analyze(capsys, "--expr", "(2*x+3*y)^1.5", "--vars", "x,y")
    assert rep["classification"]["verdict"] == "MultinomialPower"
    np.testing.assert_allclose(rep["classification"]["coefficients"], [2, 3], rtol=1e-10)
    assert rep["homogeneity"]["degree"] == pytest.approx(1.5, abs=1e-8)
    assert rep["curvature"]["n_points"] == 81


def test_analyze_family(capsys):
    rep = analyze(capsys, "--family", "ces", "--params", "A=1,rho=0.5,gamma=1,c=1,1", "--vars", "x,y")
    assert rep["classification"]["verdict"] == "LinearlyHomogeneousFlat"
    assert rep["config"]["family"]["name"] == "generalized-ces"
    assert rep["classification"]["economics"] == "constant return to scale"


def test_analyze_counterexample_family_defaults_to_three_variables(capsys):
    rep = analyze(capsys, "--family", "counterexample", "--params", "r=2", "--grid", "5")
    assert rep["config"]["variables"] == ["x", "y", "z"]
    assert rep["classification"]["gk_zero_but_not_flat"] is True


@pytest.mark.parametrize("extra", [[], ["--vars", "x"]])
def test_parse_error_exit_code(capsys, extra):
    code, out, err = run(capsys, "analyze", "--expr", "log(", *extra)
    assert code == 1
    assert out == ""
    assert "position 4" in err and "^" in err


def test_variables_inferred_without_vars(capsys):
    rep = analyze(capsys, "--expr", "y^2 * sqrt(x) + pi*x*y")
    assert rep["config"]["variables"] == ["y", "x"]


@pytest.mark.parametrize("argv", [
    ["analyze", "--expr", "x*y", "--vars", "x,y", "--family", "cd"],
    ["analyze", "--expr", "x^2", "--vars", "x"],
    ["analyze", "--expr", "x*y", "--vars", "x,y", "--grid", "1"],
    ["analyze", "--expr", "x*y*z*u*v", "--vars", "x,y,z,u,v", "--grid", "20"],
    ["analyze", "--family", "ces", "--params", "rho=0,gamma=1,c=1,1"],
    ["analyze", "--family", "cd", "--params", "zeta=1,c=1,1"],
    ["analyze", "--expr-file", "/nonexistent/expr.txt", "--vars", "x,y"],
])
def test_input_errors_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_argparse_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--grid", "many"])
    assert info.value.code == 1


def test_domain_error_exit_2(capsys):
    code, _, err = run(capsys, "analyze", "--expr", "log(x - y)", "--vars", "x,y")
    assert code == 2
    assert "math error" in err


def test_byte_stable_output(capsys):
    argv = ["--expr", "sqrt(x*y) + x", "--vars", "x,y", "--seed", "3"]
    first = run(capsys, "analyze", "--no-timing", *argv)[1]
    second = run(capsys, "analyze", "--no-timing", *argv)[1]
    assert first == second


def test_report_validates_against_schema(capsys):
    schema = load_schema()
    for argv in (["--expr", "(x+y+sqrt(y*z))^2", "--vars", "x,y,z", "--grid", "5"],
                 ["--expr", "x+y+1", "--vars", "x,y"]):
        jsonschema.validate(json.loads(run(capsys, "analyze", *argv)[1]), schema)
    rep = analyze(capsys, "--expr", "x*y", "--vars", "x,y")
    assert "runtime" not in rep
    jsonschema.validate(rep, schema)


def test_csv_consistent_with_summary(capsys, tmp_path):
    path = tmp_path / "graph.csv"
    out = tmp_path / "report.json"
    code, stdout, _ = run(capsys, "analyze", "--no-timing", "--expr", "x^2*y", "--vars", "x,y",
                          "--grid", "6", "--csv", str(path), "--out", str(out))
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x1", "x2", "f", "K", "Rmax"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (36, 5)
    assert data[:, 3].max() == rep["curvature"]["K"]["max"]
    assert data[:, 4].min() == rep["curvature"]["riemann_max_abs"]["min"]
    np.testing.assert_array_equal(data[:, 2], data[:, 0] ** 2 * data[:, 1])


def test_convention_changes_only_normalisation(capsys):
    p = analyze(capsys, "--expr", "x*y", "--vars", "x,y", "--convention", "paper")
    g = analyze(capsys, "--expr", "x*y", "--vars", "x,y", "--convention", "gauss")
    assert p["classification"] == g["classification"]
    for name in ("paper", "gauss"):
        a = p["curvature"]["riemann_max_abs_by_convention"][name]
        b = g["curvature"]["riemann_max_abs_by_convention"][name]
        assert a == pytest.approx(b, rel=1e-14)


def test_ushakov(capsys, tmp_path):
    path = tmp_path / "mesh.csv"
    code, out, _ = run(capsys, "ushakov", "--g", "t^2", "--h", "t^3", "--resolution", "2", "--out", str(path))
    assert code == 0
    summary = json.loads(out)
    assert summary["rows"] == 4 and summary["singular_points"] == 0
    assert summary["max_abs_K"] <= 1e-8
    assert len(path.read_text().splitlines()) == 5


def test_ushakov_edge_of_regression_reported(capsys):
    code, out, _ = run(capsys, "ushakov", "--g", "t^2", "--h", "t^3")
    assert code == 0
    assert json.loads(out)["singular_points"] == 31


def test_ushakov_constant_g_exit_2(capsys):
    assert run(capsys, "ushakov", "--g", "1", "--h", "t^3")[0] == 2


def test_ode_check(capsys, tmp_path):
    path = tmp_path / "ode.csv"
    code, out, _ = run(capsys, "ode-check", "--r", "2", "--c", "0", "--out", str(path))
    assert code == 0
    assert json.loads(out)["max_error"] <= 1e-12
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["u", "w_numeric", "w_closed", "abs_error"]
    np.testing.assert_allclose(np.array(rows[1:], dtype=float)[:, 1], 2.0, rtol=1e-14)


def test_ode_check_pole_exit_2(capsys):
    assert run(capsys, "ode-check", "--r", "2", "--c", "-0.5")[0] == 2


def test_families(capsys):
    code, out, _ = run(capsys, "families")
    assert code == 0
    assert len(json.loads(out)) == 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hypersurf", "families"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)[0]["family"] == "cobb-douglas"
