import numpy as np
import pytest

from hypersurf.errors import ConstraintError, InputError
from hypersurf.expr import evaluate
from hypersurf.families import FAMILIES, FamilySpec, build, default_variables, list_families
from hypersurf.homogeneity import estimate_degree


def test_catalog_entries():
    cat = list_families()
    assert [e["family"] for e in cat] == list(FAMILIES)
    assert len(cat) == 5
    for e in cat:
        assert {"formula", "parameters", "constraints", "degree", "citation"} <= set(e)


def test_catalog_is_a_copy():
    list_families()[0]["constraints"].append("junk")
    assert "junk" not in list_families()[0]["constraints"]


def test_default_variables():
    assert default_variables(2) == ("x", "y")
    assert default_variables(4) == ("x1", "x2", "x3", "x4")


def test_aliases():
    assert FamilySpec("ces").family == "generalized-ces"
    assert FamilySpec("binomial").family == "multinomial"
    with pytest.raises(InputError):
        FamilySpec("translog")


@pytest.mark.parametrize("spec, n, point, expected", [
    (FamilySpec("cd", A=2, coefficients=(0.5, 0.5)), 2, (4, 9), 12.0),
    (FamilySpec("ces", coefficients=(1, 1), rho=0.5, gamma=1), 2, (4, 9), 25.0),
    (FamilySpec("ces", coefficients=(1, 1), rho=-1, gamma=1), 2, (2, 2), 1.0),
    (FamilySpec("multinomial", A=3, coefficients=(1, -2, 1), gamma=2), 3, (1, 1, 4), 27.0),
    (FamilySpec("linear", coefficients=(2, 3)), 2, (1, 1), 5.0),
    (FamilySpec("counterexample", r=2), 3, (1, 1, 1), 9.0),
])
def test_values(spec, n, point, expected):
    assert evaluate(build(spec, n).expression, point) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("spec, n", [
    (FamilySpec("cd", coefficients=(0.2, 0.3, 0.6)), 3),
    (FamilySpec("ces", A=1.7, coefficients=(0.4, 1.2), rho=-2.5, gamma=0.8), 2),
    (FamilySpec("multinomial", coefficients=(1, 2, 3, 4), gamma=2.5), 4),
    (FamilySpec("counterexample", r=1.5), 3),
])
def test_declared_degree_matches_estimate(spec, n):
    built = build(spec, n)
    assert estimate_degree(built.expression).degree == pytest.approx(built.degree, abs=1e-8)


@pytest.mark.parametrize("spec, n, match", [
    (FamilySpec("ces", coefficients=(1, 1), rho=0, gamma=1), 2, "ρ ≠ 0"),
    (FamilySpec("ces", coefficients=(1, 1), rho=1.5, gamma=1), 2, "ρ < 1"),
    (FamilySpec("ces", coefficients=(1, -1), rho=0.5, gamma=1), 2, "c_i > 0"),
    (FamilySpec("ces", coefficients=(1, 1), rho=0.5, gamma=-1), 2, "γ > 0"),
    (FamilySpec("cd", A=0, coefficients=(1, 1)), 2, "A > 0"),
    (FamilySpec("cd", coefficients=(1,)), 2, "coefficients"),
    (FamilySpec("linear", coefficients=(0, 0)), 2, "nonzero"),
    (FamilySpec("counterexample", r=2), 2, "3 variables"),
    (FamilySpec("counterexample", r=1), 3, "r > 1"),
])
def test_constraints(spec, n, match):
    with pytest.raises(ConstraintError, match=match):
        build(spec, n)


def test_ces_degree_two():
    b = build(FamilySpec("ces", coefficients=(1, 2), rho=0.5, gamma=2), 2)
    assert b.degree == 2.0
    assert b.metadata["constant_returns"] is False
    rep = estimate_degree(b.expression)
    assert abs(rep.degree - 2.0) <= 1e-8
    assert rep.returns_to_scale == "increasing"


def test_spec_strings():
    b = build(FamilySpec("counterexample", r=2), 3)
    assert str(b.expression) == "(x + y + sqrt(y * z)) ^ 2.0"
    assert b.degree == 2.0


def test_metadata():
    assert build(FamilySpec("multinomial", coefficients=(1, 2), gamma=2), 2).metadata["binomial"] is True
    assert build(FamilySpec("multinomial", coefficients=(1, 2, 3), gamma=2), 3).metadata["binomial"] is False
    assert build(FamilySpec("cd", coefficients=(0.25, 0.75)), 2).metadata["constant_returns"]
    assert build(FamilySpec("counterexample", r=2), 3).metadata["domain_delta"] > 0


def test_custom_variable_names():
    b = build(FamilySpec("linear", coefficients=(1, 1)), 2, ["K", "L"])
    assert b.expression.variables == ("K", "L")
    with pytest.raises(InputError):
        build(FamilySpec("linear", coefficients=(1, 1)), 2, ["K"])


def test_negative_coefficients_print_and_reparse():
    from hypersurf.expr import parse, to_source
    b = build(FamilySpec("multinomial", coefficients=(1, -2), gamma=3), 2)
    again = parse(to_source(b.expression), ["x", "y"])
    pts = np.array([[1.0, 2.0], [0.5, 0.1]])
    for p in pts:
        assert evaluate(again, p) == evaluate(b.expression, p)
