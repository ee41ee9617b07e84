import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersurf.errors import DomainError, InputError, ParseError
from hypersurf.expr import (Binary, Const, Expression, Unary, Var, evaluate, evaluate_many,
                            free_identifiers, parse, to_source)

XY = ["x", "y"]
XYZ = ["x", "y", "z"]


def test_parse_structure():
    ast = parse("(x + 2*y)^3", XY).root
    assert ast == Binary("^", Binary("+", Var(0), Binary("*", Const(2.0), Var(1))), Const(3.0))


def test_power_right_associative():
    assert evaluate(parse("2^3^2", []), []) == 512.0


def test_syntax_error_reports_token_position():
    with pytest.raises(ParseError) as info:
        parse("x + * y", XY)
    assert info.value.position == 4
    assert "'*'" in str(info.value)


@pytest.mark.parametrize("source, names", [
    ("2x", ["x"]),
    ("x +", ["x"]),
    ("(x", ["x"]),
    ("x)", ["x"]),
    ("sqrt x", ["x"]),
    ("x $ y", XY),
    ("   ", ["x"]),
])
def test_syntax_errors(source, names):
    with pytest.raises(ParseError):
        parse(source, names)


def test_unknown_identifier():
    with pytest.raises(ParseError, match="unknown identifier 'q'"):
        parse("x + q", ["x"])


@pytest.mark.parametrize("names", [["x", "x"], ["e"], ["sqrt"], ["1x"]])
def test_bad_variable_declarations(names):
    with pytest.raises(InputError):
        parse("1", names)


def test_free_identifiers():
    assert free_identifiers("sqrt(b*a) + e^a - pi") == ("b", "a")
    assert free_identifiers("2^3^2") == ()
    with pytest.raises(ParseError):
        free_identifiers("x $ y")


def test_precedence_unary_minus_below_power():
    assert evaluate(parse("-x^2", ["x"]), [3]) == -9.0
    assert evaluate(parse("(-x)^2", ["x"]), [3]) == 9.0
    assert evaluate(parse("2^-1", []), []) == 0.5


# fixed corpus; every value is hand computed
CORPUS = [
    ("(x+y)^2", XY, (1, 2), 9.0),
    ("sqrt(x*y)", XY, (4, 9), 6.0),
    ("2^3^2", [], (), 512.0),
    ("-x^2", ["x"], (3,), -9.0),
    ("(-x)^2", ["x"], (3,), 9.0),
    ("x - y - z", XYZ, (10, 3, 2), 5.0),
    ("x / y / z", XYZ, (24, 3, 2), 4.0),
    ("2*x + 3*y", XY, (1, 1), 5.0),
    ("exp(0)", [], (), 1.0),
    ("log(e)", [], (), 1.0),
    ("abs(x - y)", XY, (2, 5), 3.0),
    ("x^-1", ["x"], (4,), 0.25),
    ("x^0.5", ["x"], (16,), 4.0),
    ("(-2)^3", [], (), -8.0),
    ("-2^2", [], (), -4.0),
    ("pi", [], (), math.pi),
    ("x*(y+z)", XYZ, (2, 3, 4), 14.0),
    ("1e-3 * x", ["x"], (2000,), 2.0),
    ("sqrt(x^2 + y^2)", XY, (3, 4), 5.0),
    ("(x + y + sqrt(y*z))^2", XYZ, (1, 1, 1), 9.0),
    ("2 - -3", [], (), 5.0),
]


@pytest.mark.parametrize("source, names, point, expected", CORPUS)
def test_corpus(source, names, point, expected):
    assert evaluate(parse(source, names), point) == pytest.approx(expected, rel=1e-15, abs=1e-15)


@pytest.mark.parametrize("source, names, point", [
    ("log(x)", ["x"], (0,)),
    ("log(x)", ["x"], (-1,)),
    ("sqrt(x)", ["x"], (-1,)),
    ("1/x", ["x"], (0,)),
    ("x^-1", ["x"], (0,)),
    ("x^0.5", ["x"], (-4,)),
    ("x^0.5", ["x"], (0,)),
    ("exp(x)", ["x"], (1000,)),
    ("x^y", XY, (-2, 0.5)),
])
def test_domain_errors(source, names, point):
    with pytest.raises(DomainError):
        evaluate(parse(source, names), point)


def test_integer_power_of_negative_base_allowed():
    assert evaluate(parse("x^3", ["x"]), [-2]) == -8.0
    assert evaluate(parse("x^y", XY), [-2, 2]) == 4.0


def test_point_arity_checked():
    with pytest.raises(InputError):
        evaluate(parse("x + y", XY), [1.0])


def test_evaluate_many_matches_pointwise():
    expr = parse("x*exp(y) - log(x + y)", XY)
    pts = np.array([[0.5, 1.0], [2.0, 0.25], [1.5, 1.5]])
    many = evaluate_many(expr, pts)
    assert [float(v) for v in many] == [evaluate(expr, p) for p in pts]


def test_evaluate_many_reports_failing_sample():
    with pytest.raises(DomainError, match="sample 1"):
        evaluate_many(parse("log(x)", ["x"]), np.array([[1.0], [-1.0]]))


def test_evaluation_is_pure_and_thread_safe():
    expr = parse("sqrt(x*y) + exp(x/y)^1.5", XY)
    ref = evaluate(expr, [1.3, 0.7])
    with ThreadPoolExecutor(4) as pool:
        got = list(pool.map(lambda _: evaluate(expr, [1.3, 0.7]), range(64)))
    assert all(g == ref for g in got)


def test_expression_rejects_bad_index():
    with pytest.raises(InputError):
        Expression(Var(2), ("x", "y"))


def test_constants_must_be_finite():
    with pytest.raises(InputError):
        Const(float("inf"))


# --- round trip ------------------------------------------------------------

def _trees(n):
    leaves = st.one_of(
        st.builds(Var, st.integers(0, n - 1)),
        st.builds(Const, st.floats(0, 1e6, allow_nan=False, allow_infinity=False)),
    )

    def extend(children):
        return st.one_of(
            st.builds(Unary, st.sampled_from(["neg", "sqrt", "exp", "log", "abs"]), children),
            st.builds(Binary, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(_trees(3))
def test_print_parse_round_trip(root):
    expr = Expression(root, XYZ)
    assert parse(to_source(expr), XYZ) == expr


def test_round_trip_examples():
    for source in ["-x^2", "(-x)^2", "2^3^2", "(2^3)^2", "x - (y - z)", "x / (y * z)", "--x", "x^-y^z"]:
        expr = parse(source, XYZ)
        assert parse(to_source(expr), XYZ) == expr
