import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from confeinstein import catalog
from confeinstein import symexpr as sx


def ev(text, mode="float", **vals):
    return sx.evaluate(sx.parse_expression(text), sx.Binding(vals, mode))


def test_parse_shapes():
    e = sx.parse_expression("1 - 2*M/r")
    assert isinstance(e, sx.Add)
    assert isinstance(e.terms[1], sx.Neg) and isinstance(e.terms[1].arg, sx.Div)
    e = sx.parse_expression("r^2 * sin(theta)^2")
    assert isinstance(e, sx.Mul)
    assert all(isinstance(f, sx.Pow) and f.exp == 2 for f in e.factors)
    assert isinstance(e.factors[1].base, sx.Func) and e.factors[1].base.name == "sin"
    with pytest.raises(sx.ExprSyntaxError):
        sx.parse_expression("2^x")


def test_parse_errors_carry_position():
    with pytest.raises(sx.ExprSyntaxError):
        sx.parse_expression("1 + * 2")
    with pytest.raises(sx.ExprSyntaxError):
        sx.parse_expression("foo(x)")
    with pytest.raises(sx.ExprSyntaxError):
        sx.parse_expression("(x + 1")


def test_differentiation_rules():
    d = sx.differentiate(sx.parse_expression("r^2"), "r")
    assert ev(sx.to_string(d), r=3) == 6
    d = sx.differentiate(sx.parse_expression("sin(x)"), "x")
    assert ev(sx.to_string(d), x=0.3) == pytest.approx(math.cos(0.3), rel=1e-15)
    d = sx.differentiate(sx.parse_expression("1 - 2*M/r"), "r")
    assert sx.evaluate(d, sx.Binding({"M": 1, "r": 4}, "exact")) == Fraction(1, 8)


def test_evaluation_examples():
    assert ev("exp(0)") == 1.0
    assert ev("1 - 2/r", "exact", r=4) == Fraction(1, 2)
    with pytest.raises(sx.EvaluationError):
        ev("1/(r-1)", "exact", r=1)
    with pytest.raises(sx.EvaluationError):
        ev("1/(r-1)", r=1)


def test_exact_mode_rejects_transcendentals():
    with pytest.raises(sx.EvaluationError):
        ev("sin(x)", "exact", x=1)
    with pytest.raises(sx.EvaluationError):
        ev("sqrt(x)", "exact", x=4)


def test_simplify_examples():
    assert sx.to_string(sx.simplify(sx.parse_expression("0*x + 1*y"))) == "y"
    assert sx.to_string(sx.simplify(sx.parse_expression("2+3"))) == "5"
    s = sx.simplify(sx.parse_expression("x + x"))
    assert sx.to_string(s) == "2*x"


def test_parse_total_on_catalog():
    for e in catalog.entries():
        for row in e.metric.components:
            for c in row:
                assert sx.parse_expression(sx.to_string(c)) is not None


def test_print_parse_round_trip():
    for text in ["1 - 2*M/r", "r^2*sin(theta)^2", "-(x^-2)", "exp(-x)/(1 + y)^3", "a - (b - c)"]:
        e = sx.parse_expression(text)
        again = sx.parse_expression(sx.to_string(e))
        b = sx.Binding({"M": 1, "r": 3, "theta": 0.4, "x": 0.7, "y": 1.5, "a": 2, "b": 5, "c": 7}, "float")
        assert sx.evaluate(again, b) == pytest.approx(sx.evaluate(e, b), rel=1e-15)


# ---------------------------------------------------------------- properties

_leaves = st.one_of(st.sampled_from(["x", "y"]), st.integers(-3, 3).map(str))


def _smooth(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: f"({t[0]} + {t[1]})"),
        st.tuples(children, children).map(lambda t: f"({t[0]})*({t[1]})"),
        st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        children.map(lambda c: f"sin({c})"),
        children.map(lambda c: f"cos({c})"),
    )


smooth_exprs = st.recursive(_leaves, _smooth, max_leaves=8)


def _rational(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: f"({t[0]} - {t[1]})"),
        st.tuples(children, children).map(lambda t: f"({t[0]})*({t[1]})"),
        st.tuples(children, children).map(lambda t: f"({t[0]})/(1 + ({t[1]})^2)"),
        st.tuples(children, st.integers(-2, 3)).map(lambda t: f"(2 + ({t[0]})^2)^{t[1]}"),
    )


rational_exprs = st.recursive(_leaves, _rational, max_leaves=8)


@given(smooth_exprs, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_derivative_matches_central_difference(text, x, y):
    e = sx.parse_expression(text)
    d = sx.differentiate(e, "x")
    h = 1e-6
    f = lambda xv: sx.evaluate(e, sx.Binding({"x": xv, "y": y}))
    fd = (f(x + h) - f(x - h)) / (2 * h)
    an = sx.evaluate(d, sx.Binding({"x": x, "y": y}))
    scale = max(1.0, abs(an), abs(f(x)))
    assert abs(an - fd) <= 1e-6 * scale


@given(rational_exprs, st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))
def test_simplify_preserves_value_exactly(text, x, y):
    e = sx.parse_expression(text)
    b = sx.Binding({"x": x, "y": y}, "exact")
    try:
        v = sx.evaluate(e, b)
    except sx.EvaluationError:
        return
    assert sx.evaluate(sx.simplify(e), b) == v


@given(rational_exprs)
def test_to_string_round_trip_exact(text):
    e = sx.parse_expression(text)
    again = sx.parse_expression(sx.to_string(e))
    b = sx.Binding({"x": Fraction(2, 3), "y": Fraction(-5, 4)}, "exact")
    try:
        v = sx.evaluate(e, b)
    except sx.EvaluationError:
        return
    assert sx.evaluate(again, b) == v
