"""Expression trees: grammar, evaluation, differentiation, simplification."""

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from confode import expr as ex
from helpers import central_difference, expressions, positive, safe_eval

X, Y = ex.X, ex.Y


class TestParse:
    def test_sum_of_power_and_product(self):
        assert ex.parse("x^2 + 3*y") == ex.Add(ex.Pow(X, ex.Const(2)), ex.Mul(ex.Const(3), Y))

    def test_function_of_negation(self):
        assert ex.parse("exp(-x)") == ex.Apply("exp", ex.Neg(X))

    def test_weighted_logistic_structure(self):
        e = ex.parse("x^(1-0.5)*exp(x)/(1+exp(x))")
        assert isinstance(e, ex.Div)
        assert e.left == ex.Mul(ex.Pow(X, ex.parse("1-0.5")), ex.Apply("exp", X))
        assert e.right == ex.Add(ex.Const(1), ex.Apply("exp", X))

    def test_power_binds_tighter_than_unary_minus(self):
        assert ex.parse("-x^2") == ex.Neg(ex.Pow(X, ex.Const(2)))

    def test_power_is_right_associative(self):
        assert ex.evaluate(ex.parse("2^3^2"), {}) == 512.0

    def test_subtraction_is_left_associative(self):
        assert ex.evaluate(ex.parse("10 - 4 - 3"), {}) == 3.0

    def test_whitespace_insensitive(self):
        assert ex.parse(" x ^ 2+3 * y ") == ex.parse("x^2+3*y")

    def test_scientific_literals(self):
        assert ex.evaluate(ex.parse("1.5e-3*x"), {"x": 2}) == pytest.approx(3e-3)

    def test_syntax_error_reports_offset_and_expected(self):
        with pytest.raises(ex.ParseError) as info:
            ex.parse("x +* 2")
        assert info.value.offset == 3
        assert "number" in info.value.expected

    def test_unclosed_parenthesis(self):
        with pytest.raises(ex.ParseError) as info:
            ex.parse("(x")
        assert info.value.expected == (")",)

    @pytest.mark.parametrize("text", ["foo(x)", "z + 1"])
    def test_unknown_identifier(self, text):
        with pytest.raises(ex.UnknownIdentifierError):
            ex.parse(text)

    def test_named_constants(self):
        e = ex.parse("x^alpha", constants={"alpha": 0.5})
        assert ex.evaluate(e, {"x": 4}) == 2.0


class TestEvaluate:
    def test_arithmetic(self):
        assert ex.evaluate(ex.parse("x^2+3*y"), {"x": 2, "y": 1}) == 7.0

    def test_log_of_one(self):
        assert ex.evaluate(ex.parse("ln(x)"), {"x": 1}) == 0.0

    def test_table_constant_row_value(self):
        assert ex.evaluate(ex.parse("x^0.5/0.5"), {"x": 2}) == pytest.approx(2 * math.sqrt(2), rel=1e-15)

    @pytest.mark.parametrize("text", ["ln(x)", "1/x", "x^-1", "(x-2)^0.5", "ln(x-1)"])
    def test_domain_errors_are_raised_not_nan(self, text):
        with pytest.raises(ex.DomainError):
            ex.evaluate(ex.parse(text), {"x": 0})

    def test_missing_variable(self):
        with pytest.raises(ex.ExprError):
            ex.evaluate(ex.parse("x + y"), {"x": 1})

    def test_lambdify_matches_evaluate(self):
        e = ex.parse("sin(x)*exp(-y) + arctan(x/y)")
        f = ex.lambdify(e, ("x", "y"))
        assert f(1.3, 0.7) == ex.evaluate(e, {"x": 1.3, "y": 0.7})


class TestDiff:
    def test_square(self):
        assert ex.simplify(ex.diff(ex.parse("x^2"), "x")) == ex.parse("2*x")

    def test_exp_of_negative(self):
        d = ex.diff(ex.parse("exp(-y)"), "y")
        assert ex.evaluate(d, {"y": 0.3}) == pytest.approx(-math.exp(-0.3), rel=1e-15)

    def test_constant(self):
        assert ex.simplify(ex.diff(ex.Const(7), "x")) == ex.ZERO

    def test_partial_ignores_other_variable(self):
        d = ex.diff(ex.parse("x*exp(-y)"), "x")
        assert ex.evaluate(d, {"x": 5, "y": 0}) == 1.0

    @pytest.mark.parametrize("text", ["tan(x)", "sqrt(x)", "abs(x - 2)", "x^x", "ln(x)", "arctan(x)", "cos(x)"])
    def test_builtins_against_finite_differences(self, text):
        e = ex.parse(text)
        d = ex.lambdify(ex.diff(e, "x"), ("x",))
        f = ex.lambdify(e, ("x",))
        for x in (0.4, 1.1, 2.7):
            assert d(x) == pytest.approx(central_difference(f, x), rel=1e-6, abs=1e-8)


class TestSimplify:
    @pytest.mark.parametrize(
        "text, expected",
        [("1*x + 0", "x"), ("x^1", "x"), ("2*3", "6"), ("0*x + y", "y"), ("x/1", "x"), ("--x", "x")],
    )
    def test_safe_rewrites(self, text, expected):
        assert ex.simplify(ex.parse(text)) == ex.parse(expected)


class TestRender:
    @pytest.mark.parametrize(
        "text",
        ["x - (y - 1)", "-(x + y)", "x/(y*2)", "(x^2)^3", "2^-x", "(-x)^2", "-x^2", "x - -y", "exp(-(x + 1))"],
    )
    def test_round_trip_preserves_structure(self, text):
        e = ex.parse(text)
        assert ex.parse(ex.render(e)) == e

    def test_rounded_display(self):
        assert ex.render(ex.Const(1 / 3), digits=6) == "0.333333"


# ---------------------------------------------------------------------------
# properties on random trees
# ---------------------------------------------------------------------------


@settings(max_examples=1000, deadline=None)
@given(expressions(("x", "y")), st.lists(st.tuples(positive, positive), min_size=10, max_size=10))
def test_render_parse_round_trip(e, points):
    back = ex.parse(ex.render(e))
    for x, y in points:
        v = safe_eval(e, x=x, y=y)
        if v is None:
            continue
        assert ex.evaluate(back, {"x": x, "y": y}) == pytest.approx(v, rel=1e-12, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(expressions(("x",)), positive)
def test_derivative_matches_central_difference(e, x):
    f = ex.lambdify(e, ("x",))
    v = safe_eval(e, x=x)
    assume(v is not None and abs(v) < 1e4)
    try:
        coarse, fine = central_difference(f, x, 1e-4), central_difference(f, x, 5e-5)
        d = ex.evaluate(ex.diff(e, "x"), {"x": x})
    except ex.DomainError:
        assume(False)
    # Richardson extrapolation of the two quotients; on rapidly varying
    # trees the oracle's own truncation estimate widens the bound
    fd = (4 * fine - coarse) / 3
    assert abs(d - fd) <= 1e-6 * max(1.0, abs(d)) + 10 * abs(fine - coarse)


@settings(max_examples=500, deadline=None)
@given(expressions(("x", "y")), positive, positive)
def test_simplify_preserves_values(e, x, y):
    v = safe_eval(e, x=x, y=y)
    assume(v is not None)
    s = ex.evaluate(ex.simplify(e), {"x": x, "y": y})
    assert abs(s - v) <= 1e-12 * max(1.0, abs(v))
