"""Conformable derivative, partials, alpha-integral, closed forms, parts."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from confode import confcalc as cc
from confode import expr as ex
from helpers import alphas, expressions, positive, safe_eval

P = ex.parse


class TestDerivative:
    def test_power_rule_limit_form(self):
        assert cc.conf_derivative_limit(P("x^2"), 4.0, 0.5) == pytest.approx(16.0, abs=1e-4)

    def test_power_rule_identity_form_is_exact(self):
        assert cc.conf_derivative_identity(P("x^2"), 4.0, 0.5) == 16.0

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-3, 4), alphas, positive)
    def test_power_rule_is_exact_for_monomials(self, n, alpha, x):
        assert cc.conf_derivative_identity(P(f"x^{n!r}"), x, alpha) == n * x ** (n - alpha)

    def test_scaled_monomial(self):
        assert cc.conf_derivative_identity(P("3*x^-1.5"), 2.0, 0.5) == -4.5 * 2.0**-2.0

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 1.0])
    def test_constant_has_zero_derivative(self, alpha):
        assert cc.conf_derivative_limit(P("7"), 1.0, alpha) == 0.0
        assert cc.conf_derivative_identity(P("7"), 1.0, alpha) == 0.0

    def test_sine_limit_vs_closed_value(self):
        expected = 2**0.7 * math.cos(2.0)
        assert cc.conf_derivative_limit(P("sin(x)"), 2.0, 0.3) == pytest.approx(expected, abs=1e-4)
        assert cc.conf_derivative_identity(P("sin(x)"), 2.0, 0.3) == pytest.approx(expected, rel=1e-14)

    def test_alpha_one_is_classical(self):
        f = P("x^3*exp(-x)")
        x = 1.7
        classical = (3 * x**2 - x**3) * math.exp(-x)
        assert cc.conf_derivative_identity(f, x, 1.0) == pytest.approx(classical, rel=1e-14)

    def test_decay_solution_slope(self):
        # chain rule by hand: d/dx exp(-2 sqrt(x)) = -x^(-1/2) exp(-2 sqrt(x)); times x^(1/2)
        value = cc.conf_derivative_identity(P("exp(-x^0.5/0.5)"), 1.0, 0.5)
        assert value == pytest.approx(-math.exp(-2.0), rel=1e-14)

    def test_symbolic_derivative(self):
        d = cc.conf_derivative_expr(P("x^3"), 0.25)
        assert ex.evaluate(d, {"x": 2.0}) == pytest.approx(3 * 2.0**2.75, rel=1e-14)

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_alpha_out_of_range(self, alpha):
        with pytest.raises(ValueError):
            cc.conf_derivative_identity(P("x"), 1.0, alpha)

    def test_needs_positive_x(self):
        with pytest.raises(ValueError):
            cc.conf_derivative_limit(P("x"), 0.0, 0.5)


class TestPartials:
    def test_classical_partial_at_alpha_one(self):
        assert cc.conf_partial(P("x*exp(-y)"), "y", {"x": 1.0, "y": 1e-300}, 1.0) == pytest.approx(-1.0)

    def test_weighted_partial(self):
        # x^(1-a) d/dx (x^0.5 e^-y) at (4, 0) with a = 0.5: 4^0.5 * 0.5 * 4^-0.5 = 0.5
        value = cc.conf_partial(P("x^0.5*exp(-y)"), "x", {"x": 4.0, "y": 0.0}, 0.5)
        assert value == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
    def test_exactness_pair(self, alpha):
        M = P(f"x^(1-{alpha})*exp(-y)")
        N = P("-(2*y + x*exp(-y))")
        point = {"x": 2.0, "y": 1.0}
        expected = -(2.0 ** (1 - alpha)) * math.exp(-1.0)
        dM = ex.evaluate(ex.diff(M, "y"), point)
        dN = cc.conf_partial(N, "x", point, alpha)
        assert dM == pytest.approx(expected, rel=1e-14)
        assert dN == pytest.approx(expected, rel=1e-14)

    def test_limit_cross_check(self):
        f = P("sin(x*y) + x^2*y")
        point = {"x": 1.3, "y": 0.8}
        for var in ("x", "y"):
            a = cc.conf_partial(f, var, point, 0.4)
            b = cc.conf_partial_limit(f, var, point, 0.4)
            assert a == pytest.approx(b, abs=1e-5)


class TestIntegral:
    def test_constant_from_zero(self):
        assert cc.conf_integral_numeric(P("1"), 0.0, 2.0, 0.5) == pytest.approx(2 * math.sqrt(2), rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8, 1.0])
    def test_log_row(self, alpha):
        value = cc.conf_integral_numeric(P(f"x^(-{alpha})"), 1.0, math.e, alpha)
        assert value == pytest.approx(1.0, rel=1e-12)

    def test_classical_case(self):
        assert cc.conf_integral_numeric(P("x"), 0.0, 3.0, 1.0) == pytest.approx(4.5, rel=1e-14)

    def test_reversed_limits_negate(self):
        a = cc.conf_integral_numeric(P("exp(x)"), 0.5, 2.0, 0.4)
        b = cc.conf_integral_numeric(P("exp(x)"), 2.0, 0.5, 0.4)
        assert a == pytest.approx(-b, rel=1e-14)

    def test_accepts_callables(self):
        assert cc.conf_integral_numeric(lambda x: 1.0, 0.0, 2.0, 0.5) == pytest.approx(2 * math.sqrt(2), rel=1e-12)

    def test_negative_limits_rejected(self):
        with pytest.raises(ValueError):
            cc.conf_integral_numeric(P("1"), -1.0, 1.0, 0.5)

    @settings(max_examples=40, deadline=None)
    @given(alphas, positive)
    def test_fundamental_theorem(self, alpha, t):
        """Derivative of t -> I_a(f)(t) returns f(t)."""
        f = P("exp(-x)*cos(x) + x^2")
        fn = ex.lambdify(f, ("x",))
        h = 1e-4
        left = cc.conf_integral_numeric(f, 0.2, t - h, alpha)
        right = cc.conf_integral_numeric(f, 0.2, t + h, alpha)
        derivative = t ** (1 - alpha) * (right - left) / (2 * h)
        assert derivative == pytest.approx(fn(t), rel=1e-6, abs=1e-6)


class TestTable:
    def _differentiates_back(self, f, F, alpha):
        for x in cc.DEFAULT_CONFIG.probe_points:
            got = cc.conf_derivative_identity(F, x, alpha)
            want = ex.evaluate(f, {"x": x})
            assert got == pytest.approx(want, rel=1e-8, abs=1e-10)

    def test_power_row(self):
        hit = cc.table1_lookup(P("x^2"), 0.5)
        assert hit.pattern == "power"
        assert ex.evaluate(hit.antiderivative, {"x": 2.0}) == pytest.approx(2.0**2.5 / 2.5, rel=1e-15)
        self._differentiates_back(P("x^2"), hit.antiderivative, 0.5)

    def test_log_derivative_row(self):
        f = P("x^(1-0.5)*exp(x)/(1+exp(x))")
        hit = cc.table1_lookup(f, 0.5)
        assert hit.pattern == "log-derivative"
        assert ex.render(hit.antiderivative) == "ln(abs(1 + exp(x)))"
        self._differentiates_back(f, hit.antiderivative, 0.5)

    def test_log_row_at_minus_alpha(self):
        hit = cc.table1_lookup(P("x^-0.3"), 0.3)
        assert hit.pattern == "log"
        assert ex.render(hit.antiderivative) == "ln(abs(x))"

    def test_constant_row(self):
        hit = cc.table1_lookup(P("3"), 0.4)
        self._differentiates_back(P("3"), hit.antiderivative, 0.4)

    def test_exponential_pattern(self):
        f = P("exp(-x^0.5/0.5)")
        hit = cc.table1_lookup(f, 0.5)
        assert hit.pattern == "exp-parts"
        assert ex.evaluate(hit.antiderivative, {"x": 1.0}) == pytest.approx(-math.exp(-2.0), rel=1e-15)
        self._differentiates_back(f, hit.antiderivative, 0.5)

    @pytest.mark.parametrize("text", ["x^1.5*exp(2*x^0.5/0.5)", "x^0.5*exp(-x^0.5/0.5)", "2*x^3 - 5*x + 1/x"])
    def test_recursive_and_combined_rows(self, text):
        f = P(text)
        hit = cc.table1_lookup(f, 0.5)
        assert hit is not None
        self._differentiates_back(f, hit.antiderivative, 0.5)

    def test_no_match(self):
        assert cc.table1_lookup(P("sin(x)"), 0.5) is None


class TestParts:
    def test_pair(self):
        parts = cc.integrate_by_parts(P("x"), P("x"), 1.0)
        assert ex.evaluate(parts.boundary, {"x": 3.0}) == 9.0
        assert ex.evaluate(parts.residual, {"x": 3.0}) == 3.0

    def test_definite_identity(self):
        lhs, rhs = cc.parts_identity_sides(P("x"), P("x^0.5"), 1.0, 2.0, 0.5)
        # integrand x * (0.5 x^0) * x^-0.5 = 0.5 x^0.5, so the value is (2^1.5 - 1)/3
        assert lhs == pytest.approx((2**1.5 - 1) / 3, rel=1e-12)
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_exercise_residual_integrand(self):
        alpha, m, r = 0.5, 2.0, -1.0
        f = P(f"x^{m}")
        g = P(f"{alpha}/{r}*exp({r}*x^{alpha}/{alpha})")  # g^(alpha) = exp(r x^a / a)
        parts = cc.integrate_by_parts(f, g, alpha)
        for x in (0.5, 1.0, 2.0):
            want = (m / r) * x ** (m - alpha) * math.exp(r * x**alpha / alpha) * alpha
            assert ex.evaluate(parts.residual, {"x": x}) == pytest.approx(want, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(expressions(("x",)), alphas, positive)
def test_limit_and_identity_agree(f, alpha, x):
    assume(safe_eval(f, x=x) is not None)
    try:
        a = cc.conf_derivative_identity(f, x, alpha)
        b = cc.conf_derivative_limit(f, x, alpha)
    except ex.DomainError:
        assume(False)
    assume(abs(a) < 1e4)
    assert abs(a - b) <= 1e-4 * max(1.0, abs(a))


def test_probe_array():
    assert np.all(cc.probe_array() > 0)
