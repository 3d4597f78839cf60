"""Conformable calculus of order 0 < alpha <= 1.

The conformable derivative of ``f`` at ``x > 0`` is the limit of
``(f(x + eps*x^(1-alpha)) - f(x)) / eps``; for differentiable ``f`` it equals
``x^(1-alpha) * f'(x)``.  That identity is the system of record here; the
limit quotient is kept as an independent cross-check.  The alpha-integral
``int_a^t f(x) x^(alpha-1) dx`` is its inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate as _spi

from . import _terms
from . import expr as ex

Function1D = Union[ex.Expr, Callable[[float], float]]


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"order alpha must satisfy 0 < alpha <= 1, got {alpha}")
    return alpha


@dataclass(frozen=True)
class NumericConfig:
    limit_eps: float = 1e-6
    fd_step: float = 1e-5
    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-12
    probe_points: tuple = (0.25, 0.5, 1.0, 1.7, 2.0, 3.0)
    max_quad_depth: int = 60

    def __post_init__(self):
        for name in ("limit_eps", "fd_step", "quad_rel_tol", "quad_abs_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if any(p <= 0 for p in self.probe_points):
            raise ValueError("probe points must be positive")
        if self.max_quad_depth < 1:
            raise ValueError("max_quad_depth must be at least 1")


DEFAULT_CONFIG = NumericConfig()


def _as_callable(f: Function1D, var: str = "x") -> Callable[[float], float]:
    if isinstance(f, ex.Expr):
        extra = f.variables - {var}
        if extra:
            raise ex.ExprError(f"expected a function of {var} only, found {sorted(extra)}")
        return ex.lambdify(f, (var,))
    return f


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


def conf_derivative_limit(f: Function1D, x: float, alpha: float, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    """Limit-quotient derivative, averaging the forward and backward quotients."""
    alpha = check_alpha(alpha)
    if x <= 0:
        raise ValueError("conformable derivative requires x > 0")
    fn = _as_callable(f)
    shift = cfg.limit_eps * x ** (1.0 - alpha)
    return (fn(x + shift) - fn(x - shift)) / (2.0 * cfg.limit_eps)


def _monomial(f: ex.Expr, var: str) -> tuple[float, float] | None:
    """``(c, n)`` when ``f`` is literally ``c * var^n``."""
    c = 1.0
    if isinstance(f, ex.Mul) and not f.left.variables:
        c, f = ex.evaluate(f.left, {}), f.right
    if f == ex.Var(var):
        return c, 1.0
    if isinstance(f, ex.Pow) and f.base == ex.Var(var) and not f.exponent.variables:
        return c, ex.evaluate(f.exponent, {})
    return None


def conf_derivative_expr(f: ex.Expr, alpha: float, var: str = "x") -> ex.Expr:
    """Symbolic ``var^(1-alpha) * df/dvar``; monomials use the power rule
    ``(c x^n)^(alpha) = c n x^(n-alpha)`` directly."""
    alpha = check_alpha(alpha)
    mono = _monomial(f, var)
    if mono is not None:
        c, n = mono
        if c * n == 0.0:
            return ex.ZERO
        return ex.Mul(ex.Const(c * n), ex.Pow(ex.Var(var), ex.Const(n - alpha)))
    d = ex.diff(f, var)
    if alpha == 1.0:
        return d
    return ex.mul(ex.Pow(ex.Var(var), ex.Const(1.0 - alpha)), d)


def conf_derivative_identity(f: ex.Expr, x: float, alpha: float) -> float:
    """``x^(1-alpha) * f'(x)`` with ``f'`` differentiated symbolically."""
    alpha = check_alpha(alpha)
    if x <= 0:
        raise ValueError("conformable derivative requires x > 0")
    if _monomial(f, "x") is not None:
        return ex.evaluate(conf_derivative_expr(f, alpha), {"x": x})
    d = ex.diff(f, "x")
    return x ** (1.0 - alpha) * ex.evaluate(d, {"x": x})


def conf_partial(f: ex.Expr, var: str, point: dict, alpha: float) -> float:
    """Conformable partial derivative in ``var`` (the other variable is held fixed)."""
    alpha = check_alpha(alpha)
    at = float(point[var])
    if at <= 0:
        raise ValueError(f"conformable partial requires {var} > 0")
    d = ex.diff(f, var)
    full = {k: float(v) for k, v in point.items()}
    return at ** (1.0 - alpha) * ex.evaluate(d, full)


def conf_partial_limit(f: ex.Expr, var: str, point: dict, alpha: float, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    alpha = check_alpha(alpha)
    at = float(point[var])
    if at <= 0:
        raise ValueError(f"conformable partial requires {var} > 0")
    shift = cfg.limit_eps * at ** (1.0 - alpha)
    hi = dict(point, **{var: at + shift})
    lo = dict(point, **{var: at - shift})
    return (ex.evaluate(f, hi) - ex.evaluate(f, lo)) / (2.0 * cfg.limit_eps)


# ---------------------------------------------------------------------------
# alpha-integral
# ---------------------------------------------------------------------------


def conf_integral_numeric(
    f: Function1D, a: float, t: float, alpha: float, cfg: NumericConfig = DEFAULT_CONFIG
) -> float:
    """``int_a^t f(x) x^(alpha-1) dx`` by adaptive quadrature.

    The substitution ``u = x^alpha`` turns the integral into
    ``(1/alpha) int f(u^(1/alpha)) du``, which removes the weight's
    singularity at ``x = 0``; ``a = 0`` is therefore an ordinary endpoint.
    ``t < a`` gives the negated integral.
    """
    alpha = check_alpha(alpha)
    if a < 0 or t < 0:
        raise ValueError("the alpha-integral is defined on x >= 0")
    if a == t:
        return 0.0
    fn = _as_callable(f)
    inv = 1.0 / alpha

    if alpha == 1.0:
        integrand, lo, hi = fn, a, t
    else:
        def integrand(u):
            return fn(u**inv)

        lo, hi = a**alpha, t**alpha
    value, err, info = _quad(integrand, lo, hi, cfg)
    return value * inv


def _quad(integrand, lo, hi, cfg: NumericConfig):
    out = _spi.quad(
        integrand,
        lo,
        hi,
        epsabs=cfg.quad_abs_tol,
        epsrel=cfg.quad_rel_tol,
        limit=cfg.max_quad_depth,
        full_output=1,
    )
    value, err = out[0], out[1]
    info = out[2]
    if len(out) > 3:
        tol = max(cfg.quad_abs_tol, cfg.quad_rel_tol * abs(value))
        # QUADPACK is conservative; accept when its own estimate is still close.
        if not (err <= 100 * tol):
            raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {out[3]} (error estimate {err:.3g})")
    if not math.isfinite(value):
        raise QuadratureError(f"non-finite quadrature result on [{lo}, {hi}]")
    return value, err, info


def classical_integral_numeric(f: Callable[[float], float], a: float, b: float, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    if a == b:
        return 0.0
    return _quad(f, a, b, cfg)[0]


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormIntegral:
    """A matched table entry: ``pattern`` names the row, ``antiderivative``
    is a function of the same variable as the integrand."""

    pattern: str
    antiderivative: ex.Expr
    params: dict = field(default_factory=dict, compare=False)


def table1_lookup(f: ex.Expr, alpha: float, var: str = "x") -> ClosedFormIntegral | None:
    """Match ``f`` against the closed-form conformable integrals.

    Rows: constants (``x^alpha/alpha``), powers ``x^n`` with ``n != -alpha``,
    ``x^(-alpha)`` (``ln|x|``), logarithmic derivatives
    ``x^(1-alpha) g'/g`` (``ln|g|``), and ``x^m exp(r x^alpha/alpha)`` handled
    by repeated integration by parts.  Linear combinations of rows are
    accepted.  Returns ``None`` when nothing matches.
    """
    alpha = check_alpha(alpha)
    f = ex.simplify(f)
    if f.variables - {var}:
        return None
    ts = _terms.from_expr(f, var)
    if ts is not None:
        anti = _terms.integrate(ts, alpha)
        if anti is not None:
            pats = anti.patterns
            pattern = pats[0] if len(pats) == 1 else "sum"
            if ts.is_zero:
                pattern = "constant"
            params = {}
            if ts.is_single:
                c, q, expo = ts.single()
                params = {"coefficient": c, "n": q}
                if expo:
                    params["r"] = expo[0][1] * alpha
            return ClosedFormIntegral(pattern, anti.to_expr(), params)
    return _log_derivative(f, alpha, var)


def _log_derivative(f: ex.Expr, alpha: float, var: str) -> ClosedFormIntegral | None:
    """``k * x^(1-alpha) * g'(x)/g(x)`` integrates to ``k ln|g|``."""
    try:
        coef, num, den = ex.flatten_product(f)
    except ZeroDivisionError:
        return None
    if not den:
        return None
    g = ex.product(den)
    gp = ex.diff(g, var)
    v = ex.Var(var)
    weight = ex.Pow(v, ex.Const(1.0 - alpha)) if alpha != 1.0 else ex.ONE
    candidate = ex.mul(weight, ex.div(gp, g))
    ratios = []
    for p in DEFAULT_CONFIG.probe_points:
        try:
            top = ex.evaluate(f, {var: p})
            bottom = ex.evaluate(candidate, {var: p})
        except ex.DomainError:
            continue
        if bottom == 0.0:
            if abs(top) > 1e-14:
                return None
            continue
        ratios.append(top / bottom)
    if len(ratios) < 3:
        return None
    k = ratios[0]
    if any(abs(r - k) > 1e-10 * max(1.0, abs(k)) for r in ratios):
        return None
    k = _terms.snap(k)
    anti = ex.Apply("ln", ex.Apply("abs", g))
    if k != 1.0:
        anti = ex.mul(ex.Const(k), anti)
    return ClosedFormIntegral("log-derivative", anti, {"g": g, "coefficient": k})


def integrate_closed(f: ex.Expr, alpha: float, var: str = "x") -> ex.Expr | None:
    hit = table1_lookup(f, alpha, var)
    return None if hit is None else hit.antiderivative


# ---------------------------------------------------------------------------
# integration by parts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartsResult:
    """``I(f g^(alpha)) = boundary - I(residual)``."""

    boundary: ex.Expr
    residual: ex.Expr


def integrate_by_parts(f: ex.Expr, g: ex.Expr, alpha: float) -> PartsResult:
    alpha = check_alpha(alpha)
    boundary = ex.mul(f, g)
    residual = ex.mul(g, conf_derivative_expr(f, alpha))
    return PartsResult(boundary, residual)


def parts_identity_sides(f: ex.Expr, g: ex.Expr, a: float, t: float, alpha: float, cfg: NumericConfig = DEFAULT_CONFIG):
    """Both sides of the definite integration-by-parts identity on ``[a, t]``.

    Left: ``I_a^t(f g^(alpha))``.  Right: ``[f g]_a^t - I_a^t(g f^(alpha))``.
    """
    parts = integrate_by_parts(f, g, alpha)
    lhs_integrand = ex.mul(f, conf_derivative_expr(g, alpha))
    lhs = conf_integral_numeric(lhs_integrand, a, t, alpha, cfg)
    fg = ex.lambdify(parts.boundary, ("x",))
    rhs = fg(t) - fg(a) - conf_integral_numeric(parts.residual, a, t, alpha, cfg)
    return lhs, rhs


def exercise_identity_sides(m: float, r: float, alpha: float, a: float, t: float, cfg: NumericConfig = DEFAULT_CONFIG):
    """Both sides of
    ``I(x^m e^{r x^a/a}) = x^m e^{r x^a/a}/r - (m/r) I(x^(m-a) e^{r x^a/a})``
    as definite integrals over ``[a, t]``."""
    alpha = check_alpha(alpha)
    E = lambda x: math.exp(r * x**alpha / alpha)  # noqa: E731
    lhs = conf_integral_numeric(lambda x: x**m * E(x), a, t, alpha, cfg)
    bound = lambda x: x**m * E(x) / r  # noqa: E731
    rest = conf_integral_numeric(lambda x: x ** (m - alpha) * E(x), a, t, alpha, cfg)
    return lhs, bound(t) - bound(a) - (m / r) * rest


def probe_array(cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
    return np.asarray(cfg.probe_points, dtype=float)
