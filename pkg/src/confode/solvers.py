"""Solution procedures, one per family.

Every solver returns a :class:`Solution`: a relation ``g(x, y) = C`` and,
when a single algebraic inversion allows it, an explicit ``y(x; C)`` that is
consistent with the relation (``g(x, y(x; C)) = C``).  Antiderivatives are
taken in closed form when the integral table or the partial-fraction
integrator knows them, otherwise the relation is assembled from numerical
quadratures from a base point (``kind == "quadrature_implicit"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _rational, _terms
from . import classify as cl
from . import expr as ex
from .confcalc import (
    DEFAULT_CONFIG,
    check_alpha,
    classical_integral_numeric,
    conf_derivative_expr,
    conf_integral_numeric,
    table1_lookup,
)

X, Y = ex.X, ex.Y


class SolverError(ValueError):
    """Base class for solver failures."""


class DegenerateError(SolverError):
    """The method's change of variables collapses (e.g. a vanishing denominator)."""


class UnsupportedError(SolverError):
    """The family (or this instance of it) has no procedure here."""


@dataclass(frozen=True)
class Step:
    """A change of variables and its inverse, both as readable equations."""

    forward: str
    inverse: str


@dataclass(frozen=True)
class Solution:
    family: str
    kind: str  # "explicit" | "implicit" | "quadrature_implicit"
    alpha: float
    relation: ex.Expr | None = None
    explicit: ex.Expr | None = None
    constant: str = "C"
    display: str = ""
    numeric_relation: Callable[[float, float], float] | None = field(default=None, compare=False, repr=False)
    numeric_gradient: Callable[[float, float], tuple] | None = field(default=None, compare=False, repr=False)
    constant_value: float | None = None
    trace: tuple = ()
    notes: tuple = ()
    variant: str | None = None
    terminal: float = 0.0
    equation: ex.Expr | None = None  # F(x, y, K) = 0 when the constant is not isolated

    # -- numeric hooks ---------------------------------------------------------
    def g(self, x: float, y: float) -> float:
        """Value of the relation; constant along every solution curve."""
        if self.numeric_relation is not None:
            return self.numeric_relation(x, y)
        return ex.lambdify(self.relation, ("x", "y"))(x, y)

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        if self.numeric_gradient is not None:
            return self.numeric_gradient(x, y)
        gx, gy = _relation_gradient(self.relation)
        return gx(x, y), gy(x, y)

    def y(self, x: float, C: float | None = None) -> float:
        if self.explicit is None:
            raise SolverError("solution has no explicit form")
        C = self.constant_value if C is None else C
        if C is None:
            raise SolverError("constant not fixed; pass C or fit it first")
        return ex.lambdify(self.explicit, ("x", self.constant))(x, C)

    def with_constant(self, value: float) -> "Solution":
        return replace(self, constant_value=float(value))

    def level_set(self):
        """``(g, grad, level)`` describing the fitted curve as ``g(x, y) = level``."""
        C = self.constant_value
        if C is None:
            raise SolverError("constant not fitted")
        if self.has_relation:
            return self.g, self.gradient, C
        if self.equation is not None:
            F = ex.substitute(self.equation, {self.constant: C})
        else:
            F = ex.sub(Y, self.explicit_in_x())
        f = ex.lambdify(F, ("x", "y"))
        gx, gy = _relation_gradient(F)
        return f, (lambda x, y: (gx(x, y), gy(x, y))), 0.0

    @property
    def is_explicit(self) -> bool:
        return self.explicit is not None

    @property
    def has_relation(self) -> bool:
        return self.relation is not None or self.numeric_relation is not None

    def explicit_in_x(self) -> ex.Expr:
        """The explicit form with the fitted constant substituted."""
        if self.constant_value is None:
            raise SolverError("constant not fitted")
        return ex.substitute(self.explicit, {self.constant: self.constant_value})


def _relation_gradient(relation: ex.Expr):
    key = ("grad", "x", "y")
    cache = relation._compiled
    if key not in cache:
        cache[key] = (
            ex.lambdify(ex.diff(relation, "x"), ("x", "y")),
            ex.lambdify(ex.diff(relation, "y"), ("x", "y")),
        )
    return cache[key]


# ---------------------------------------------------------------------------
# integration helpers
# ---------------------------------------------------------------------------

DIGITS = 6


def show(e: ex.Expr) -> str:
    return ex.render(e, DIGITS)


def antiderivative(e: ex.Expr, var: str, alpha: float = 1.0) -> ex.Expr | None:
    """Closed-form order-``alpha`` antiderivative in ``var``, or ``None``."""
    e = ex.simplify(e)
    if e.variables - {var}:
        return None
    hit = table1_lookup(e, alpha, var)
    if hit is not None:
        return hit.antiderivative
    if alpha == 1.0:
        return _rational.integrate_rational(e, var)
    return None


def numeric_antiderivative(e: ex.Expr, var: str, base: float, alpha: float = 1.0) -> Callable[[float], float]:
    """``t -> int_base^t e`` (order ``alpha``) by adaptive quadrature."""
    fn = ex.lambdify(e, (var,))
    if alpha == 1.0:
        return lambda t: classical_integral_numeric(fn, base, t, DEFAULT_CONFIG)
    return lambda t: conf_integral_numeric(fn, base, t, alpha, DEFAULT_CONFIG)


def _is_zero(e: ex.Expr, var: str, probes=(0.3, 0.9, 1.7, 2.6, 4.1)) -> bool:
    e = ex.simplify(e)
    if isinstance(e, ex.Const):
        return e.value == 0.0
    fn = ex.lambdify(e, (var,))
    vals = []
    for p in probes:
        try:
            vals.append(fn(p))
        except ex.DomainError:
            continue
    return len(vals) >= 3 and all(abs(v) < 1e-13 for v in vals)


def _x_alpha_over_alpha(alpha: float) -> ex.Expr:
    if alpha == 1.0:
        return X
    return ex.mul(ex.Const(1.0 / alpha), ex.Pow(X, ex.Const(alpha)))


def _equation(lhs: ex.Expr | str, rhs: ex.Expr | str) -> str:
    left = lhs if isinstance(lhs, str) else show(lhs)
    right = rhs if isinstance(rhs, str) else show(rhs)
    return f"{left} = {right}"


def _single_term(e: ex.Expr, var: str):
    ts = _terms.from_expr(e, var)
    if ts is None or not ts.is_single:
        return None
    return ts.single()  # (c, q, expo)


def _ln_abs(e: ex.Expr) -> ex.Expr:
    return ex.Apply("ln", ex.Apply("abs", e))


# ---------------------------------------------------------------------------
# separable
# ---------------------------------------------------------------------------


def solve_separable(F: ex.Expr, G: ex.Expr, alpha: float, base: tuple = (1.0, 1.0)) -> Solution:
    """``x^(1-alpha) F(x) dx^(alpha) + G(y) dy = 0``: since
    ``dx^(alpha) = x^(alpha-1) dx`` the solution is ``int F dx + int G dy = C``."""
    alpha = check_alpha(alpha)
    F, G = ex.simplify(F), ex.simplify(G)
    if F.variables - {"x"} or G.variables - {"y"}:
        raise SolverError("separable parts must be F(x) and G(y)")
    Fi = antiderivative(F, "x")
    Gi = antiderivative(G, "y")
    step = Step("x^(1-alpha) dx^(alpha) = dx", "dx^(alpha) = x^(alpha-1) dx")
    if Fi is None or Gi is None:
        return _separable_quadrature(F, G, alpha, Fi, Gi, base, step)

    # G = k: linear in y, always explicit
    if not G.variables:
        k = ex.evaluate(G, {})
        if k == 0.0:
            raise DegenerateError("G vanishes identically")
        rest = ex.simplify(ex.div(Fi, ex.Const(k)))
        relation = ex.simplify(ex.add(Y, rest))
        explicit = ex.simplify(ex.sub(ex.Var("C"), rest))
        return Solution("separable", "explicit", alpha, relation, explicit, "C",
                        _equation("y", explicit), trace=(step,))

    g_single = _single_term(G, "y")
    if g_single is not None and g_single[1] == -1.0 and not g_single[2]:
        k = g_single[0]
        Fk = ex.simplify(ex.div(Fi, ex.Const(k)))
        f_single = _single_term(F, "x")
        if f_single is not None and f_single[1] == -1.0 and not f_single[2]:
            # ln|y| + m ln|x| = const  =>  x^m y = C
            m = _terms.snap(f_single[0] / k)
            xm = X if m == 1.0 else ex.Pow(X, ex.Const(m))
            relation = ex.mul(xm, Y)
            explicit = ex.div(ex.Var("C"), xm)
            return Solution("separable", "explicit", alpha, relation, explicit, "C",
                            _equation(relation, "C"), trace=(step,),
                            notes=("logarithmic branch: both integrals are logarithms",))
        relation = ex.mul(Y, ex.apply("exp", Fk))
        explicit = ex.mul(ex.Var("A"), ex.apply("exp", ex.neg(Fk)))
        return Solution("separable", "explicit", alpha, relation, explicit, "A",
                        _equation("y", explicit), trace=(step,))

    scale = 1.0
    gts = _terms.from_expr(Gi, "y")
    if gts is not None and gts.is_single:
        scale = 1.0 / gts.single()[0]
    relation = ex.simplify(ex.add(_scaled(Gi, scale), _scaled(Fi, scale)))
    relation = _tidy_sum(relation)
    return Solution("separable", "implicit", alpha, relation, None, "C",
                    _equation(relation, "C"), trace=(step,))


def _scaled(e: ex.Expr, k: float) -> ex.Expr:
    if k == 1.0:
        return e
    ts = None
    if len(e.variables) == 1:
        (var,) = e.variables
        ts = _terms.from_expr(e, var)
    if ts is not None:
        return ts.scaled(k).to_expr()
    terms = ex.flatten_sum(e)
    out: ex.Expr = ex.ZERO
    for t in terms:
        out = ex.add(out, _scale_term(t, k))
    return out


def _scale_term(t: ex.Expr, k: float) -> ex.Expr:
    coef, num, den = ex.flatten_product(t)
    c = _terms.snap(coef * k)
    body = ex.div(ex.product(num), ex.product(den))
    return ex.mul(ex.Const(c), body)


def _tidy_sum(e: ex.Expr) -> ex.Expr:
    out: ex.Expr = ex.ZERO
    for t in ex.flatten_sum(e):
        t = ex.simplify(t)
        if isinstance(t, ex.Neg):
            out = ex.sub(out, t.arg) if not (isinstance(out, ex.Const) and out.value == 0.0) else t
        else:
            out = ex.add(out, t)
    return out


def _separable_quadrature(F, G, alpha, Fi, Gi, base, step) -> Solution:
    xb, yb = base
    fF = ex.lambdify(F, ("x",))
    fG = ex.lambdify(G, ("y",))
    IF = ex.lambdify(Fi, ("x",)) if Fi is not None else numeric_antiderivative(F, "x", xb)
    IG = ex.lambdify(Gi, ("y",)) if Gi is not None else numeric_antiderivative(G, "y", yb)
    left = show(Fi) if Fi is not None else f"int_{ex.format_number(xb, DIGITS)}^x {show(F)} dx"
    right = show(Gi) if Gi is not None else f"int_{ex.format_number(yb, DIGITS)}^y {show(G)} dy"
    return Solution(
        "separable", "quadrature_implicit", alpha, None, None, "C",
        f"{left} + {right} = C",
        numeric_relation=lambda x, y: IF(x) + IG(y),
        numeric_gradient=lambda x, y: (fF(x), fG(y)),
        trace=(step,),
        notes=("antiderivative evaluated by quadrature",),
    )


# ---------------------------------------------------------------------------
# substitution z = a x^alpha + b y + c
# ---------------------------------------------------------------------------


def solve_substitution(a: float, b: float, c: float, f: ex.Expr, alpha: float, base: float = 1.0) -> Solution:
    """``dy/dx^(alpha) = f(a x^alpha + b y + c)``.  With ``z`` the argument,
    ``dz/dx^(alpha) = a alpha + b f(z)``, so ``int dz/(a alpha + b f(z)) = x^alpha/alpha + C``."""
    alpha = check_alpha(alpha)
    if b == 0.0:
        raise DegenerateError("b = 0: the substitution does not involve y")
    if f.variables - {"z"}:
        raise SolverError("f must be a function of z")
    Z = ex.Var("z")
    h = ex.simplify(ex.add(ex.Const(a * alpha), ex.mul(ex.Const(b), f)))
    if _is_zero(h, "z"):
        raise DegenerateError("a*alpha + b*f(z) vanishes identically")
    xa = ex.Pow(X, ex.Const(alpha)) if alpha != 1.0 else X
    z_of_xy = ex.simplify(ex.add(ex.add(ex.mul(ex.Const(a), xa), ex.mul(ex.Const(b), Y)), ex.Const(c)))
    step = Step(f"z = {show(z_of_xy)}",
                f"y = {show(ex.div(ex.sub(ex.sub(Z, ex.mul(ex.Const(a), xa)), ex.Const(c)), ex.Const(b)))}")
    T = _x_alpha_over_alpha(alpha)

    def y_from_z(zexpr: ex.Expr) -> ex.Expr:
        out = ex.sub(ex.sub(zexpr, ex.mul(ex.Const(a), xa)), ex.Const(c))
        return ex.simplify(ex.div(out, ex.Const(b)) if b != 1.0 else out)

    def solution(relation_z, explicit_z, constant):
        relation = ex.substitute(relation_z, {"z": z_of_xy})
        explicit = y_from_z(explicit_z) if explicit_z is not None else None
        kind = "explicit" if explicit is not None else "implicit"
        display = _equation("y", explicit) if explicit is not None else _equation(relation, constant)
        return Solution("substitution", kind, alpha, relation, explicit, constant, display, trace=(step,))

    pair = _rational.as_rational(h, "z")
    if pair is not None and pair[1].degree() == 0:
        num = pair[0] / pair[1].coef[0]
        if num.degree() == 0:
            k = float(num.coef[0])
            kT = ex.simplify(ex.mul(ex.Const(k), T))
            return solution(ex.sub(Z, kT), ex.add(kT, ex.Var("C")), "C")
        if num.degree() == 1:
            p0, p1 = (float(v) for v in num.coef)
            E = ex.apply("exp", ex.simplify(ex.mul(ex.Const(p1), T)))
            relation = ex.div(ex.add(ex.mul(ex.Const(p1), Z), ex.Const(p0)), E)
            explicit = ex.div(ex.sub(ex.mul(ex.Var("A"), E), ex.Const(p0)), ex.Const(p1))
            return solution(ex.simplify(relation), ex.simplify(explicit), "A")
        data = _rational.quadratic_arctan_data(num)
        if data is not None:
            p2, m, s = data
            # (1/(p2 s)) arctan((z-m)/s) = T + C'  =>  z = m + s tan(p2 s T + C)
            phase = ex.simplify(ex.mul(ex.Const(p2 * s), T))
            relation = ex.sub(ex.apply("arctan", ex.div(ex.sub(Z, ex.Const(m)), ex.Const(s))), phase)
            explicit = ex.add(ex.mul(ex.Const(s), ex.apply("tan", ex.add(phase, ex.Var("C")))), ex.Const(m))
            return solution(ex.simplify(relation), ex.simplify(explicit), "C")
    integrand = ex.simplify(ex.div(ex.ONE, h))
    I = antiderivative(integrand, "z")
    if I is not None:
        return solution(ex.simplify(ex.sub(I, T)), None, "C")
    # quadrature in z
    Iz = numeric_antiderivative(integrand, "z", base)
    hz = ex.lambdify(h, ("z",))
    zf = ex.lambdify(z_of_xy, ("x", "y"))
    Tf = ex.lambdify(T, ("x",))

    def grad(x, y):
        z = zf(x, y)
        dz_dx = a * x ** (alpha - 1.0)
        return dz_dx / hz(z) - x ** (alpha - 1.0), b / hz(z)

    return Solution(
        "substitution", "quadrature_implicit", alpha, None, None, "C",
        f"int dz/({show(h)}) - {show(T)} = C,  z = {show(z_of_xy)}",
        numeric_relation=lambda x, y: Iz(zf(x, y)) - Tf(x),
        numeric_gradient=grad,
        trace=(step,),
        notes=("z-integral evaluated by quadrature",),
    )


# ---------------------------------------------------------------------------
# homogeneous, psi-form, shifted
# ---------------------------------------------------------------------------


def _homogeneous_core(F: ex.Expr, G: ex.Expr, alpha: float, variant: str, centre: tuple, family: str,
                      steps: tuple, base_u: float) -> Solution:
    U = ex.Var("u")
    denom = ex.simplify(ex.add(F, ex.mul(U, G)))
    if _is_zero(denom, "u"):
        raise DegenerateError("F(u) + u G(u) vanishes identically: every y = C*x solves the equation")
    integrand = ex.simplify(ex.div(G, denom))
    return _log_plus_integral(integrand, alpha, variant, centre, family, steps, base_u)


def _log_plus_integral(integrand, alpha, variant, centre, family, steps, base_u) -> Solution:
    """Relation ``W(x) + int integrand du = C`` with ``u = (y-k)/(x-h)``."""
    h, k = centre
    xs = X if h == 0.0 else ex.sub(X, ex.Const(h))
    ys = Y if k == 0.0 else ex.sub(Y, ex.Const(k))
    u_of_xy = ex.div(ys, xs)
    if variant == "log":
        W = _ln_abs(xs)
    elif variant == "power":
        if alpha == 1.0:
            raise SolverError("the power variant needs alpha < 1")
        W = ex.div(ex.Pow(xs, ex.Const(alpha - 1.0)), ex.Const(alpha - 1.0))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    I = antiderivative(integrand, "u")
    notes = () if variant == "log" else ("power-weight variant of the x integral",)
    if I is not None:
        relation = _tidy_sum(ex.simplify(ex.add(W, ex.substitute(I, {"u": u_of_xy}))))
        display = f"{show(_tidy_sum(ex.add(W, I)))} = C,  u = {show(u_of_xy)}"
        return Solution(family, "implicit", alpha, relation, None, "C", display,
                        trace=steps, notes=notes, variant=variant, terminal=0.0)
    Iu = numeric_antiderivative(integrand, "u", base_u)
    fi = ex.lambdify(integrand, ("u",))
    Wf = ex.lambdify(W, ("x",))
    dW = ex.lambdify(ex.diff(W, "x"), ("x",))

    def rel(x, y):
        return Wf(x) + Iu((y - k) / (x - h))

    def grad(x, y):
        u = (y - k) / (x - h)
        v = fi(u)
        return dW(x) - v * u / (x - h), v / (x - h)

    return Solution(family, "quadrature_implicit", alpha, None, None, "C",
                    f"{show(W)} + int {show(integrand)} du = C,  u = {show(u_of_xy)}",
                    numeric_relation=rel, numeric_gradient=grad, trace=steps,
                    notes=notes + ("u-integral evaluated by quadrature",), variant=variant)


def solve_homogeneous(n: float, F: ex.Expr, G: ex.Expr, alpha: float, variant: str = "log",
                      base_u: float = 1.0) -> Solution:
    """``M(x, y) dx^(alpha) + N(x, y) dy = 0`` with ``M`` of degree ``n+1-alpha``
    and ``N`` of degree ``n``; ``F(u) = M(1, u)``, ``G(u) = N(1, u)``.

    With ``y = x u`` the equation separates into
    ``ln|x| + int G/(F + u G) du = C``.  ``variant="power"`` replaces
    ``ln|x|`` by ``x^(alpha-1)/(alpha-1)`` (kept for comparison only).
    """
    alpha = check_alpha(alpha)
    for e in (F, G):
        if e.variables - {"u"}:
            raise SolverError("F and G must be functions of u")
    steps = (Step("y = x*u", "u = y/x"),)
    return _homogeneous_core(F, G, alpha, variant, (0.0, 0.0), "homogeneous", steps, base_u)


def solve_psi(psi: ex.Expr, alpha: float, base_u: float = 1.0) -> Solution:
    """``dy/dx^(alpha) = x^(1-alpha) psi(y/x)``: ``ln|x| + int du/(u - psi(u)) = C``."""
    alpha = check_alpha(alpha)
    if psi.variables - {"u"}:
        raise SolverError("psi must be a function of u")
    U = ex.Var("u")
    denom = ex.simplify(ex.sub(U, psi))
    steps = (Step("y = x*u", "u = y/x"),)
    if _is_zero(denom, "u"):
        explicit = ex.mul(ex.Var("C"), X)
        return Solution("psi", "explicit", alpha, ex.div(Y, X), explicit, "C", "y = C*x",
                        trace=steps, notes=("u - psi(u) vanishes: every line through the origin solves",))
    return _log_plus_integral(ex.simplify(ex.div(ex.ONE, denom)), alpha, "log", (0.0, 0.0), "psi", steps, base_u)


def solve_shifted(a1, b1, c1, a2, b2, c2, alpha: float, scale: float = 1.0, base_u: float = 1.0) -> Solution:
    """``s (x-h)^(1-alpha) (a1 x + b1 y + c1) dx^(alpha) + (a2 x + b2 y + c2) dy = 0``.

    ``x = u + h``, ``y = v + k`` (the intersection of the two lines) leave a
    ``(1, alpha)``-homogeneous equation in ``u, v`` when the derivative is
    taken from the terminal ``h``.
    """
    alpha = check_alpha(alpha)
    det = a1 * b2 - a2 * b1
    if abs(det) < 1e-12:
        raise UnsupportedError("parallel lines: no unique centre")
    h = _terms.snap((-c1 * b2 + c2 * b1) / det)
    k = _terms.snap((-a1 * c2 + a2 * c1) / det)
    W = ex.Var("u")  # ratio v/u
    F = ex.simplify(ex.mul(ex.Const(scale), ex.add(ex.Const(a1), ex.mul(ex.Const(b1), W))))
    G = ex.simplify(ex.add(ex.Const(a2), ex.mul(ex.Const(b2), W)))
    hs, ks = ex.format_number(h, DIGITS), ex.format_number(k, DIGITS)
    steps = (
        Step(f"x = u + {hs}, y = v + {ks}", f"u = x - {hs}, v = y - {ks}"),
        Step("v = z*u", "z = v/u"),
    )
    sol = _homogeneous_core(F, G, alpha, "log", (h, k), "shifted", steps, base_u)
    return replace(sol, terminal=h, notes=sol.notes + (f"centre (h, k) = ({hs}, {ks})",))


# ---------------------------------------------------------------------------
# linear and Bernoulli
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _LinearParts:
    """``y = particular + K * homogeneous`` (closed form) or numeric callables."""

    particular: ex.Expr | None
    homogeneous: ex.Expr | None
    factored: ex.Expr | None  # particular * exp(mu), when the expanded form is not tidy
    exp_mu: ex.Expr | None
    numeric: tuple | None = None  # (mu(x), R(x), P, Q) callables
    display_expanded: bool = True


def _linear_parts(P: ex.Expr, Q: ex.Expr, alpha: float, base: float) -> _LinearParts:
    P, Q = ex.simplify(P), ex.simplify(Q)
    tsP = _terms.from_expr(P, "x")
    tsQ = _terms.from_expr(Q, "x")
    if tsP is not None and tsQ is not None:
        anti = _terms.integrate(tsP, alpha)
        if anti is not None:
            try:
                e_mu = anti.terms.exp() * _terms.TermSum.monomial("x", 1.0, anti.log_coeff)
                e_minus = e_mu.inverse()
            except _terms.NotRepresentable:
                e_mu = None
            if e_mu is not None:
                R = _terms.integrate(e_mu * tsQ, alpha)
                if R is not None and R.log_coeff == 0.0:
                    particular = R.terms * e_minus
                    tidy = particular.is_polynomial_like
                    return _LinearParts(particular.to_expr(), e_minus.to_expr(), R.terms.to_expr(),
                                        e_mu.to_expr(), display_expanded=tidy)
                if R is not None:
                    Rexpr = R.to_expr()
                    return _LinearParts(ex.mul(Rexpr, e_minus.to_expr()), e_minus.to_expr(), Rexpr,
                                        e_mu.to_expr(), display_expanded=False)
    mu = antiderivative(P, "x", alpha)
    if mu is not None:
        e_mu = ex.apply("exp", mu)
        e_minus = ex.apply("exp", ex.neg(mu))
        R = antiderivative(ex.mul(e_mu, Q), "x", alpha) if not _is_zero(Q, "x") else ex.ZERO
        if R is not None:
            return _LinearParts(ex.simplify(ex.mul(R, e_minus)), e_minus, R, e_mu, display_expanded=False)
    fP = ex.lambdify(P, ("x",))
    fQ = ex.lambdify(Q, ("x",))
    mu_f = ex.lambdify(mu, ("x",)) if mu is not None else numeric_antiderivative(P, "x", base, alpha)
    R_f = (lambda t: conf_integral_numeric(lambda s: math.exp(mu_f(s)) * fQ(s), base, t, alpha, DEFAULT_CONFIG))
    return _LinearParts(None, None, None, None, numeric=(mu_f, R_f, fP, fQ))


def solve_linear(P: ex.Expr, Q: ex.Expr, alpha: float, base: float = 1.0, constant: str | None = None) -> Solution:
    """``dy/dx^(alpha) + P(x) y = Q(x)``.  Multiplying by ``exp(I(P))``
    (``I`` the alpha-integral) gives ``y = exp(-I(P)) (I(exp(I(P)) Q) + C)``."""
    alpha = check_alpha(alpha)
    if _is_zero(Q, "x"):
        # y = A exp(-I(P)): a separable equation
        F = ex.mul(P, ex.Pow(X, ex.Const(alpha - 1.0))) if alpha != 1.0 else P
        sol = solve_separable(ex.simplify(F), ex.div(ex.ONE, Y), alpha)
        return replace(sol, family="linear", notes=sol.notes + ("Q = 0: solved as separable",))
    parts = _linear_parts(P, Q, alpha, base)
    step = Step(f"multiply by the integrating factor exp(I({show(P)}))", "divide by the integrating factor")
    if parts.numeric is not None:
        mu_f, R_f, fP, fQ = parts.numeric

        def rel(x, y):
            return y * math.exp(mu_f(x)) - R_f(x)

        def grad(x, y):
            w = x ** (alpha - 1.0)
            em = math.exp(mu_f(x))
            return w * fP(x) * y * em - w * em * fQ(x), em

        return Solution("linear", "quadrature_implicit", alpha, None, None, "C",
                        f"y*exp(I({show(P)})) - I(exp(I({show(P)}))*({show(Q)})) = C",
                        numeric_relation=rel, numeric_gradient=grad, trace=(step,),
                        notes=("integrals evaluated by quadrature",))
    expanded = parts.display_expanded
    K = constant or ("A" if expanded else "C")
    Kv = ex.Var(K)
    if expanded:
        explicit = ex.add(parts.particular, ex.mul(Kv, parts.homogeneous))
    else:
        explicit = ex.mul(ex.add(parts.factored, Kv), parts.homogeneous)
    relation = ex.simplify(ex.sub(ex.mul(Y, parts.exp_mu), parts.factored))
    return Solution("linear", "explicit", alpha, relation, ex.simplify(explicit), K,
                    _equation("y", explicit), trace=(step,))


def solve_bernoulli(P: ex.Expr, Q: ex.Expr, n: float, alpha: float, base: float = 1.0) -> Solution:
    """``dy/dx^(alpha) + P y = Q y^n``: ``z = y^(1-n)`` satisfies the linear
    equation ``dz/dx^(alpha) + (1-n) P z = (1-n) Q``."""
    alpha = check_alpha(alpha)
    if n == 1.0:
        raise SolverError("n = 1 is a linear equation")
    p = 1.0 - n
    lin = solve_linear(ex.simplify(ex.mul(ex.Const(p), P)), ex.simplify(ex.mul(ex.Const(p), Q)), alpha, base, constant="C")
    lhs = _power_text(p)
    z_of_y = ex.Pow(Y, ex.Const(p)) if p != 1.0 else Y
    steps = (Step(f"z = {lhs}", f"y = z^{ex.format_number(1.0 / p, DIGITS)}"),) + lin.trace
    notes = lin.notes
    if lin.kind == "quadrature_implicit":
        r, gr = lin.numeric_relation, lin.numeric_gradient

        def rel(x, y):
            return r(x, y**p)

        def grad(x, y):
            gx, gz = gr(x, y**p)
            return gx, gz * p * y ** (p - 1.0)

        return replace(lin, family="bernoulli", numeric_relation=rel, numeric_gradient=grad, trace=steps,
                       display=lin.display.replace("y*exp", f"({lhs})*exp", 1))
    relation = ex.substitute(lin.relation, {"y": z_of_y})
    z_expr = lin.explicit
    inv = 1.0 / p
    explicit = None
    if float(inv).is_integer():
        explicit = ex.simplify(ex.power(z_expr, ex.Const(inv))) if inv != 1.0 else z_expr
    else:
        notes = notes + ("fractional power: y follows the branch of the initial condition",)
    return Solution("bernoulli", "explicit" if explicit is not None else "implicit", alpha, relation, explicit,
                    lin.constant, _equation(lhs, z_expr), trace=steps, notes=notes)


def _power_text(p: float) -> str:
    if p == 1.0:
        return "y"
    if p == -1.0:
        return "1/y"
    return f"y^{ex.format_number(p, DIGITS)}" if p > 0 else f"y^({ex.format_number(p, DIGITS)})"


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------


def solve_exact(M: ex.Expr, N: ex.Expr, alpha: float, base: tuple = (1.0, 1.0), check: bool = True,
                cfg: cl.ClassifierConfig = cl.DEFAULT_CLASSIFIER) -> Solution:
    """Potential ``f`` with ``df/dx^(alpha) = M`` and ``df/dy = N``; the solution is ``f = C``.

    ``f = I_x(M) + int (N - d/dy I_x(M)) dy``.  The x-integral is symbolic
    when ``M`` splits into sums of (x-part)(y-part) products with tabulated
    x-parts; otherwise ``f = int_yb^y N(xb, t) dt + int_xb^x M(s, y) s^(alpha-1) ds``.
    """
    alpha = check_alpha(alpha)
    if check:
        witness = cl.check_exactness(M, N, alpha, cfg)
        if not witness:
            raise SolverError(
                f"not exact: max deviation {witness.max_deviation:.3g} at {witness.location}"
            )
    xb, yb = base
    Phi = _x_integral(M, alpha)
    if Phi is not None:
        rest = ex.simplify(ex.sub(N, ex.diff(Phi, "y")))
        rest_y = ex.substitute(rest, {"x": xb})
        Gi = antiderivative(rest_y, "y") if not _is_zero(rest_y, "y") else ex.ZERO
        if Gi is not None:
            f = _tidy_sum(ex.simplify(ex.add(Phi, Gi)))
            sol = Solution("exact", "implicit", alpha, f, None, "C", _equation(f, "C"))
            if _potential_ok(sol, M, N, alpha, cfg):
                return sol
    fM = ex.lambdify(M, ("x", "y"))
    fN = ex.lambdify(N, ("x", "y"))

    def rel(x, y):
        ylegs = classical_integral_numeric(lambda t: fN(xb, t), yb, y, DEFAULT_CONFIG)
        xlegs = conf_integral_numeric(lambda s: fM(s, y), xb, x, alpha, DEFAULT_CONFIG)
        return ylegs + xlegs

    def grad(x, y):
        return x ** (alpha - 1.0) * fM(x, y), fN(x, y)

    return Solution("exact", "quadrature_implicit", alpha, None, None, "C",
                    f"int_{ex.format_number(yb, DIGITS)}^y N(x_b, t) dt + I_x({show(M)}) = C",
                    numeric_relation=rel, numeric_gradient=grad,
                    notes=("potential evaluated by quadrature",))


def _x_integral(M: ex.Expr, alpha: float) -> ex.Expr | None:
    out: ex.Expr = ex.ZERO
    for term in ex.flatten_sum(ex.simplify(M)):
        try:
            coef, num, den = ex.flatten_product(term)
        except ZeroDivisionError:
            return None
        xs_num, ys_num, xs_den, ys_den = [], [], [], []
        for factors, xs, ys in ((num, xs_num, ys_num), (den, xs_den, ys_den)):
            for fac in factors:
                if fac.variables == {"x", "y"}:
                    return None
                (ys if "y" in fac.variables else xs).append(fac)
        xpart = ex.mul(ex.Const(coef), ex.div(ex.product(xs_num), ex.product(xs_den)))
        ypart = ex.div(ex.product(ys_num), ex.product(ys_den))
        I = antiderivative(xpart, "x", alpha)
        if I is None:
            return None
        out = ex.add(out, ex.mul(I, ypart))
    return ex.simplify(out)


def _potential_ok(sol: Solution, M, N, alpha, cfg, tol: float = 1e-6) -> bool:
    fx = ex.lambdify(conf_derivative_expr(sol.relation, alpha, "x"), ("x", "y"))
    fy = ex.lambdify(ex.diff(sol.relation, "y"), ("x", "y"))
    fM = ex.lambdify(M, ("x", "y"))
    fN = ex.lambdify(N, ("x", "y"))
    for x, y in cfg.points()[:20]:
        try:
            a, b, c, d = fx(x, y), fM(x, y), fy(x, y), fN(x, y)
        except ex.DomainError:
            continue
        if abs(a - b) > tol * max(1.0, abs(b)) or abs(c - d) > tol * max(1.0, abs(d)):
            return False
    return True


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def default_base(problem: cl.OdeProblem) -> float:
    """Quadrature base point on the x axis."""
    if problem.ic is None:
        return 1.0
    x0 = problem.ic[0]
    xb = max(0.5, x0 / 2.0)
    return xb if xb > problem.terminal else 0.5 * (problem.terminal + x0)


def solve_class(problem: cl.OdeProblem, c: cl.OdeClass, variant: str = "log") -> Solution:
    """Run the solver for an already extracted family ``c``."""
    alpha = problem.alpha
    xb = default_base(problem)
    y0 = problem.ic[1] if problem.ic else 1.0
    u0 = 1.0
    if problem.ic is not None and problem.ic[0] != problem.terminal:
        u0 = problem.ic[1] / problem.ic[0]
    if isinstance(c, cl.Linear):
        return solve_linear(c.P, c.Q, alpha, xb)
    if isinstance(c, cl.Bernoulli):
        return solve_bernoulli(c.P, c.Q, c.n, alpha, xb)
    if isinstance(c, cl.Separable):
        return solve_separable(c.F, c.G, alpha, (xb, y0 if y0 != 0.0 else 1.0))
    if isinstance(c, cl.Substitution):
        return solve_substitution(c.a, c.b, c.c, c.f, alpha)
    if isinstance(c, cl.Homogeneous):
        return solve_homogeneous(c.n, c.F, c.G, alpha, variant, u0)
    if isinstance(c, cl.PsiForm):
        return solve_psi(c.psi, alpha, u0)
    if isinstance(c, cl.ShiftedHomogeneous):
        return solve_shifted(c.a1, c.b1, c.c1, c.a2, c.b2, c.c2, alpha, c.scale)
    if isinstance(c, cl.Exact):
        return solve_exact(c.M, c.N, alpha, (xb, y0), check=False)
    raise UnsupportedError(f"no solver for {type(c).__name__}")


def solve(problem: cl.OdeProblem, family: str = "auto", cfg: cl.ClassifierConfig = cl.DEFAULT_CLASSIFIER,
          variant: str = "log") -> Solution:
    """Classify ``problem`` and solve it with the first matching family
    (or the family whose tag is ``family``)."""
    classes = cl.classify(problem, cfg)
    if family != "auto":
        if family not in cl.PRIORITY:
            raise UnsupportedError(f"unknown family {family!r}")
        classes = [c for c in classes if c.tag == family]
        if not classes:
            raise UnsupportedError(f"problem is not of family {family!r}")
    if not classes:
        raise UnsupportedError("no known family matches")
    errors = []
    for c in classes:
        try:
            return solve_class(problem, c, variant)
        except DegenerateError as exc:
            errors.append(exc)
            if family != "auto":
                raise
    raise errors[0]
