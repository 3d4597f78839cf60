"""Rational functions of one variable and their classical antiderivatives.

Expressions built from ``+ - * /``, constants and non-negative integer powers
of the variable are turned into a numerator/denominator pair of numpy
polynomials.  Integration uses polynomial division followed by partial
fractions over simple roots: real roots give ``ln|v - r|``, conjugate pairs
give a logarithm of the real quadratic plus an ``arctan``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import Polynomial

from . import expr as ex

_MAX_DEGREE = 8
_ROOT_SEPARATION = 1e-7


class _NotRational(Exception):
    pass


def as_rational(e: ex.Expr, var: str) -> tuple[Polynomial, Polynomial] | None:
    """``(num, den)`` with ``e = num/den``, or ``None`` if ``e`` is not rational."""
    try:
        num, den = _convert(e, var)
    except (_NotRational, ex.DomainError, ZeroDivisionError):
        return None
    if den.degree() > _MAX_DEGREE or num.degree() > _MAX_DEGREE:
        return None
    return num.trim(), den.trim()


def _convert(e: ex.Expr, var: str):
    one = Polynomial([1.0])
    if var not in e.variables:
        if e.variables:
            raise _NotRational
        return Polynomial([ex.evaluate(e, {})]), one
    if isinstance(e, ex.Var):
        return Polynomial([0.0, 1.0]), one
    if isinstance(e, ex.Neg):
        n, d = _convert(e.arg, var)
        return -n, d
    if isinstance(e, (ex.Add, ex.Mul, ex.Div)):
        n1, d1 = _convert(e.left, var)
        n2, d2 = _convert(e.right, var)
        if isinstance(e, ex.Add):
            if d1 == d2:
                return n1 + n2, d1
            return n1 * d2 + n2 * d1, d1 * d2
        if isinstance(e, ex.Mul):
            return n1 * n2, d1 * d2
        if not np.any(n2.coef):
            raise ZeroDivisionError
        return n1 * d2, d1 * n2
    if isinstance(e, ex.Pow) and not e.exponent.variables:
        k = ex.evaluate(e.exponent, {})
        if float(k).is_integer() and abs(k) <= _MAX_DEGREE:
            n, d = _convert(e.base, var)
            k = int(k)
            return (n**k, d**k) if k >= 0 else (d ** (-k), n ** (-k))
    raise _NotRational


def rational_integral(num: Polynomial, den: Polynomial, var: str) -> ex.Expr | None:
    """Antiderivative of ``num/den`` as an expression, or ``None`` when the
    denominator has repeated roots (those are left to quadrature)."""
    v = ex.Var(var)
    lead = den.coef[-1]
    num, den = num / lead, den / lead
    quotient, rem = divmod(num, den)
    parts: list[ex.Expr] = []
    # polynomial part
    for k, c in enumerate(quotient.coef):
        if abs(c) > 1e-14:
            parts.append(ex.mul(ex.Const(_clean(c / (k + 1))), ex.power(v, ex.Const(k + 1.0))))
    if den.degree() == 0 or not np.any(np.abs(rem.coef) > 1e-14):
        return _sum(parts)
    roots = den.roots()
    if _has_repeated(roots):
        return None
    dden = den.deriv()
    done = set()
    for i, r in enumerate(roots):
        if i in done:
            continue
        c = rem(r) / dden(r)
        if abs(r.imag) <= 1e-12 * max(1.0, abs(r)):
            r = float(r.real)
            c = float(np.real(c))
            if abs(c) > 1e-14:
                lin = ex.sub(v, ex.Const(_clean(r))) if r != 0.0 else v
                parts.append(ex.mul(ex.Const(_clean(c)), ex.apply("ln", ex.apply("abs", lin))))
            continue
        # conjugate partner
        j = next(j for j in range(i + 1, len(roots)) if j not in done and abs(roots[j] - np.conj(r)) < 1e-8 * max(1.0, abs(r)))
        done.add(j)
        p, q = float(r.real), abs(float(r.imag))
        if r.imag < 0:
            c = np.conj(c)
        a, b = float(c.real), float(c.imag)
        shifted = ex.sub(v, ex.Const(_clean(p))) if p != 0.0 else v
        quad = ex.add(ex.power(shifted, ex.Const(2.0)), ex.Const(_clean(q * q)))
        if abs(a) > 1e-14:
            parts.append(ex.mul(ex.Const(_clean(a)), ex.apply("ln", quad)))
        if abs(b) > 1e-14:
            arg = ex.div(shifted, ex.Const(_clean(q)))
            parts.append(ex.mul(ex.Const(_clean(-2.0 * b)), ex.apply("arctan", arg)))
    return _sum(parts)


def _clean(v: float) -> float:
    """Remove round-off from values that are integers or simple fractions."""
    for den in (1, 2, 3, 4, 6, 8):
        r = round(v * den) / den
        if abs(v - r) <= 1e-12 * max(1.0, abs(v)):
            return r + 0.0
    return v


def _has_repeated(roots) -> bool:
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= _ROOT_SEPARATION * max(1.0, abs(roots[i])):
                return True
    return False


def _sum(parts: list[ex.Expr]) -> ex.Expr:
    out: ex.Expr = ex.ZERO
    for p in parts:
        out = ex.sub(out, p.arg) if isinstance(p, ex.Neg) else ex.add(out, p)
    return out


def integrate_rational(e: ex.Expr, var: str) -> ex.Expr | None:
    pair = as_rational(e, var)
    if pair is None:
        return None
    num, den = pair
    if not np.any(den.coef):
        return None
    return rational_integral(num, den, var)


def quadratic_arctan_data(den: Polynomial) -> tuple[float, float, float] | None:
    """For ``p2 v^2 + p1 v + p0`` without real roots: ``(p2, centre, s)`` with
    ``den = p2 ((v - centre)^2 + s^2)``."""
    if den.degree() != 2:
        return None
    p0, p1, p2 = den.coef
    centre = -p1 / (2 * p2)
    s2 = p0 / p2 - centre**2
    if s2 <= 0:
        return None
    return float(p2), float(centre), math.sqrt(s2)
