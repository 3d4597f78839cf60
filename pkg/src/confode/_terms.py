"""Sums of terms ``c * v**q * exp(sum_j d_j * v**p_j)`` in one variable ``v``.

This small normal form is what makes the closed-form integral table useful:
products of exponentials combine, like powers collect and cancellations from
integration by parts become visible.  Conversion from an :class:`Expr` fails
(returns ``None``) for anything outside the class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import expr as ex

_DIGITS = 12
_MAX_POWER = 8


class NotRepresentable(Exception):
    pass


def snap(value: float) -> float:
    """Round away float noise in the 13th significant digit."""
    if value == 0.0 or not math.isfinite(value):
        return value
    return float(f"{value:.{_DIGITS}g}")


def _key(q: float) -> float:
    return round(q, _DIGITS) + 0.0


Expo = tuple  # tuple[tuple[float, float], ...], sorted by power


def _expo_add(a: Expo, b: Expo, scale: float = 1.0) -> Expo:
    acc = dict(a)
    for p, d in b:
        acc[p] = acc.get(p, 0.0) + scale * d
    return tuple(sorted((p, d) for p, d in acc.items() if d != 0.0))


def _expo_scale(a: Expo, k: float) -> Expo:
    return tuple((p, d * k) for p, d in a if d * k != 0.0)


@dataclass
class TermSum:
    var: str
    terms: dict = field(default_factory=dict)  # (q, expo) -> coefficient

    # -- algebra ---------------------------------------------------------------
    @classmethod
    def constant(cls, var: str, c: float) -> "TermSum":
        return cls(var, {(0.0, ()): float(c)} if c != 0.0 else {})

    @classmethod
    def monomial(cls, var: str, c: float, q: float, expo: Expo = ()) -> "TermSum":
        return cls(var, {(_key(q), expo): float(c)} if c != 0.0 else {})

    def copy(self) -> "TermSum":
        return TermSum(self.var, dict(self.terms))

    def add_term(self, key, c: float):
        self.terms[key] = self.terms.get(key, 0.0) + c

    def __add__(self, other: "TermSum") -> "TermSum":
        out = self.copy()
        for k, c in other.terms.items():
            out.add_term(k, c)
        return out.pruned()

    def scaled(self, k: float) -> "TermSum":
        return TermSum(self.var, {key: c * k for key, c in self.terms.items()}).pruned()

    def __neg__(self) -> "TermSum":
        return self.scaled(-1.0)

    def __sub__(self, other: "TermSum") -> "TermSum":
        return self + (-other)

    def __mul__(self, other: "TermSum") -> "TermSum":
        out = TermSum(self.var)
        for (q1, e1), c1 in self.terms.items():
            for (q2, e2), c2 in other.terms.items():
                out.add_term((_key(q1 + q2), _expo_add(e1, e2)), c1 * c2)
        return out.pruned()

    def pruned(self, rel: float = 1e-13) -> "TermSum":
        if not self.terms:
            return self
        scale = max(abs(c) for c in self.terms.values())
        keep = {k: c for k, c in self.terms.items() if abs(c) > rel * scale and c != 0.0}
        return TermSum(self.var, keep)

    @property
    def is_single(self) -> bool:
        return len(self.terms) == 1

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def single(self):
        ((q, expo), c), = self.terms.items()
        return c, q, expo

    def inverse(self) -> "TermSum":
        if not self.is_single:
            raise NotRepresentable("cannot invert a sum")
        c, q, expo = self.single()
        return TermSum.monomial(self.var, 1.0 / c, -q, _expo_scale(expo, -1.0))

    def power(self, k: float) -> "TermSum":
        if self.is_zero:
            if k > 0:
                return self
            raise NotRepresentable("zero to a non-positive power")
        if self.is_single:
            c, q, expo = self.single()
            if c < 0 and not float(k).is_integer():
                raise NotRepresentable("negative coefficient to a fractional power")
            return TermSum.monomial(self.var, math.pow(c, k), q * k, _expo_scale(expo, k))
        if float(k).is_integer() and 0 <= k <= _MAX_POWER:
            out = TermSum.constant(self.var, 1.0)
            for _ in range(int(k)):
                out = out * self
            return out
        if float(k).is_integer() and -_MAX_POWER <= k < 0:
            raise NotRepresentable("negative power of a sum")
        raise NotRepresentable("fractional power of a sum")

    @property
    def is_polynomial_like(self) -> bool:
        """No exponential factors."""
        return all(not expo for (_, expo) in self.terms)

    def exp(self) -> "TermSum":
        if not self.is_polynomial_like:
            raise NotRepresentable("exp of an exponential")
        c0 = 0.0
        expo: Expo = ()
        for (q, _), c in self.terms.items():
            if q == 0.0:
                c0 += c
            else:
                expo = _expo_add(expo, ((q, c),))
        return TermSum.monomial(self.var, math.exp(c0), 0.0, expo)

    # -- evaluation & conversion ---------------------------------------------
    def __call__(self, v: float) -> float:
        total = 0.0
        for (q, expo), c in self.terms.items():
            total += c * v**q * math.exp(sum(d * v**p for p, d in expo))
        return total

    def to_expr(self) -> ex.Expr:
        """Deterministic expression for the sum: grouped by exponential,
        descending powers within each group."""
        v = ex.Var(self.var)
        ordered = sorted(self.terms.items(), key=lambda kv: (kv[0][1], -kv[0][0]))
        out: ex.Expr | None = None
        for (q, expo), c in ordered:
            body: ex.Expr | None = None
            if q != 0.0:
                body = v if q == 1.0 else ex.Pow(v, ex.Const(snap(q)))
            if expo:
                arg = _poly_expr(v, expo)
                e = ex.Apply("exp", arg)
                body = e if body is None else ex.Mul(body, e)
            c = snap(c)
            if body is None:
                term = ex.Const(abs(c))
            elif abs(c) == 1.0:
                term = body
            else:
                term = ex.Mul(ex.Const(abs(c)), body)
            if out is None:
                out = ex.neg(term) if c < 0 else term
            else:
                out = ex.Add(out, ex.Neg(term)) if c < 0 else ex.Add(out, term)
        return out if out is not None else ex.ZERO


def _poly_expr(v: ex.Var, expo: Expo) -> ex.Expr:
    parts = TermSum(v.name, {(p, ()): d for p, d in expo})
    return parts.to_expr()


def from_expr(e: ex.Expr, var: str) -> TermSum | None:
    """Convert ``e`` (a function of ``var`` only) to a :class:`TermSum`."""
    try:
        return _convert(e, var).pruned()
    except (NotRepresentable, ex.DomainError, OverflowError, ZeroDivisionError, ValueError):
        return None


def _constant_value(e: ex.Expr) -> float:
    if e.variables:
        raise NotRepresentable(f"free variables {sorted(e.variables)}")
    return ex.evaluate(e, {})


def _convert(e: ex.Expr, var: str) -> TermSum:
    if var not in e.variables:
        return TermSum.constant(var, _constant_value(e))
    if isinstance(e, ex.Var):
        return TermSum.monomial(var, 1.0, 1.0)
    if isinstance(e, ex.Add):
        return _convert(e.left, var) + _convert(e.right, var)
    if isinstance(e, ex.Neg):
        return -_convert(e.arg, var)
    if isinstance(e, ex.Mul):
        return _convert(e.left, var) * _convert(e.right, var)
    if isinstance(e, ex.Div):
        den = _convert(e.right, var)
        return _convert(e.left, var) * den.inverse()
    if isinstance(e, ex.Pow):
        if var in e.exponent.variables:
            if var in e.base.variables:
                raise NotRepresentable("variable in base and exponent")
            b = _constant_value(e.base)
            if b <= 0:
                raise NotRepresentable("non-positive base")
            return (_convert(e.exponent, var).scaled(math.log(b))).exp()
        return _convert(e.base, var).power(_constant_value(e.exponent))
    if isinstance(e, ex.Apply):
        if e.func == "exp":
            return _convert(e.arg, var).exp()
        if e.func == "sqrt":
            return _convert(e.arg, var).power(0.5)
    raise NotRepresentable(f"{type(e).__name__} not representable")


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


@dataclass
class Antiderivative:
    """``terms + log_coeff * ln|v|``."""

    terms: TermSum
    log_coeff: float = 0.0
    patterns: tuple = ()

    def to_expr(self) -> ex.Expr:
        base = self.terms.to_expr()
        if self.log_coeff == 0.0:
            return base
        v = ex.Var(self.terms.var)
        lg = ex.Apply("ln", ex.Apply("abs", v))
        c = snap(self.log_coeff)
        lterm = lg if abs(c) == 1.0 else ex.Mul(ex.Const(abs(c)), lg)
        if self.terms.is_zero:
            return ex.neg(lterm) if c < 0 else lterm
        return ex.Add(base, ex.Neg(lterm)) if c < 0 else ex.Add(base, lterm)

    def __call__(self, v: float) -> float:
        out = self.terms(v)
        if self.log_coeff:
            out += self.log_coeff * math.log(abs(v))
        return out


_EQ_TOL = 1e-12


def integrate(ts: TermSum, alpha: float) -> Antiderivative | None:
    """Order-``alpha`` indefinite integral of ``ts`` (``alpha=1`` is classical).

    Pure powers use ``v^(q+alpha)/(q+alpha)`` with the ``q = -alpha`` case
    sent to ``ln|v|``.  Terms ``v^q exp(r v^alpha/alpha)`` are reduced by
    repeated integration by parts, which terminates when the coefficients
    cancel or the power reaches zero.
    """
    groups: dict = {}
    for (q, expo), c in ts.terms.items():
        groups.setdefault(expo, {})[q] = c
    out = TermSum(ts.var)
    log_coeff = 0.0
    patterns = []
    for expo, coeffs in groups.items():
        if not expo:
            for q, c in coeffs.items():
                if abs(q + alpha) < _EQ_TOL:
                    log_coeff += c
                    patterns.append("log")
                else:
                    out.add_term((_key(q + alpha), ()), c / (q + alpha))
                    patterns.append("constant" if q == 0.0 else "power")
            continue
        if len(expo) != 1 or abs(expo[0][0] - alpha) > _EQ_TOL:
            return None
        rate = expo[0][1] * alpha
        reduced = _reduce_by_parts(dict(coeffs), rate, alpha)
        if reduced is None:
            return None
        for q, c in reduced.items():
            out.add_term((q, expo), c)
        patterns.append("exp-parts")
    return Antiderivative(out.pruned(), log_coeff, tuple(dict.fromkeys(patterns)))


def _reduce_by_parts(coeffs: dict, rate: float, alpha: float, max_steps: int = 200):
    """Integrate ``sum c_q v^q E`` with ``E = exp(rate v^alpha/alpha)``.

    Uses ``I(v^q E) = v^q E / rate - (q/rate) I(v^(q-alpha) E)``.
    Returns the coefficients of ``v^q E`` in the antiderivative.
    """
    scale = max(abs(c) for c in coeffs.values())
    result: dict = {}
    for _ in range(max_steps):
        live = {q: c for q, c in coeffs.items() if abs(c) > 1e-12 * scale}
        if not live:
            return result
        q = max(live)
        c = coeffs.pop(q)
        for k in [k for k in coeffs if k not in live]:
            coeffs.pop(k)
        if q < -_EQ_TOL:
            return None
        result[q] = result.get(q, 0.0) + c / rate
        if abs(q) < _EQ_TOL:
            continue
        nq = _key(q - alpha)
        coeffs[nq] = coeffs.get(nq, 0.0) - c * q / rate
    return None
