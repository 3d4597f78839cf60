"""
The conformable derivative and integral
=======================================

The order-alpha derivative of a differentiable ``f`` at ``x > 0`` is
``x^(1-alpha) f'(x)``; the alpha-integral undoes it.  This script checks
both numerically.
"""

import math

import numpy as np

from confode import confcalc as cc
from confode import expr as ex

# %%
# Two implementations of the derivative: the defining limit quotient and
# the identity with the classical derivative.  They agree to about 1e-10.
f = ex.parse("sin(x)*exp(-x/3)")
for alpha in (0.25, 0.5, 1.0):
    limit = cc.conf_derivative_limit(f, 2.0, alpha)
    identity = cc.conf_derivative_identity(f, 2.0, alpha)
    print(f"alpha={alpha:4}  limit={limit:+.12f}  identity={identity:+.12f}")

# %%
# Power rule: (x^n)^(alpha) = n x^(n - alpha), exactly.
print(cc.conf_derivative_identity(ex.parse("x^2"), 4.0, 0.5))  # 16.0

# %%
# The alpha-integral of 1 from 0 to t is t^alpha / alpha; the weight
# x^(alpha-1) is singular at 0 and is removed by substituting u = x^alpha.
t = np.linspace(0.5, 3.0, 6)
numeric = np.array([cc.conf_integral_numeric(ex.parse("1"), 0.0, s, 0.5) for s in t])
print(np.max(np.abs(numeric - t**0.5 / 0.5)))

# %%
# Closed-form table lookup, and differentiating the result back.
for text in ("x^2", "x^(-0.5)", "x^0.5*exp(x)/(1+exp(x))", "x^1.5*exp(2*x^0.5/0.5)"):
    hit = cc.table1_lookup(ex.parse(text), 0.5)
    back = cc.conf_derivative_identity(hit.antiderivative, 1.7, 0.5)
    want = ex.evaluate(ex.parse(text), {"x": 1.7})
    print(f"{text:28} -> {ex.render(hit.antiderivative):40} ({hit.pattern}), error {abs(back - want):.1e}")

# %%
# Integration by parts on [1, 2] for f = x^m, g^(alpha) = exp(r x^alpha / alpha).
for m, r in ((1, -1), (2, 1)):
    lhs, rhs = cc.exercise_identity_sides(m, r, 0.5, 1.0, 2.0)
    print(f"m={m} r={r:+d}: {lhs:.15f} vs {rhs:.15f}")
print(math.isclose(lhs, rhs, rel_tol=1e-12))
