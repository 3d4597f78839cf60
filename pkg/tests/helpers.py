"""Shared hypothesis strategies and small numeric helpers for the test suite."""

from __future__ import annotations

import math
from pathlib import Path

from hypothesis import strategies as st

from confode import expr as ex

PROBLEMS = Path(__file__).resolve().parents[1] / "src" / "confode" / "problems"
GOLDEN = Path(__file__).resolve().parent / "golden"


def problem_path(name: str) -> Path:
    return PROBLEMS / f"{name}.problem"


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def central_difference(f, x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


# ---------------------------------------------------------------------------
# random expressions, smooth on the positive quadrant
# ---------------------------------------------------------------------------

coefficients = st.integers(-30, 30).map(lambda k: k / 10.0)
exponents = st.sampled_from([-1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])


def _leaves(variables):
    return st.one_of(
        coefficients.map(ex.Const),
        st.sampled_from([ex.Var(v) for v in variables]),
        st.tuples(st.sampled_from(variables), exponents).map(lambda p: ex.Pow(ex.Var(p[0]), ex.Const(p[1]))),
    )


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: ex.Add(*p)),
        st.tuples(children, children).map(lambda p: ex.Add(p[0], ex.Neg(p[1]))),
        st.tuples(children, children).map(lambda p: ex.Mul(*p)),
        # denominators bounded away from zero
        st.tuples(children, children).map(lambda p: ex.Div(p[0], ex.Add(ex.Const(1.5), ex.Apply("sin", p[1])))),
        st.tuples(st.sampled_from(["sin", "cos", "arctan"]), children).map(lambda p: ex.Apply(*p)),
        children.map(lambda c: ex.Apply("exp", ex.Apply("sin", c))),
        children.map(lambda c: ex.Apply("ln", ex.Add(ex.Const(1.0), ex.Pow(c, ex.Const(2.0))))),
        children.map(ex.Neg),
    )


def expressions(variables=("x",), max_leaves: int = 8):
    """Random expression trees that are smooth wherever the variables are positive."""
    return st.recursive(_leaves(variables), _extend, max_leaves=max_leaves)


positive = st.floats(0.3, 3.0, allow_nan=False, allow_infinity=False)
alphas = st.floats(0.05, 1.0, allow_nan=False, allow_infinity=False)


def safe_eval(e: ex.Expr, **point) -> float | None:
    """Value of ``e`` or ``None`` when it is undefined or uselessly large."""
    try:
        v = ex.evaluate(e, point)
    except ex.DomainError:
        return None
    if not math.isfinite(v) or abs(v) > 1e8:
        return None
    return v
