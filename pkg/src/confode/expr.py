"""Expression trees for real functions of one or two variables.

Trees are immutable.  They can be parsed from text, rendered back to text,
evaluated (through a cached compiled lambda), differentiated symbolically and
lightly simplified.  Everything else in the package consumes these trees.

Grammar accepted by :func:`parse`::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := atom ('^' unary)?
    atom   := number | variable | ident '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than a leading minus, so
``-x^2`` is ``-(x^2)`` and ``2^-x`` is ``2^(-x)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping

BUILTINS = ("exp", "ln", "sin", "cos", "tan", "arctan", "sqrt", "abs")
DEFAULT_VARIABLES = ("x", "y")

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


class ExprError(ValueError):
    """Base class for expression construction and evaluation failures."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at byte {offset}{detail}")


class UnknownIdentifierError(ParseError):
    pass


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain (ln of non-positive, 1/0, overflow ...)."""


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------


class Expr:
    """Base class of all expression nodes.

    Arithmetic operators build new trees; ``==`` is structural equality.
    Calling an expression evaluates it: ``(x**2)(x=3.0) == 9.0``.
    """

    __slots__ = ()

    # -- construction sugar --------------------------------------------------
    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Add(self, Neg(as_expr(other)))

    def __rsub__(self, other):
        return Add(as_expr(other), Neg(self))

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __rpow__(self, other):
        return Pow(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    # -- queries ---------------------------------------------------------------
    @property
    def children(self) -> tuple["Expr", ...]:
        return ()

    @cached_property
    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for child in self.children:
            out |= child.variables
        return frozenset(out)

    def depends_on(self, name: str) -> bool:
        return name in self.variables

    @cached_property
    def _compiled(self) -> dict:
        return {}

    def __call__(self, **point: float) -> float:
        return evaluate(self, point)

    def __str__(self) -> str:
        return render(self)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ExprError(f"non-finite constant {self.value!r}")
        object.__setattr__(self, "value", float(self.value))

    @cached_property
    def variables(self):
        return frozenset()


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if not _NAME_RE.match(self.name) or self.name in BUILTINS:
            raise ExprError(f"invalid variable name {self.name!r}")

    @cached_property
    def variables(self):
        return frozenset((self.name,))


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: Expr

    @property
    def children(self):
        return (self.base, self.exponent)


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=True)
class Apply(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in BUILTINS:
            raise ExprError(f"unknown builtin {self.func!r}")

    @property
    def children(self):
        return (self.arg,)


def const(value: float) -> Const:
    return Const(float(value))


X = Var("x")
Y = Var("y")
ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_NAMESPACE = {
    "_pow": math.pow,
    "_exp": math.exp,
    "_ln": math.log,
    "_sin": math.sin,
    "_cos": math.cos,
    "_tan": math.tan,
    "_arctan": math.atan,
    "_sqrt": math.sqrt,
    "_abs": abs,
}


def _source(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 else f"({e.value!r})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return f"({_source(e.left)} + {_source(e.right)})"
    if isinstance(e, Mul):
        return f"({_source(e.left)} * {_source(e.right)})"
    if isinstance(e, Div):
        return f"({_source(e.left)} / {_source(e.right)})"
    if isinstance(e, Pow):
        return f"_pow({_source(e.base)}, {_source(e.exponent)})"
    if isinstance(e, Neg):
        return f"(-{_source(e.arg)})"
    if isinstance(e, Apply):
        return f"_{e.func}({_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def lambdify(e: Expr, names: Iterable[str] = DEFAULT_VARIABLES) -> Callable[..., float]:
    """Compile ``e`` into a positional function of ``names``.

    The returned callable raises :class:`DomainError` instead of producing
    NaN, infinities or Python's assorted math exceptions.
    """
    names = tuple(names)
    cache = e._compiled
    if names in cache:
        return cache[names]
    missing = e.variables - set(names)
    if missing:
        raise ExprError(f"unassigned variable(s): {', '.join(sorted(missing))}")
    raw = eval(f"lambda {', '.join(names)}: {_source(e)}", dict(_NAMESPACE))
    isfinite = math.isfinite

    def fn(*args):
        try:
            value = raw(*args)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"{exc} evaluating {render(e)} at {dict(zip(names, args))}") from None
        if type(value) is not float:
            value = float(value)
        if not isfinite(value):
            raise DomainError(f"non-finite value evaluating {render(e)} at {dict(zip(names, args))}")
        return value

    cache[names] = fn
    return fn


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``e`` with variables assigned from ``point``."""
    names = tuple(sorted(e.variables))
    missing = [n for n in names if n not in point]
    if missing:
        raise ExprError(f"unassigned variable(s): {', '.join(missing)}")
    return lambdify(e, names)(*(float(point[n]) for n in names))


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def format_number(value: float, digits: int | None = None) -> str:
    """Shortest round-tripping text, or ``digits`` significant digits."""
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    if digits is not None:
        text = f"{value:.{digits}g}"
        return text if "e" not in text else repr(float(text))
    return repr(value)


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg) and _plain_product(e.arg):
        return _PREC_MUL
    if isinstance(e, Neg) or (isinstance(e, Const) and e.value < 0):
        return _PREC_UNARY
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _plain_product(e: Expr) -> bool:
    """A product/quotient that can take a leading minus sign without parentheses."""
    return isinstance(e, (Mul, Div)) and _negative_term(e.left) is None


def _wrap(e: Expr, minimum: int, digits: int | None) -> str:
    text = render(e, digits)
    return f"({text})" if _prec(e) < minimum else text


def _negative_term(e: Expr) -> Expr | None:
    """``t`` when ``e`` reads as ``-t`` (a negation or a negative leading coefficient)."""
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Const) and e.value < 0:
        return Const(-e.value)
    if isinstance(e, (Mul, Div)) and isinstance(e.left, Const) and e.left.value < 0:
        left = Const(-e.left.value)
        if left.value == 1.0 and isinstance(e, Mul):
            return e.right
        return type(e)(left, e.right)
    return None


def render(e: Expr, digits: int | None = None) -> str:
    """Render ``e`` in the parser's grammar with minimal parentheses.

    ``parse(render(e))`` rebuilds a tree that evaluates identically.  With
    ``digits`` the numbers are rounded for display (no longer exact).
    """
    if isinstance(e, Const):
        return format_number(e.value, digits)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        tail = _negative_term(e.right)
        if tail is not None:
            return f"{_wrap(e.left, _PREC_ADD, digits)} - {_wrap(tail, _PREC_MUL, digits)}"
        return f"{_wrap(e.left, _PREC_ADD, digits)} + {_wrap(e.right, _PREC_MUL, digits)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.left, _PREC_MUL, digits)}*{_wrap(e.right, _PREC_UNARY, digits)}"
    if isinstance(e, Div):
        return f"{_wrap(e.left, _PREC_MUL, digits)}/{_wrap(e.right, _PREC_UNARY, digits)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM, digits)}^{_wrap(e.exponent, _PREC_UNARY, digits)}"
    if isinstance(e, Neg):
        if _plain_product(e.arg):
            return f"-{render(e.arg, digits)}"
        return f"-{_wrap(e.arg, _PREC_UNARY, digits)}"
    if isinstance(e, Apply):
        return f"{e.func}({render(e.arg, digits)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

_ATOM_START = ("number", "identifier", "(", "-")


class _Parser:
    def __init__(self, text: str, variables, constants):
        self.text = text
        self.variables = tuple(variables)
        self.constants = dict(constants or {})
        self.tokens = self._tokenize()
        self.pos = 0

    def _offset(self, char_index: int) -> int:
        return len(self.text[:char_index].encode("utf-8"))

    def _tokenize(self):
        tokens = []
        i = 0
        while i < len(self.text):
            m = _TOKEN_RE.match(self.text, i)
            if m is None:
                raise ParseError(f"unexpected character {self.text[i]!r}", self._offset(i), _ATOM_START)
            kind = m.lastgroup
            if kind != "ws":
                tokens.append((kind, m.group(), i))
            i = m.end()
        tokens.append(("end", "", len(self.text)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, tok, expected):
        what = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ParseError(f"unexpected {what}", self._offset(tok[2]), expected)

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] not in ("op",):
            self.fail(tok, (value,))
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(tok, ("+", "-", "*", "/", "^", "end"))
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Add(left, Neg(right))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.factor()

    def factor(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        kind, value, where = tok
        if kind == "number":
            return Const(float(value))
        if kind == "ident":
            if value in BUILTINS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Apply(value, arg)
            if value in self.variables:
                return Var(value)
            if value in self.constants:
                return Const(float(self.constants[value]))
            known = list(self.variables) + list(self.constants) + [f"{b}(" for b in BUILTINS]
            raise UnknownIdentifierError(f"unknown identifier {value!r}", self._offset(where), known)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        self.fail(tok, _ATOM_START)


def parse(
    text: str,
    variables: Iterable[str] = DEFAULT_VARIABLES,
    constants: Mapping[str, float] | None = None,
) -> Expr:
    """Parse ``text`` into an expression tree.

    ``variables`` lists the identifiers that become :class:`Var` nodes;
    ``constants`` maps further identifiers (``alpha``, ``beta`` ...) to
    numbers.  Anything else raises :class:`UnknownIdentifierError`.
    """
    return _Parser(text, variables, constants).parse()


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------


def _fold(fn, *values):
    try:
        out = fn(*values)
    except (ZeroDivisionError, ValueError, OverflowError):
        return None
    if isinstance(out, complex) or not math.isfinite(out):
        return None
    return Const(out)


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p + q, a.value, b.value) or Add(a, b)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(b, Const) and b.value < 0:
        return Add(a, Neg(Const(-b.value)))
    return Add(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p - q, a.value, b.value) or Add(a, Neg(b))
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(b, Neg):
        return add(a, b.arg)
    return Add(a, Neg(b)) if not (isinstance(b, Const) and b.value < 0) else Add(a, Const(-b.value))


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p * q, a.value, b.value) or Mul(a, b)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
        return mul(Const(a.value * b.left.value), b.right)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p / q, a.value, b.value) or Div(a, b)
    if _is(b, 1.0):
        return a
    if _is(a, 0.0) and not _is(b, 0.0):
        return ZERO
    return Div(a, b)


def power(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(math.pow, a.value, b.value) or Pow(a, b)
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return ONE
    if _is(a, 1.0):
        return ONE
    return Pow(a, b)


_APPLY_FNS = {
    "exp": math.exp,
    "ln": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "arctan": math.atan,
    "sqrt": math.sqrt,
    "abs": abs,
}


def apply(func: str, a: Expr) -> Expr:
    if isinstance(a, Const):
        return _fold(_APPLY_FNS[func], a.value) or Apply(func, a)
    return Apply(func, a)


def simplify(e: Expr) -> Expr:
    """Apply value-preserving local rewrites bottom-up.

    Only ``0+e``, ``1*e``, ``e^1``, ``e^0``, double negation and constant
    folding are performed; there is no canonical form.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Add):
        left, right = simplify(e.left), simplify(e.right)
        if isinstance(right, Neg):
            return sub(left, right.arg)
        return add(left, right)
    if isinstance(e, Mul):
        return mul(simplify(e.left), simplify(e.right))
    if isinstance(e, Div):
        return div(simplify(e.left), simplify(e.right))
    if isinstance(e, Pow):
        return power(simplify(e.base), simplify(e.exponent))
    if isinstance(e, Neg):
        return neg(simplify(e.arg))
    if isinstance(e, Apply):
        return apply(e.func, simplify(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# substitution and differentiation
# ---------------------------------------------------------------------------


def substitute(e: Expr, mapping: Mapping[str, Expr | float]) -> Expr:
    """Replace variables by expressions; the result is simplified."""
    repl = {k: as_expr(v) for k, v in mapping.items()}

    def go(node: Expr) -> Expr:
        if isinstance(node, Var):
            return repl.get(node.name, node)
        if isinstance(node, Const):
            return node
        if not (node.variables & repl.keys()):
            return node
        if isinstance(node, Add):
            return Add(go(node.left), go(node.right))
        if isinstance(node, Mul):
            return Mul(go(node.left), go(node.right))
        if isinstance(node, Div):
            return Div(go(node.left), go(node.right))
        if isinstance(node, Pow):
            return Pow(go(node.base), go(node.exponent))
        if isinstance(node, Neg):
            return Neg(go(node.arg))
        return Apply(node.func, go(node.arg))

    return simplify(go(e))


def replace_subtree(e: Expr, target: Expr, replacement: Expr) -> Expr:
    """Replace every occurrence of the subtree ``target`` by ``replacement``."""
    if e == target:
        return replacement
    if isinstance(e, (Const, Var)):
        return e
    kids = [replace_subtree(c, target, replacement) for c in e.children]
    if isinstance(e, Apply):
        return Apply(e.func, kids[0])
    if isinstance(e, Neg):
        return Neg(kids[0])
    return type(e)(*kids)


def diff(e: Expr, var: str) -> Expr:
    """Classical symbolic derivative of ``e`` with respect to ``var``."""
    if var not in e.variables:
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Neg):
        return neg(diff(e.arg, var))
    if isinstance(e, Mul):
        u, v = e.left, e.right
        return add(mul(diff(u, var), v), mul(u, diff(v, var)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        if var not in v.variables:
            return div(diff(u, var), v)
        return div(sub(mul(diff(u, var), v), mul(u, diff(v, var))), power(v, Const(2.0)))
    if isinstance(e, Pow):
        b, k = e.base, e.exponent
        if var not in k.variables:
            return mul(mul(k, power(b, sub(k, ONE))), diff(b, var))
        if var not in b.variables:
            return mul(mul(e, apply("ln", b)), diff(k, var))
        inner = add(mul(diff(k, var), apply("ln", b)), div(mul(k, diff(b, var)), b))
        return mul(e, inner)
    if isinstance(e, Apply):
        u = e.arg
        du = diff(u, var)
        f = e.func
        if f == "exp":
            outer = e
        elif f == "ln":
            return div(du, u)
        elif f == "sin":
            outer = apply("cos", u)
        elif f == "cos":
            outer = neg(apply("sin", u))
        elif f == "tan":
            outer = add(ONE, power(e, Const(2.0)))
        elif f == "arctan":
            return div(du, add(ONE, power(u, Const(2.0))))
        elif f == "sqrt":
            return div(du, mul(Const(2.0), e))
        elif f == "abs":
            outer = div(u, e)
        else:  # pragma: no cover - Apply validates func
            raise ExprError(f"no derivative rule for {f}")
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


def flatten_product(e: Expr) -> tuple[float, list[Expr], list[Expr]]:
    """Split ``e`` into ``coefficient * prod(num) / prod(den)``."""
    coef = 1.0
    num: list[Expr] = []
    den: list[Expr] = []

    def go(node: Expr, up: bool):
        nonlocal coef
        if isinstance(node, Const):
            if up:
                coef *= node.value
            elif node.value == 0.0:
                raise ZeroDivisionError("division by constant zero")
            else:
                coef /= node.value
        elif isinstance(node, Neg):
            coef = -coef
            go(node.arg, up)
        elif isinstance(node, Mul):
            go(node.left, up)
            go(node.right, up)
        elif isinstance(node, Div):
            go(node.left, up)
            go(node.right, not up)
        else:
            (num if up else den).append(node)

    go(e, True)
    return coef, num, den


def product(factors: Iterable[Expr]) -> Expr:
    out: Expr = ONE
    for f in factors:
        out = mul(out, f)
    return out


def flatten_sum(e: Expr) -> list[Expr]:
    """Top-level additive terms of ``e`` (negations pushed onto the terms)."""
    if isinstance(e, Add):
        return flatten_sum(e.left) + flatten_sum(e.right)
    if isinstance(e, Neg):
        return [neg(t) for t in flatten_sum(e.arg)]
    return [e]


def tidy_product(e: Expr) -> Expr:
    """Rebuild a product with powers of the same variable merged.

    ``x^-0.5 * (x^0.5 * exp(x)) / (1 + exp(x))`` becomes
    ``exp(x)/(1 + exp(x))``; every other factor is kept as is.  Valid on the
    positive half-axis, where the merged powers are defined.
    """
    try:
        coef, num, den = flatten_product(e)
    except ZeroDivisionError:
        return e
    powers: dict[str, float] = {}
    rest_num: list[Expr] = []
    rest_den: list[Expr] = []
    for factors, sign, rest in ((num, 1.0, rest_num), (den, -1.0, rest_den)):
        for f in factors:
            if isinstance(f, Var):
                powers[f.name] = powers.get(f.name, 0.0) + sign
            elif isinstance(f, Pow) and isinstance(f.base, Var) and isinstance(f.exponent, Const):
                powers[f.base.name] = powers.get(f.base.name, 0.0) + sign * f.exponent.value
            else:
                rest.append(simplify(f))
    for name in sorted(powers):
        k = round(powers[name], 12) + 0.0
        if k > 0:
            rest_num.append(power(Var(name), Const(k)))
        elif k < 0:
            rest_den.append(power(Var(name), Const(-k)))
    out = div(product(rest_num), product(rest_den))
    return mul(Const(coef), out)
