"""Flat ``key = value`` problem files.

Example::

    # dy/dx^(alpha) + y = x^(m+1-alpha) + (m+1-alpha) x^(m+1-2 alpha)
    id = ex8
    alpha = 0.5
    m = 1
    rhs = -y + x^(m+1-alpha) + (m+1-alpha)*x^(m+1-2*alpha)
    ic = 1, 1 + exp(-2)
    window = 0.5, 4
    family = linear
    expected = y = x^(m+1-alpha) + A*exp(-x^alpha/alpha)

Keys: ``alpha``; either ``rhs`` or both ``M`` and ``N``; optional ``ic``
(``x0, y0``), ``window`` (``lo, hi``), ``terminal``, parameters ``m``, ``n``,
``r``, ``beta`` (usable by name in every expression, as is ``alpha``),
``family``, ``expected`` and ``variant.<name>`` (closed forms, see
:func:`parse_equation`), ``id``, ``title`` and ``note``.  Numbers may be
written as constant expressions (``1 + exp(-2)``).  Lines starting with
``#`` are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from . import expr as ex
from .classify import OdeProblem
from .solvers import Solution

PARAMS = ("m", "n", "r", "beta")
_KNOWN = {"id", "title", "note", "alpha", "rhs", "M", "N", "ic", "window", "terminal", "family", "expected"} | set(PARAMS)
_CONSTANT_NAMES = ("C", "A")


class ProblemFileError(ValueError):
    """Malformed problem file (unknown key, bad value, inconsistent form)."""


@dataclass(frozen=True)
class ProblemFile:
    entries: dict
    path: str | None = None
    variants: dict = field(default_factory=dict)

    @property
    def id(self) -> str:
        if "id" in self.entries:
            return self.entries["id"]
        return Path(self.path).stem if self.path else "problem"

    @property
    def family(self) -> str | None:
        return self.entries.get("family")

    @property
    def alpha(self) -> float:
        return self._number(self.entries["alpha"], {})

    def constants(self, alpha: float | None = None) -> dict:
        alpha = self.alpha if alpha is None else float(alpha)
        consts = {"alpha": alpha}
        for p in PARAMS:
            if p in self.entries:
                consts[p] = self._number(self.entries[p], consts)
        return consts

    @property
    def params(self) -> dict:
        c = self.constants()
        return {k: v for k, v in c.items() if k != "alpha"}

    def _number(self, text: str, consts: dict) -> float:
        try:
            return ex.evaluate(ex.parse(text, variables=(), constants=consts), {})
        except ex.ExprError as exc:
            raise ProblemFileError(f"bad number {text!r}: {exc}") from exc

    def _pair(self, key: str, consts: dict) -> tuple[float, float] | None:
        if key not in self.entries:
            return None
        parts = _split_top_level(self.entries[key])
        if len(parts) != 2:
            raise ProblemFileError(f"{key} needs two comma-separated values")
        return tuple(self._number(p, consts) for p in parts)

    def ic(self, alpha: float | None = None):
        return self._pair("ic", self.constants(alpha))

    def window(self, alpha: float | None = None):
        w = self._pair("window", self.constants(alpha))
        if w is not None and not w[0] < w[1]:
            raise ProblemFileError("window must satisfy lo < hi")
        return w

    def problem(self, alpha: float | None = None) -> OdeProblem:
        consts = self.constants(alpha)
        terminal = self._number(self.entries.get("terminal", "0"), consts)
        ic = self._pair("ic", consts)

        def expr_of(key):
            try:
                return ex.parse(self.entries[key], constants=consts)
            except ex.ParseError:
                raise
            except ex.ExprError as exc:
                raise ProblemFileError(f"{key}: {exc}") from exc

        try:
            if "rhs" in self.entries:
                if "M" in self.entries or "N" in self.entries:
                    raise ProblemFileError("give either rhs or M and N")
                return OdeProblem(consts["alpha"], rhs=expr_of("rhs"), ic=ic, terminal=terminal)
            if "M" in self.entries and "N" in self.entries:
                return OdeProblem(consts["alpha"], M=expr_of("M"), N=expr_of("N"), ic=ic, terminal=terminal)
        except ProblemFileError:
            raise
        except ValueError as exc:
            if isinstance(exc, ex.ParseError):
                raise
            raise ProblemFileError(str(exc)) from exc
        raise ProblemFileError("problem needs rhs, or both M and N")

    def expected_forms(self, alpha: float | None = None) -> dict[str, Solution]:
        """Closed forms to check: ``expected`` (named ``"expected"``) and every ``variant.<name>``."""
        consts = self.constants(alpha)
        out = {}
        if "expected" in self.entries:
            out["expected"] = parse_equation(self.entries["expected"], consts)
        for name, text in self.variants.items():
            out[name] = parse_equation(text, consts)
        return out


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return parts


_LINE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_.]*)\s*=\s*(.*?)\s*$")


def loads(text: str, path: str | None = None) -> ProblemFile:
    entries: dict = {}
    variants: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise ProblemFileError(f"line {lineno}: expected 'key = value'")
        key, value = m.groups()
        if key.startswith("variant."):
            variants[key[len("variant."):]] = value
            continue
        if key not in _KNOWN:
            raise ProblemFileError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ProblemFileError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    if "alpha" not in entries:
        raise ProblemFileError("missing alpha")
    pf = ProblemFile(entries, path, variants)
    pf.problem()  # validate eagerly
    return pf


def load(path) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    return loads(text, str(path))


def dumps(pf: ProblemFile) -> str:
    order = ["id", "title", "alpha", *PARAMS, "terminal", "rhs", "M", "N", "ic", "window", "family", "expected", "note"]
    lines = [f"{k} = {pf.entries[k]}" for k in order if k in pf.entries]
    lines += [f"variant.{k} = {v}" for k, v in pf.variants.items()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def parse_equation(text: str, constants: dict | None = None) -> Solution:
    """A closed-form solution family written as an equation.

    * ``y = E(x, K)`` -- explicit, ``K`` is ``C`` or ``A``;
    * ``L(x, y) = K`` -- implicit relation with the constant isolated;
    * ``L(x, y, K) = R(x, y, K)`` -- any other equation; the constant is then
      found by root finding.
    """
    if text.count("=") != 1:
        raise ProblemFileError(f"closed form needs exactly one '=': {text!r}")
    left, right = (s.strip() for s in text.split("="))
    names = ("x", "y") + _CONSTANT_NAMES
    try:
        L = ex.parse(left, variables=names, constants=constants)
        R = ex.parse(right, variables=names, constants=constants)
    except ex.ExprError as exc:
        raise ProblemFileError(f"closed form {text!r}: {exc}") from exc
    used = set(L.variables | R.variables) & set(_CONSTANT_NAMES)
    if len(used) > 1:
        raise ProblemFileError("use a single constant symbol")
    K = next(iter(used)) if used else "C"
    alpha = (constants or {}).get("alpha", 1.0)
    if L == ex.Y and "y" not in R.variables:
        return Solution("closed-form", "explicit", alpha, explicit=R, constant=K, display=text)
    if isinstance(R, ex.Var) and R.name == K and K not in L.variables:
        return Solution("closed-form", "implicit", alpha, relation=L, constant=K, display=text)
    return Solution("closed-form", "implicit", alpha, equation=ex.simplify(ex.sub(L, R)), constant=K, display=text)
