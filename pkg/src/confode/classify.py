"""Recognise which solvable family a conformable ODE belongs to.

Problems are ``M(x,y) dx^(alpha) + N(x,y) dy = 0`` or the explicit
``dy/dx^(alpha) = f(x, y)`` (equivalently ``M = -f, N = 1``).  Matching is
structural where the tree makes it easy (powers of ``y`` for linear and
Bernoulli equations, factorisation for separable ones) and numeric otherwise
(homogeneity degrees are fitted from ``M(lx, ly)/M(x, y)``).  Every match is
confirmed by rebuilding the slope from the extracted parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _terms
from . import expr as ex
from .confcalc import check_alpha, conf_derivative_expr

X, Y = ex.X, ex.Y
U = ex.Var("u")
Z = ex.Var("z")


# ---------------------------------------------------------------------------
# problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OdeProblem:
    """``M dx^(alpha) + N dy = 0`` or ``dy/dx^(alpha) = rhs``.

    ``terminal`` is the lower terminal ``a`` of the derivative
    ``(x - a)^(1-alpha) d/dx``; it is 0 except for equations written around a
    shifted centre.
    """

    alpha: float
    M: ex.Expr | None = None
    N: ex.Expr | None = None
    rhs: ex.Expr | None = None
    ic: tuple | None = None
    terminal: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        has_pair = self.M is not None or self.N is not None
        if has_pair == (self.rhs is not None):
            raise ValueError("give either M and N or rhs, not both")
        if has_pair and (self.M is None or self.N is None):
            raise ValueError("differential form needs both M and N")
        for e in (self.M, self.N, self.rhs):
            if e is not None and e.variables - {"x", "y"}:
                raise ValueError(f"unexpected variables {sorted(e.variables - {'x', 'y'})}")
        if self.ic is not None:
            x0, y0 = (float(v) for v in self.ic)
            if x0 <= self.terminal:
                raise ValueError("initial abscissa must be positive")
            object.__setattr__(self, "ic", (x0, y0))

    @classmethod
    def explicit(cls, rhs, alpha, ic=None, terminal=0.0):
        rhs = ex.parse(rhs) if isinstance(rhs, str) else rhs
        return cls(alpha, rhs=rhs, ic=ic, terminal=terminal)

    @classmethod
    def differential(cls, M, N, alpha, ic=None, terminal=0.0):
        M = ex.parse(M) if isinstance(M, str) else M
        N = ex.parse(N) if isinstance(N, str) else N
        return cls(alpha, M=M, N=N, ic=ic, terminal=terminal)

    @property
    def is_explicit(self) -> bool:
        return self.rhs is not None

    @property
    def slope(self) -> ex.Expr:
        """``f`` in ``dy/dx^(alpha) = f(x, y)``."""
        if self.rhs is not None:
            return self.rhs
        return ex.neg(ex.div(self.M, self.N))

    @property
    def pair(self) -> tuple[ex.Expr, ex.Expr]:
        if self.rhs is not None:
            return ex.neg(self.rhs), ex.ONE
        return self.M, self.N

    def with_alpha(self, alpha: float) -> "OdeProblem":
        return OdeProblem(alpha, self.M, self.N, self.rhs, self.ic, self.terminal)

    def with_ic(self, ic) -> "OdeProblem":
        return OdeProblem(self.alpha, self.M, self.N, self.rhs, ic, self.terminal)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def _xw(alpha: float, centre: float = 0.0) -> ex.Expr:
    base = X if centre == 0.0 else ex.sub(X, ex.Const(centre))
    return ex.ONE if alpha == 1.0 else ex.Pow(base, ex.Const(1.0 - alpha))


@dataclass(frozen=True)
class OdeClass:
    tag = "none"
    label = "none"

    def slope(self, alpha: float) -> ex.Expr:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class Separable(OdeClass):
    """``x^(1-alpha) F(x) dx^(alpha) + G(y) dy = 0``."""

    F: ex.Expr
    G: ex.Expr
    trivial_substitution: bool = False
    tag = "separable"
    label = "separable"

    def slope(self, alpha):
        return ex.neg(ex.div(ex.mul(_xw(alpha), self.F), self.G))


@dataclass(frozen=True)
class Substitution(OdeClass):
    """``dy/dx^(alpha) = f(a x^alpha + b y + c)`` with ``f`` a function of ``z``."""

    a: float
    b: float
    c: float
    f: ex.Expr
    tag = "substitution"
    label = "substitution"

    def z_expr(self, alpha):
        return ex.simplify(self.a * ex.Pow(X, ex.Const(alpha)) + self.b * Y + self.c)

    def slope(self, alpha):
        return ex.substitute(self.f, {"z": self.z_expr(alpha)})


@dataclass(frozen=True)
class Homogeneous(OdeClass):
    """``M`` homogeneous of degree ``n+1-alpha`` and ``N`` of degree ``n``.

    ``F(u) = M(1, u)`` and ``G(u) = N(1, u)``."""

    n: float
    F: ex.Expr
    G: ex.Expr
    M: ex.Expr = field(repr=False, default=None)
    N: ex.Expr = field(repr=False, default=None)
    tag = "homogeneous"

    @property
    def label(self):
        return f"({ex.format_number(self.n)},α)-homogeneous"

    def slope(self, alpha):
        u = ex.div(Y, X)
        F = ex.substitute(self.F, {"u": u})
        G = ex.substitute(self.G, {"u": u})
        return ex.neg(ex.mul(_xw(alpha), ex.div(F, G)))


@dataclass(frozen=True)
class PsiForm(OdeClass):
    """``dy/dx^(alpha) = x^(1-alpha) psi(y/x)``."""

    psi: ex.Expr
    tag = "psi"
    label = "psi-form"

    def slope(self, alpha):
        return ex.mul(_xw(alpha), ex.substitute(self.psi, {"u": ex.div(Y, X)}))


@dataclass(frozen=True)
class ShiftedHomogeneous(OdeClass):
    """``(x-h)^(1-alpha)(a1 x + b1 y + c1) dx^(alpha) + (a2 x + b2 y + c2) dy = 0``
    with ``(h, k)`` the intersection of the two lines."""

    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float
    h: float
    k: float
    scale: float = 1.0
    tag = "shifted"
    label = "shifted-homogeneous"

    def lines(self):
        L1 = ex.simplify(self.a1 * X + self.b1 * Y + self.c1)
        L2 = ex.simplify(self.a2 * X + self.b2 * Y + self.c2)
        return L1, L2

    def slope(self, alpha):
        L1, L2 = self.lines()
        return ex.neg(ex.mul(ex.Const(self.scale), ex.mul(_xw(alpha, self.h), ex.div(L1, L2))))


@dataclass(frozen=True)
class Linear(OdeClass):
    """``dy/dx^(alpha) + P(x) y = Q(x)``."""

    P: ex.Expr
    Q: ex.Expr
    tag = "linear"
    label = "linear"

    def slope(self, alpha):
        return ex.add(ex.neg(ex.mul(self.P, Y)), self.Q)


@dataclass(frozen=True)
class Bernoulli(OdeClass):
    """``dy/dx^(alpha) + P(x) y = Q(x) y^n`` with ``n != 1``."""

    P: ex.Expr
    Q: ex.Expr
    n: float
    tag = "bernoulli"
    label = "bernoulli"

    def slope(self, alpha):
        return ex.add(ex.neg(ex.mul(self.P, Y)), ex.mul(self.Q, ex.Pow(Y, ex.Const(self.n))))


@dataclass(frozen=True)
class Exact(OdeClass):
    M: ex.Expr
    N: ex.Expr
    tag = "exact"
    label = "exact"

    def slope(self, alpha):
        return ex.neg(ex.div(self.M, self.N))


PRIORITY = ("linear", "bernoulli", "separable", "substitution", "homogeneous", "psi", "shifted", "exact")


@dataclass(frozen=True)
class ClassifierConfig:
    lambda_probes: tuple = (0.5, 2.0, 3.0)
    point_probes: int = 25
    match_tol: float = 1e-7
    probe_min: float = 0.1
    probe_max: float = 3.0
    seed: int = 20240101

    def __post_init__(self):
        if any(l <= 0 or l == 1.0 for l in self.lambda_probes):
            raise ValueError("lambda probes must be positive and differ from 1")
        if self.point_probes < 5 or self.match_tol <= 0 or self.probe_min <= 0:
            raise ValueError("invalid classifier configuration")

    def points(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.probe_min, self.probe_max, size=(self.point_probes, 2))


DEFAULT_CLASSIFIER = ClassifierConfig()


# ---------------------------------------------------------------------------
# numeric helpers
# ---------------------------------------------------------------------------


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _values(e: ex.Expr, pts):
    fn = ex.lambdify(e, ("x", "y"))
    out = []
    for x, y in pts:
        try:
            out.append(fn(x, y))
        except ex.DomainError:
            out.append(None)
    return out


def reconstructs(original: ex.Expr, rebuilt: ex.Expr, cfg: ClassifierConfig = DEFAULT_CLASSIFIER, tol: float = 1e-8) -> bool:
    """Pointwise agreement of two slopes on the probe grid."""
    pts = cfg.points()
    a = _values(original, pts)
    b = _values(rebuilt, pts)
    good = 0
    for va, vb in zip(a, b):
        if va is None or vb is None:
            if (va is None) != (vb is None):
                return False
            continue
        if not _close(va, vb, tol):
            return False
        good += 1
    return good >= 5


# ---------------------------------------------------------------------------
# powers of y: linear and Bernoulli
# ---------------------------------------------------------------------------


class _NoSplit(Exception):
    pass


def split_powers(e: ex.Expr, var: str = "y") -> dict[float, ex.Expr]:
    """Write ``e`` as ``sum_k c_k * var^k`` with ``c_k`` free of ``var``."""

    def merge(a, b, sign=1.0):
        out = dict(a)
        for k, c in b.items():
            c = c if sign > 0 else ex.neg(c)
            out[k] = ex.add(out[k], c) if k in out else c
        return out

    def go(node) -> dict:
        if var not in node.variables:
            return {0.0: node}
        if isinstance(node, ex.Var):
            return {1.0: ex.ONE}
        if isinstance(node, ex.Add):
            return merge(go(node.left), go(node.right))
        if isinstance(node, ex.Neg):
            return {k: ex.neg(c) for k, c in go(node.arg).items()}
        if isinstance(node, ex.Mul):
            a, b = go(node.left), go(node.right)
            out: dict = {}
            for ka, ca in a.items():
                for kb, cb in b.items():
                    out = merge(out, {_terms._key(ka + kb): ex.mul(ca, cb)})
            return out
        if isinstance(node, ex.Div):
            den = go(node.right)
            if len(den) != 1:
                raise _NoSplit
            (kd, cd), = den.items()
            return {_terms._key(k - kd): ex.div(c, cd) for k, c in go(node.left).items()}
        if isinstance(node, ex.Pow):
            if var in node.exponent.variables:
                raise _NoSplit
            if node.exponent.variables:
                raise _NoSplit
            k = ex.evaluate(node.exponent, {})
            base = go(node.base)
            if len(base) == 1:
                (kb, cb), = base.items()
                return {_terms._key(kb * k): ex.power(cb, ex.Const(k))}
            if float(k).is_integer() and 0 <= k <= 6:
                out = {0.0: ex.ONE}
                for _ in range(int(k)):
                    prod: dict = {}
                    for ka, ca in out.items():
                        for kb, cb in base.items():
                            prod = merge(prod, {_terms._key(ka + kb): ex.mul(ca, cb)})
                    out = prod
                return out
        raise _NoSplit

    try:
        parts = go(e)
    except _NoSplit:
        return {}
    return {k: ex.simplify(c) for k, c in parts.items()}


def _is_zero_fn(e: ex.Expr, xs=(0.3, 0.7, 1.1, 1.9, 2.6)) -> bool:
    if isinstance(e, ex.Const):
        return e.value == 0.0
    fn = ex.lambdify(e, ("x",)) if e.variables <= {"x"} else None
    if fn is None:
        return False
    try:
        return all(abs(fn(x)) < 1e-14 for x in xs)
    except ex.DomainError:
        return False


def _nonzero_keys(parts: dict) -> dict:
    return {k: c for k, c in parts.items() if not _is_zero_fn(c)}


def match_linear(f: ex.Expr) -> Linear | None:
    parts = _nonzero_keys(split_powers(f))
    if not parts or not set(parts) <= {0.0, 1.0} or 1.0 not in parts:
        return None
    if any(c.variables - {"x"} for c in parts.values()):
        return None
    P = ex.simplify(ex.neg(parts[1.0]))
    Q = parts.get(0.0, ex.ZERO)
    return Linear(P, Q)


def match_bernoulli(f: ex.Expr) -> Bernoulli | None:
    parts = _nonzero_keys(split_powers(f))
    keys = set(parts)
    if 1.0 not in keys or len(keys) != 2 or 0.0 in keys:
        return None
    if any(c.variables - {"x"} for c in parts.values()):
        return None
    (n,) = keys - {1.0}
    return Bernoulli(ex.simplify(ex.neg(parts[1.0])), parts[n], n)


# ---------------------------------------------------------------------------
# separable
# ---------------------------------------------------------------------------


def match_separable(f: ex.Expr, alpha: float, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> Separable | None:
    """``f = A(x) B(y)`` gives ``F = -x^(alpha-1) A`` and ``G = 1/B``."""
    if not f.variables:
        A, B = f, ex.ONE
    else:
        split = _split_factors(f)
        if split is None:
            split = _split_numeric(f, cfg)
        if split is None:
            return None
        A, B = split
    F = ex.tidy_product(ex.neg(A) if alpha == 1.0 else ex.neg(ex.mul(ex.Pow(X, ex.Const(alpha - 1.0)), A)))
    G = ex.tidy_product(ex.div(ex.ONE, B))
    return Separable(F, G)


def _split_factors(f: ex.Expr):
    try:
        coef, num, den = ex.flatten_product(f)
    except ZeroDivisionError:
        return None
    xs_num, ys_num, xs_den, ys_den = [], [], [], []
    for fac, xs, ys in ((num, xs_num, ys_num), (den, xs_den, ys_den)):
        for e in fac:
            if e.variables == {"x", "y"}:
                return None
            (ys if "y" in e.variables else xs).append(e)
    A = ex.mul(ex.Const(coef), ex.div(ex.product(xs_num), ex.product(xs_den)))
    B = ex.div(ex.product(ys_num), ex.product(ys_den))
    return ex.simplify(A), ex.simplify(B)


def _split_numeric(f: ex.Expr, cfg: ClassifierConfig):
    pts = cfg.points()
    fn = ex.lambdify(f, ("x", "y"))
    anchor = None
    for x, y in pts:
        try:
            v = fn(x, y)
        except ex.DomainError:
            continue
        if abs(v) > 1e-6:
            anchor = (x, y, v)
            break
    if anchor is None:
        return None
    xa, ya, va = anchor
    checked = 0
    for x, y in pts:
        try:
            lhs = fn(x, y) * va
            rhs = fn(x, ya) * fn(xa, y)
        except ex.DomainError:
            continue
        if not _close(lhs, rhs, cfg.match_tol):
            return None
        checked += 1
    if checked < 5:
        return None
    A = ex.substitute(f, {"y": ya})
    B = ex.div(ex.substitute(f, {"x": xa}), ex.Const(va))
    return A, B


# ---------------------------------------------------------------------------
# substitution z = a x^alpha + b y + c
# ---------------------------------------------------------------------------


def _affine_fit(e: ex.Expr, basis, cfg: ClassifierConfig):
    """Fit ``e = sum_i w_i basis_i(x, y) + c`` on the probe grid."""
    pts = cfg.points()
    fn = ex.lambdify(e, ("x", "y"))
    rows, vals = [], []
    for x, y in pts:
        try:
            v = fn(x, y)
        except ex.DomainError:
            continue
        rows.append([b(x, y) for b in basis] + [1.0])
        vals.append(v)
    if len(vals) < len(basis) + 3:
        return None
    A, b = np.array(rows), np.array(vals)
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    if not np.all(np.abs(A @ w - b) <= cfg.match_tol * np.maximum(1.0, np.abs(b))):
        return None
    return [_terms.snap(float(v)) if abs(v) > 1e-13 else 0.0 for v in w]


def _subtrees(e: ex.Expr):
    yield e
    for c in e.children:
        yield from _subtrees(c)


def match_substitution(f: ex.Expr, alpha: float, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> Substitution | None:
    if "x" not in f.variables:
        return Substitution(0.0, 1.0, 0.0, ex.substitute(f, {"y": Z}))
    if "y" not in f.variables:
        return None
    basis = (lambda x, y: x**alpha, lambda x, y: y)
    for sub in _subtrees(f):
        if sub.variables != {"x", "y"}:
            continue
        fit = _affine_fit(sub, basis, cfg)
        if fit is None:
            continue
        a, b, c = fit
        if b == 0.0:
            continue
        g = ex.replace_subtree(f, sub, Z)
        if g.variables & {"x", "y"}:
            continue
        cand = Substitution(a, b, c, ex.simplify(g))
        if reconstructs(f, cand.slope(alpha), cfg):
            return cand
    return _substitution_numeric(f, alpha, cfg)


def _substitution_numeric(f: ex.Expr, alpha: float, cfg: ClassifierConfig) -> Substitution | None:
    fx = ex.lambdify(ex.diff(f, "x"), ("x", "y"))
    fy = ex.lambdify(ex.diff(f, "y"), ("x", "y"))
    ratios = []
    for x, y in cfg.points():
        try:
            gx, gy = fx(x, y), fy(x, y)
        except ex.DomainError:
            continue
        if abs(gy) < 1e-8:
            continue
        ratios.append(gx / gy * x ** (1.0 - alpha) / alpha)
    if len(ratios) < 5:
        return None
    a = ratios[0]
    if not all(_close(r, a, cfg.match_tol) for r in ratios):
        return None
    a = _terms.snap(a)
    # f(z) = f(x=1, y=z-a)
    g = ex.substitute(f, {"x": ex.ONE, "y": ex.sub(Z, ex.Const(a))})
    cand = Substitution(a, 1.0, 0.0, g)
    return cand if reconstructs(f, cand.slope(alpha), cfg) else None


# ---------------------------------------------------------------------------
# homogeneity
# ---------------------------------------------------------------------------


def homogeneity_degree(e: ex.Expr, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> float | None:
    """Degree ``d`` with ``e(lx, ly) = l^d e(x, y)``, or ``None``.

    ``nan`` is returned for an identically vanishing ``e`` (any degree)."""
    fn = ex.lambdify(e, ("x", "y"))
    degrees = []
    zeros = 0
    for x, y in cfg.points():
        try:
            base = fn(x, y)
        except ex.DomainError:
            continue
        if abs(base) < 1e-12:
            zeros += 1
            continue
        for lam in cfg.lambda_probes:
            try:
                scaled = fn(lam * x, lam * y)
            except ex.DomainError:
                continue
            ratio = scaled / base
            if ratio <= 0:
                return None
            degrees.append(math.log(ratio) / math.log(lam))
    if not degrees:
        return math.nan if zeros >= 5 else None
    d = degrees[0]
    if not all(abs(di - d) <= cfg.match_tol * max(1.0, abs(d)) for di in degrees):
        return None
    return _terms.snap(float(np.mean(degrees)))


def match_homogeneous(M: ex.Expr, N: ex.Expr, alpha: float, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> Homogeneous | None:
    dM = homogeneity_degree(M, cfg)
    dN = homogeneity_degree(N, cfg)
    if dM is None or dN is None or (math.isnan(dM) and math.isnan(dN)):
        return None
    if math.isnan(dN):
        return None
    n = dN
    if not math.isnan(dM) and abs(dM - (n + 1.0 - alpha)) > cfg.match_tol * max(1.0, abs(dM)):
        return None
    F = ex.substitute(M, {"x": ex.ONE, "y": U})
    G = ex.substitute(N, {"x": ex.ONE, "y": U})
    return Homogeneous(n, F, G, M, N)


def match_psi(f: ex.Expr, alpha: float, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> PsiForm | None:
    weighted = ex.mul(ex.Pow(X, ex.Const(alpha - 1.0)), f) if alpha != 1.0 else f
    d = homogeneity_degree(weighted, cfg)
    if d is None or (not math.isnan(d) and abs(d) > cfg.match_tol):
        return None
    psi = ex.substitute(f, {"x": ex.ONE, "y": U})
    cand = PsiForm(psi)
    return cand if reconstructs(f, cand.slope(alpha), cfg) else None


# ---------------------------------------------------------------------------
# shifted homogeneous
# ---------------------------------------------------------------------------


def _line_coefficients(e: ex.Expr, cfg: ClassifierConfig):
    fit = _affine_fit(e, (lambda x, y: x, lambda x, y: y), cfg)
    if fit is None:
        return None
    a, b, c = fit
    if a == 0.0 and b == 0.0:
        return None
    return a, b, c


def match_shifted(M: ex.Expr, N: ex.Expr, alpha: float, terminal: float = 0.0,
                  cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> ShiftedHomogeneous | None:
    """Detect ``M = s (x-h)^(1-alpha) L1``, ``N = L2`` with lines through ``(h, k)``.

    The reduction to a homogeneous equation needs the derivative to be
    centred at ``h``: the problem's terminal must equal ``h`` unless
    ``alpha = 1`` or ``h = 0``.
    """
    try:
        cM, numM, denM = ex.flatten_product(M)
        cN, numN, denN = ex.flatten_product(N)
    except ZeroDivisionError:
        return None
    # move N's denominator and M's denominator into a common ratio M/N
    num = numM + denN
    den = denM + numN
    scale = cM / cN
    weight_h = None
    lines_num, lines_den = [], []
    for fac in num:
        if isinstance(fac, ex.Pow) and not fac.exponent.variables and fac.base.variables == {"x"}:
            p = ex.evaluate(fac.exponent, {})
            coeffs = _line_coefficients(fac.base, cfg)
            if coeffs and abs(p - (1.0 - alpha)) < 1e-12 and coeffs[1] == 0.0 and weight_h is None:
                a, _, c = coeffs
                scale *= a**p
                weight_h = -c / a
                continue
        lines_num.append(fac)
    lines_den = list(den)
    if len(lines_num) != 1 or len(lines_den) != 1:
        return None
    l1 = _line_coefficients(lines_num[0], cfg)
    l2 = _line_coefficients(lines_den[0], cfg)
    if l1 is None or l2 is None:
        return None
    a1, b1, c1 = l1
    a2, b2, c2 = l2
    det = a1 * b2 - a2 * b1
    if abs(det) < 1e-12:
        return None
    h = _terms.snap((-c1 * b2 + c2 * b1) / det)
    k = _terms.snap((-a1 * c2 + a2 * c1) / det)
    if alpha != 1.0:
        if weight_h is None:
            weight_h = 0.0 if alpha == 1.0 else None
        if weight_h is None or abs(weight_h - h) > 1e-9 * max(1.0, abs(h)):
            return None
        if abs(h - terminal) > 1e-12 and h != 0.0:
            return None
        if h == 0.0 and terminal != 0.0:
            return None
    cand = ShiftedHomogeneous(a1, b1, c1, a2, b2, c2, h, k, _terms.snap(scale))
    return cand


# ---------------------------------------------------------------------------
# exactness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactnessWitness:
    exact: bool
    max_deviation: float
    location: tuple
    checked: int

    def __bool__(self):
        return self.exact


def check_exactness(M: ex.Expr, N: ex.Expr, alpha: float, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> ExactnessWitness:
    """Compare ``dM/dy`` with ``x^(1-alpha) dN/dx`` on the probe grid."""
    alpha = check_alpha(alpha)
    lhs = ex.lambdify(ex.diff(M, "y"), ("x", "y"))
    rhs = ex.lambdify(conf_derivative_expr(N, alpha, "x"), ("x", "y"))
    worst, where, checked = 0.0, (math.nan, math.nan), 0
    for x, y in cfg.points():
        try:
            a, b = lhs(x, y), rhs(x, y)
        except ex.DomainError as exc:
            raise ex.DomainError(f"exactness probe failed at ({x}, {y}): {exc}") from None
        dev = abs(a - b) / max(1.0, abs(a), abs(b))
        checked += 1
        if dev >= worst:
            worst, where = dev, (float(x), float(y))
    return ExactnessWitness(worst <= cfg.match_tol, worst, where, checked)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def classify(p: OdeProblem, cfg: ClassifierConfig = DEFAULT_CLASSIFIER) -> list[OdeClass]:
    """All matching families in priority order (linear first, exact last)."""
    alpha = p.alpha
    f = ex.simplify(p.slope)
    M, N = (ex.simplify(e) for e in p.pair)
    if _is_identically_zero(M, cfg) and _is_identically_zero(N, cfg):
        raise ValueError("M and N are both identically zero")
    found: list[OdeClass] = []

    def keep(cand):
        if cand is not None and reconstructs(f, cand.slope(alpha), cfg):
            found.append(cand)

    centred = p.terminal == 0.0 or alpha == 1.0
    if centred:
        lin = match_linear(f)
        # dy/dx^a = Q(x) alone is pure integration, reported as separable
        if lin is not None and not _is_zero_fn(lin.P):
            keep(lin)
        keep(match_bernoulli(f) if _has_both(f) else None)
        sep = match_separable(f, alpha, cfg)
        if sep is not None and not f.variables:
            sep = Separable(sep.F, sep.G, trivial_substitution=True)
        keep(sep)
        sub = match_substitution(f, alpha, cfg)
        # a = 0 means f depends on y alone: already covered by separable
        keep(sub if sub is not None and sub.a != 0.0 else None)
        keep(match_homogeneous(M, N, alpha, cfg))
        keep(match_psi(f, alpha, cfg))
    keep(match_shifted(M, N, alpha, p.terminal, cfg))
    if centred:
        try:
            if check_exactness(M, N, alpha, cfg):
                found.append(Exact(M, N))
        except ex.DomainError:
            pass
    order = {t: i for i, t in enumerate(PRIORITY)}
    found.sort(key=lambda c: order[c.tag])
    return found


def _has_both(f: ex.Expr) -> bool:
    parts = _nonzero_keys(split_powers(f))
    return 1.0 in parts and len(parts) == 2


def _is_identically_zero(e: ex.Expr, cfg: ClassifierConfig) -> bool:
    if isinstance(e, ex.Const):
        return e.value == 0.0
    vals = [v for v in _values(e, cfg.points()) if v is not None]
    return bool(vals) and all(v == 0.0 for v in vals)


def describe(classes: list[OdeClass]) -> str:
    """Human-readable, ``; ``-separated family list."""
    labels = []
    for c in classes:
        if isinstance(c, Separable) and c.trivial_substitution:
            labels.append("separable (substitution trivial)")
        else:
            labels.append(c.label)
    return "; ".join(labels)
