"""Checking solutions: residuals, constants from initial conditions and
comparison with the numerical oracle, plus the fixture suite.

All three metrics are relative to ``max(1, |value|)``:

* residual -- ``|(x-a)^(1-alpha) y' - f(x, y)|`` along the solution, with
  ``y'`` from the explicit formula or by implicit differentiation of the
  relation along its tracked curve;
* constant drift -- how far the relation's constant moves along the oracle
  trajectory;
* oracle gap -- ``|y_solution - y_oracle|`` on the oracle's sample grid.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import optimize

from . import classify as cl
from . import expr as ex
from . import problemfile as pfile
from . import solvers as sv
from .ivp import IntegrationError, IvpSpec, Trajectory, implicit_track, ivp_solve


class FitError(ValueError):
    """No real constant puts the initial condition on the solution family."""


@dataclass(frozen=True)
class VerifyConfig:
    residual_tol: float = 1e-6
    drift_tol: float = 1e-6
    gap_tol: float = 1e-5
    samples: int = 20
    dense_points: int = 200
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11


DEFAULT_VERIFY = VerifyConfig()


@dataclass(frozen=True)
class VerifyReport:
    max_residual: float
    residual_points: tuple
    constant_drift: float
    oracle_max_gap: float
    passed: bool
    constant: float | None = None
    window: tuple | None = None
    notes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        for name in ("max_residual", "constant_drift", "oracle_max_gap"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["residual_points"] = [list(p) for p in self.residual_points]
        d["window"] = list(self.window) if self.window else None
        d["notes"] = list(self.notes)
        return d


def _scale(v: float) -> float:
    return max(1.0, abs(v))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def _solve_constant(fn, guess: float = 1.0) -> float:
    """Root of ``K -> fn(K)``: linear shortcut, then Newton, then a bracket scan."""
    try:
        f0, f1, f2 = fn(0.0), fn(1.0), fn(2.0)
        if abs((f2 - f1) - (f1 - f0)) <= 1e-12 * max(1.0, abs(f0), abs(f1), abs(f2)) and f1 != f0:
            k = -f0 / (f1 - f0)
            if abs(fn(k)) <= 1e-10 * max(1.0, abs(f0)):
                return k
    except (ex.DomainError, OverflowError, ZeroDivisionError):
        pass
    for start in (guess, 1.0, -1.0, 0.5, 2.0, 10.0, -10.0):
        try:
            k = optimize.newton(fn, start, tol=1e-14, maxiter=100)
            if math.isfinite(k) and abs(fn(k)) <= 1e-10:
                return float(k)
        except (RuntimeError, ex.DomainError, OverflowError, ZeroDivisionError, ValueError):
            continue
    grid = np.concatenate([-np.logspace(3, -3, 40), np.logspace(-3, 3, 40)])
    prev = None
    for k in grid:
        try:
            v = fn(float(k))
        except (ex.DomainError, OverflowError, ZeroDivisionError):
            prev = None
            continue
        if prev is not None and np.sign(v) != np.sign(prev[1]):
            return float(optimize.brentq(fn, prev[0], float(k), xtol=1e-15))
        prev = (float(k), v)
    raise FitError("no real constant satisfies the initial condition")


def fit_constant(sol: sv.Solution, ic: tuple[float, float]) -> float:
    """Constant ``C`` with the solution family passing through ``ic``."""
    x0, y0 = (float(v) for v in ic)
    if sol.has_relation:
        try:
            C = sol.g(x0, y0)
        except (ex.DomainError, ValueError, OverflowError) as exc:
            raise FitError(f"relation undefined at the initial point: {exc}") from None
        if not math.isfinite(C):
            raise FitError("relation undefined at the initial point")
        if sol.explicit is not None:
            y_fit = sol.y(x0, C)
            if abs(y_fit - y0) > 1e-10 * _scale(y0):
                # relation and explicit branch disagree; trust the explicit form
                C = _solve_constant(lambda K: sol.y(x0, K) - y0, C)
        return C
    if sol.equation is not None:
        fn = ex.lambdify(sol.equation, ("x", "y", sol.constant))
        return _solve_constant(lambda K: fn(x0, y0, K))
    if sol.explicit is not None:
        return _solve_constant(lambda K: sol.y(x0, K) - y0)
    raise FitError("solution has neither a relation nor an explicit form")


def constant_at(sol: sv.Solution, x: float, y: float, guess: float | None = None) -> float:
    """The family's constant for the member through ``(x, y)``."""
    if sol.has_relation:
        return sol.g(x, y)
    return fit_constant(replace(sol, constant_value=guess), (x, y)) if guess is None else _constant_near(sol, x, y, guess)


def _constant_near(sol, x, y, guess):
    if sol.equation is not None:
        fn = ex.lambdify(sol.equation, ("x", "y", sol.constant))
        return _solve_constant(lambda K: fn(x, y, K), guess)
    return _solve_constant(lambda K: sol.y(x, K) - y, guess)


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


def _legs(x0: float, window: tuple[float, float]):
    lo, hi = window
    if not lo <= x0 <= hi:
        raise ValueError(f"initial abscissa {x0} outside the window [{lo}, {hi}]")
    legs = []
    if x0 > lo:
        legs.append(lo)
    if x0 < hi:
        legs.append(hi)
    return legs


def _points_per_leg(x0, end, window, dense_points):
    frac = abs(end - x0) / (window[1] - window[0])
    return max(2, int(round(dense_points * frac)))


def _merge(pieces: list[Trajectory]) -> tuple[np.ndarray, np.ndarray, list]:
    xs, ys, stops = [], [], []
    for t in pieces:
        xs.append(t.x)
        ys.append(t.y)
        if t.stopped:
            stops.append(t.stopped)
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    keep = np.concatenate([[True], np.diff(x) > 0])
    return x[keep], y[keep], stops


def oracle_curve(problem: cl.OdeProblem, ic, window, cfg: VerifyConfig = DEFAULT_VERIFY):
    x0, y0 = ic
    pieces = []
    for end in _legs(x0, window):
        spec = IvpSpec(problem.slope, problem.alpha, x0, y0, end, cfg.rel_tol, cfg.abs_tol,
                       dense_points=_points_per_leg(x0, end, window, cfg.dense_points), terminal=problem.terminal)
        pieces.append(ivp_solve(spec))
    return _merge(pieces)


def solution_curve(sol: sv.Solution, ic, window, cfg: VerifyConfig = DEFAULT_VERIFY):
    """Samples of the fitted solution on the same grid the oracle uses."""
    x0, y0 = ic
    if sol.explicit is not None and sol.constant_value is not None and sol.equation is None:
        xs_all, ys_all = [], []
        for end in _legs(x0, window):
            grid = np.linspace(x0, end, _points_per_leg(x0, end, window, cfg.dense_points))
            xs, ys = [], []
            for x in grid:
                try:
                    y = sol.y(float(x))
                except (ex.DomainError, OverflowError):
                    break
                if not math.isfinite(y) or abs(y) > 1e8:
                    break
                xs.append(float(x))
                ys.append(y)
            xs_all.append(np.array(xs))
            ys_all.append(np.array(ys))
        pieces = [Trajectory(a, b) for a, b in zip(xs_all, ys_all)]
        return _merge(pieces)
    g, grad, _ = sol.level_set()
    pieces = []
    for end in _legs(x0, window):
        pieces.append(implicit_track(g, grad, x0, y0, end,
                                     _points_per_leg(x0, end, window, cfg.dense_points),
                                     cfg.rel_tol, cfg.abs_tol))
    return _merge(pieces)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def _fitted(problem: cl.OdeProblem, sol: sv.Solution, ic) -> sv.Solution:
    if sol.constant_value is not None:
        return sol
    if ic is None:
        raise FitError("no initial condition to fix the constant")
    return sol.with_constant(fit_constant(sol, ic))


def _slope_residual(problem, x, y, dydx, f) -> float:
    w = 1.0 if problem.alpha == 1.0 else (x - problem.terminal) ** (1.0 - problem.alpha)
    fv = f(x, y)
    return abs(w * dydx - fv) / _scale(fv)


def residual(problem: cl.OdeProblem, sol: sv.Solution, window, samples: int = 20,
             cfg: VerifyConfig = DEFAULT_VERIFY, ic=None) -> VerifyReport:
    """ODE residual along the fitted solution at ``samples`` points of ``window``."""
    ic = ic or problem.ic
    sol = _fitted(problem, sol, ic)
    f = ex.lambdify(problem.slope, ("x", "y"))
    points = []
    notes = []
    if sol.explicit is not None and sol.equation is None:
        yx = sol.explicit_in_x()
        yf = ex.lambdify(yx, ("x",))
        dy = ex.lambdify(ex.diff(yx, "x"), ("x",))
        for x in np.linspace(window[0], window[1], samples):
            x = float(x)
            try:
                y = yf(x)
                r = _slope_residual(problem, x, y, dy(x), f)
            except (ex.DomainError, OverflowError) as exc:
                notes.append(f"solution undefined at x={x:.6g}: {exc}")
                r = math.inf
                y = math.nan
            points.append((x, y, r))
    else:
        xs, ys, stops = solution_curve(sol, ic, window, cfg)
        notes += [f"tracking stopped: {s}" for s in stops]
        _, grad, _ = sol.level_set()
        idx = np.unique(np.linspace(0, len(xs) - 1, samples).round().astype(int))
        for i in idx:
            x, y = float(xs[i]), float(ys[i])
            try:
                gx, gy = grad(x, y)
                r = _slope_residual(problem, x, y, -gx / gy, f)
            except (ex.DomainError, ZeroDivisionError, OverflowError) as exc:
                notes.append(f"residual undefined at x={x:.6g}: {exc}")
                r = math.inf
            points.append((x, y, r))
        if len(xs) and (xs[0] > window[0] + 1e-12 or xs[-1] < window[1] - 1e-12):
            notes.append("curve does not cover the window")
            points.append((math.nan, math.nan, math.inf))
    worst = max((p[2] for p in points), default=math.inf)
    return VerifyReport(worst, tuple(points), math.nan, math.nan, worst <= cfg.residual_tol,
                        sol.constant_value, tuple(window), tuple(notes))


def cross_check(problem: cl.OdeProblem, sol: sv.Solution, ic, window,
                cfg: VerifyConfig = DEFAULT_VERIFY) -> VerifyReport:
    """Fit the constant at ``ic``, integrate the oracle across ``window`` and
    compare curves and constants."""
    sol = _fitted(problem, sol, ic)
    notes = []
    try:
        xo, yo, stops = oracle_curve(problem, ic, window, cfg)
    except (IntegrationError, ex.DomainError) as exc:
        return VerifyReport(math.nan, (), math.inf, math.inf, False, sol.constant_value, tuple(window),
                            (f"oracle failed: {exc}",))
    notes += [f"oracle stopped: {s}" for s in stops]
    C = sol.constant_value
    drift = 0.0
    if sol.has_relation:
        for x, y in zip(xo, yo):
            try:
                drift = max(drift, abs(sol.g(float(x), float(y)) - C) / _scale(C))
            except (ex.DomainError, OverflowError, ValueError):
                drift = math.inf
    else:
        for x, y in zip(xo, yo):
            try:
                Ci = _constant_near(sol, float(x), float(y), C)
                drift = max(drift, abs(Ci - C) / _scale(C))
            except (FitError, ex.DomainError, OverflowError, ValueError):
                drift = math.inf
    xs, ys, sstops = solution_curve(sol, ic, window, cfg)
    notes += [f"solution stopped: {s}" for s in sstops]
    gap = 0.0
    lookup = dict(zip(np.round(xs, 12), ys))
    matched = 0
    for x, y in zip(xo, yo):
        key = round(float(x), 12)
        if key in lookup:
            gap = max(gap, abs(lookup[key] - y) / _scale(y))
            matched += 1
    if matched < len(xo):
        notes.append(f"{len(xo) - matched} oracle samples without a solution value")
        gap = math.inf
    if xo[0] > window[0] + 1e-12 or xo[-1] < window[1] - 1e-12:
        notes.append("oracle does not cover the window")
        gap = math.inf
    ok = drift <= cfg.drift_tol and gap <= cfg.gap_tol
    return VerifyReport(math.nan, (), drift, gap, ok, C, tuple(window), tuple(notes))


def verify(problem: cl.OdeProblem, sol: sv.Solution, window, ic=None, samples: int = 20,
           cfg: VerifyConfig = DEFAULT_VERIFY) -> VerifyReport:
    """Residual and oracle comparison combined into one report."""
    ic = ic or problem.ic
    try:
        sol = _fitted(problem, sol, ic)
    except FitError as exc:
        return VerifyReport(math.inf, (), math.inf, math.inf, False, None, tuple(window), (str(exc),))
    res = residual(problem, sol, window, samples, cfg, ic)
    cc = cross_check(problem, sol, ic, window, cfg)
    ok = res.passed and cc.passed
    return VerifyReport(res.max_residual, res.residual_points, cc.constant_drift, cc.oracle_max_gap, ok,
                        sol.constant_value, tuple(window), res.notes + cc.notes)


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fixture:
    id: str
    file: pfile.ProblemFile
    title: str = ""

    def problem(self, alpha: float | None = None) -> cl.OdeProblem:
        return self.file.problem(alpha)

    def window(self, alpha: float | None = None):
        return self.file.window(alpha)

    @property
    def family(self) -> str:
        return self.file.family

    def expected(self, alpha: float | None = None) -> dict:
        return self.file.expected_forms(alpha)

    @property
    def discrepancy(self) -> bool:
        return bool(self.file.variants)


def fixture_dir() -> Path:
    return Path(str(resources.files("confode") / "problems"))


def load_fixtures() -> list[Fixture]:
    out = []
    for path in sorted(fixture_dir().glob("*.problem"), key=lambda p: _natural_key(p.stem)):
        f = pfile.load(path)
        out.append(Fixture(f.id, f, f.entries.get("title", "")))
    return out


def _natural_key(s: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", s)]


def get_fixture(fid: str) -> Fixture:
    for f in load_fixtures():
        if f.id == fid:
            return f
    raise KeyError(fid)


@dataclass(frozen=True)
class FixtureReport:
    id: str
    family: str
    classes: tuple
    classified: bool
    solution: str
    report: VerifyReport
    variants: dict = field(default_factory=dict)  # name -> passed
    selected: str | None = None
    paths_agree: float | None = None
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        forms_ok = not self.variants or self.selected is not None
        paths_ok = self.paths_agree is None or self.paths_agree <= 1e-9
        return self.classified and self.report.passed and forms_ok and paths_ok

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "family": self.family,
            "classes": list(self.classes),
            "classified": self.classified,
            "solution": self.solution,
            "max_residual": self.report.max_residual,
            "constant_drift": self.report.constant_drift,
            "oracle_max_gap": self.report.oracle_max_gap,
            "constant": self.report.constant,
            "variants": dict(self.variants),
            "selected_variant": self.selected,
            "paths_agree": self.paths_agree,
            "pass": self.passed,
            "notes": list(self.notes + self.report.notes),
        }


def check_file(pf: pfile.ProblemFile, alpha: float | None = None, samples: int = 20,
               cfg: VerifyConfig = DEFAULT_VERIFY, ccfg: cl.ClassifierConfig = cl.DEFAULT_CLASSIFIER) -> FixtureReport:
    """classify -> solve -> residual -> oracle for one problem file, plus every
    closed form the file lists."""
    problem = pf.problem(alpha)
    window = pf.window(alpha)
    ic = problem.ic
    if ic is None or window is None:
        raise pfile.ProblemFileError("verification needs ic and window")
    classes = cl.classify(problem, ccfg)
    tags = tuple(c.tag for c in classes)
    family = pf.family or (tags[0] if tags else "none")
    notes = []
    classified = family in tags
    if not classified:
        notes.append(f"expected family {family!r} not among {list(tags)}")
        report = VerifyReport(math.inf, (), math.inf, math.inf, False, None, tuple(window), ())
        return FixtureReport(pf.id, family, tags, False, "", report, notes=tuple(notes))
    sol = sv.solve(problem, family, ccfg)
    report = verify(problem, sol, window, ic, samples, cfg)
    variants, selected = {}, None
    forms = pf.expected_forms(alpha)
    for name, form in forms.items():
        rep = verify(problem, form, window, ic, samples, cfg)
        variants[name] = rep.passed
        if rep.passed and selected is None:
            selected = name
    if family == "homogeneous" and problem.alpha != 1.0:
        for variant in ("log", "power"):
            vs = sv.solve(problem, family, ccfg, variant=variant)
            variants[f"x-weight={variant}"] = verify(problem, vs, window, ic, samples, cfg).passed
        notes.append("x-integral variants: " + ", ".join(
            f"{k.split('=')[1]}={'pass' if v else 'fail'}" for k, v in variants.items() if k.startswith("x-weight")))
    paths = None
    other = [c for c in classes if c.tag != family and c.tag in ("linear", "separable")]
    if family in ("linear", "separable") and other:
        alt = sv.solve_class(problem, other[0]).with_constant(0.0)
        alt = alt.with_constant(fit_constant(alt, ic))
        main = sol.with_constant(report.constant)
        paths = _path_distance(main, alt, window)
        notes.append(f"{family} and {other[0].tag} paths differ by {paths:.2e}")
    if pf.variants and selected is not None:
        notes.append(f"variant: {selected}")
    return FixtureReport(pf.id, family, tags, classified, sol.display, report, variants, selected, paths,
                         tuple(notes))


def _path_distance(a: sv.Solution, b: sv.Solution, window, n: int = 50) -> float:
    worst = 0.0
    for x in np.linspace(window[0], window[1], n):
        ya, yb = a.y(float(x)), b.y(float(x))
        worst = max(worst, abs(ya - yb) / _scale(yb))
    return worst


def run_fixture_suite(alpha: float | None = None, cfg: VerifyConfig = DEFAULT_VERIFY) -> list[FixtureReport]:
    """Every bundled fixture through :func:`check_file`.  Failures are
    reported, never raised."""
    out = []
    for fx in load_fixtures():
        try:
            out.append(check_file(fx.file, alpha, cfg=cfg))
        except Exception as exc:  # noqa: BLE001 - the suite reports, it does not throw
            rep = VerifyReport(math.inf, (), math.inf, math.inf, False, None, None, (f"{type(exc).__name__}: {exc}",))
            out.append(FixtureReport(fx.id, fx.family or "", (), False, "", rep))
    return out
