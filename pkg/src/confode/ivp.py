"""Numerical oracle for conformable initial value problems.

``dy/dx^(alpha) = f(x, y)`` is integrated as the classical ODE
``dy/dx = (x - a)^(alpha - 1) f(x, y)`` (``a`` is the derivative's lower
terminal, normally 0) with the Dormand-Prince 5(4) pair and a PI step-size
controller.  Steps are clipped so that every requested output abscissa is hit
exactly, so no interpolant is involved in the reported samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as ex
from .confcalc import check_alpha


class IntegrationError(RuntimeError):
    """The integrator could not continue (step underflow, step budget, domain)."""


# Dormand & Prince (1980) coefficients.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_BETA = 0.04  # PI stabilisation
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@dataclass(frozen=True)
class IvpSpec:
    rhs: ex.Expr | Callable[[float, float], float]
    alpha: float
    x0: float
    y0: float
    x_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_steps: int = 10**6
    dense_points: int = 200
    terminal: float = 0.0
    blowup: float = 1e8

    def __post_init__(self):
        check_alpha(self.alpha)
        if self.x0 <= self.terminal or self.x_end <= self.terminal:
            raise ValueError("x0 and x_end must lie to the right of the terminal (x > 0)")
        if self.x0 == self.x_end:
            raise ValueError("x0 and x_end must differ")
        if self.dense_points < 2:
            raise ValueError("need at least two output points")


@dataclass
class Trajectory:
    x: np.ndarray
    y: np.ndarray
    steps: int = 0
    rejected: int = 0
    min_step: float = math.inf
    stopped: str | None = None
    notes: list = field(default_factory=list)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def complete(self) -> bool:
        return self.stopped is None


def _weighted_rhs(spec: IvpSpec) -> Callable[[float, float], float]:
    f = ex.lambdify(spec.rhs, ("x", "y")) if isinstance(spec.rhs, ex.Expr) else spec.rhs
    if spec.alpha == 1.0:
        return f
    power = spec.alpha - 1.0
    a = spec.terminal

    def g(x, y):
        return (x - a) ** power * f(x, y)

    return g


def ivp_solve(spec: IvpSpec) -> Trajectory:
    """Integrate ``spec`` and sample the solution at ``dense_points`` equally
    spaced abscissae from ``x0`` to ``x_end`` (both included)."""
    fun = _weighted_rhs(spec)
    grid = np.linspace(spec.x0, spec.x_end, spec.dense_points)
    return integrate_dp54(fun, grid, spec.y0, spec.rel_tol, spec.abs_tol, spec.max_steps, spec.blowup)


def _initial_step(fun, x0, y0, f0, direction, rtol, atol, span):
    scale = atol + rtol * abs(y0)
    d0 = abs(y0) / scale
    d1 = abs(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    try:
        f1 = fun(x0 + direction * h0, y1)
    except ex.DomainError:
        return h0 * 1e-3
    d2 = abs(f1 - f0) / scale / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate_dp54(
    fun: Callable[[float, float], float],
    grid,
    y0: float,
    rtol: float = 1e-9,
    atol: float = 1e-11,
    max_steps: int = 10**6,
    blowup: float = 1e8,
) -> Trajectory:
    """Adaptive Dormand-Prince integration of the scalar ODE ``y' = fun(x, y)``
    through the monotone abscissae ``grid`` (``grid[0]`` carries ``y0``)."""
    grid = np.asarray(grid, dtype=float)
    direction = 1.0 if grid[-1] > grid[0] else -1.0
    xs = [float(grid[0])]
    ys = [float(y0)]
    x, y = float(grid[0]), float(y0)
    span = abs(grid[-1] - grid[0])
    try:
        k1 = fun(x, y)
    except ex.DomainError as exc:
        raise IntegrationError(f"right-hand side undefined at the initial point: {exc}") from None
    h = _initial_step(fun, x, y, k1, direction, rtol, atol, span)
    err_old = 1e-4
    traj = Trajectory(np.empty(0), np.empty(0))
    target_index = 1
    steps = 0
    min_step = math.inf
    hmin_floor = 16 * np.finfo(float).eps

    while target_index < len(grid):
        if steps + traj.rejected >= max_steps:
            traj.stopped = "max_steps"
            break
        target = float(grid[target_index])
        remaining = abs(target - x)
        hit = h >= remaining
        step = remaining if hit else h
        if step < hmin_floor * max(1.0, abs(x)):
            traj.stopped = "step_underflow"
            break
        hs = direction * step
        try:
            ks = [k1]
            for i in range(1, 7):
                yi = y + hs * sum(a * k for a, k in zip(_A[i], ks))
                ks.append(fun(x + _C[i] * hs, yi))
            y_new = y + hs * sum(b * k for b, k in zip(_B, ks))
            err_abs = hs * sum(e * k for e, k in zip(_E, ks))
        except (ex.DomainError, OverflowError):
            traj.rejected += 1
            h = step * 0.25
            continue
        scale = atol + rtol * max(abs(y), abs(y_new))
        err = abs(err_abs) / scale
        if not math.isfinite(err):
            traj.rejected += 1
            h = step * 0.25
            continue
        if err <= 1.0:
            steps += 1
            min_step = min(min_step, step)
            x = target if hit else x + hs
            y = y_new
            k1 = ks[6]  # FSAL
            if hit:
                xs.append(x)
                ys.append(y)
                target_index += 1
            if abs(y) > blowup:
                traj.stopped = "blowup"
                break
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * err**-_EXPO * err_old**_BETA
                fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            err_old = max(err, 1e-4)
            h_next = step * fac
            # keep the natural step size after a clipped landing step
            h = max(h_next, h) if hit else h_next
        else:
            traj.rejected += 1
            fac = max(_FAC_MIN, _SAFETY * err**-0.2)
            h = step * fac

    traj.x = np.asarray(xs)
    traj.y = np.asarray(ys)
    traj.steps = steps
    traj.min_step = min_step
    return traj


def implicit_track(
    g: Callable[[float, float], float],
    grad: Callable[[float, float], tuple[float, float]],
    x0: float,
    y0: float,
    x_end: float,
    dense_points: int = 200,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-11,
    fold_tol: float = 1e-10,
    polish: bool = True,
) -> Trajectory:
    """Follow the level set ``g(x, y) = g(x0, y0)`` from ``(x0, y0)``.

    Predictor: the Dormand-Prince core on ``dy/dx = -g_x/g_y``.  Corrector:
    Newton iterations on ``g`` at every output sample.  Stops at a fold
    (``g_y`` vanishing) with the samples collected so far.
    """
    level = g(x0, y0)
    scale_y = max(1.0, abs(grad(x0, y0)[1]))

    def slope(x, y):
        gx, gy = grad(x, y)
        if abs(gy) < fold_tol * scale_y:
            raise ex.DomainError("fold point: d g/d y vanishes")
        return -gx / gy

    grid = np.linspace(x0, x_end, dense_points)
    traj = integrate_dp54(slope, grid, y0, rel_tol, abs_tol)
    if traj.stopped == "step_underflow":
        traj.stopped = "fold"
    if polish:
        ys = traj.y.copy()
        for i in range(1, len(ys)):
            ys[i] = newton_on_level(g, grad, float(traj.x[i]), float(ys[i]), level)
        traj.y = ys
    return traj


def newton_on_level(g, grad, x, y, level, iters: int = 8, tol: float = 1e-14) -> float:
    for _ in range(iters):
        try:
            r = g(x, y) - level
            gy = grad(x, y)[1]
        except ex.DomainError:
            break
        if gy == 0.0:
            break
        dy = r / gy
        y -= dy
        if abs(dy) <= tol * max(1.0, abs(y)):
            break
    return y
