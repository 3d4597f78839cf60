"""Conformable-derivative ODE toolkit.

``dy/dx^(alpha) = x^(1-alpha) dy/dx`` turns first-order conformable
equations into classical ones.  The package classifies such equations
(separable, substitution, homogeneous, linear, Bernoulli, exact), solves
them in closed form where possible and checks every answer against an
adaptive Runge-Kutta oracle.

Modules:

* :mod:`confode.expr` -- expression trees, parser, differentiation;
* :mod:`confode.confcalc` -- conformable derivatives and alpha-integrals;
* :mod:`confode.classify` -- problem type and family detection;
* :mod:`confode.solvers` -- one solver per family;
* :mod:`confode.ivp` -- the numerical oracle and implicit-curve tracking;
* :mod:`confode.verify` -- residuals, constant fitting, fixture suite;
* :mod:`confode.cli` -- command-line front end.
"""

from . import classify, confcalc, expr, ivp, solvers, verify
from .classify import ClassifierConfig, OdeProblem, check_exactness, describe
from .confcalc import (
    conf_derivative_expr,
    conf_derivative_identity,
    conf_derivative_limit,
    conf_integral_numeric,
    integrate_closed,
    table1_lookup,
)
from .expr import diff, evaluate, lambdify, parse, render, simplify
from .ivp import IvpSpec, Trajectory, implicit_track, ivp_solve
from .problemfile import ProblemFile, load as load_problem
from .solvers import DegenerateError, Solution, SolverError, UnsupportedError, solve
from .verify import VerifyReport, cross_check, fit_constant, residual, run_fixture_suite

__version__ = "0.1.0"

__all__ = [
    "classify",
    "confcalc",
    "expr",
    "ivp",
    "solvers",
    "ClassifierConfig",
    "DegenerateError",
    "IvpSpec",
    "OdeProblem",
    "ProblemFile",
    "Solution",
    "SolverError",
    "Trajectory",
    "UnsupportedError",
    "VerifyReport",
    "check_exactness",
    "conf_derivative_expr",
    "conf_derivative_identity",
    "conf_derivative_limit",
    "conf_integral_numeric",
    "cross_check",
    "describe",
    "diff",
    "evaluate",
    "fit_constant",
    "implicit_track",
    "integrate_closed",
    "ivp_solve",
    "lambdify",
    "load_problem",
    "parse",
    "render",
    "residual",
    "run_fixture_suite",
    "simplify",
    "solve",
    "table1_lookup",
    "verify",
]
