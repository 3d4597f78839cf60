"""
Classify, solve and verify the bundled problems
===============================================

Every bundled problem file is classified, solved by the first matching
method, and checked two ways: the residual of the closed form in the ODE,
and the gap to an adaptive Runge-Kutta solution from the same initial
point.
"""

from confode import classify as cl
from confode import solvers as sv
from confode import verify as vf

# %%
# One problem in detail: a Riccati equation reduced by z = x^alpha + y.
fx = vf.get_fixture("ex4")
problem = fx.problem()
print(cl.describe(cl.classify(problem)))
sol = sv.solve(problem)
print(sol.display)
for step in sol.trace:
    print(f"   {step.forward}   (back: {step.inverse})")

C = vf.fit_constant(sol, problem.ic)
report = vf.verify(problem, sol, fx.window())
print(f"C = {C:.6f}, residual {report.max_residual:.1e}, oracle gap {report.oracle_max_gap:.1e}")

# %%
# The whole suite.  Where a problem file lists several closed forms, the
# oracle picks the one that actually solves the equation.
print(f"{'id':9} {'family':13} {'residual':>9} {'gap':>9}  pass  selected")
for r in vf.run_fixture_suite():
    m = r.report
    print(f"{r.id:9} {r.family:13} {m.max_residual:9.1e} {m.oracle_max_gap:9.1e}  {str(r.passed):5} {r.selected or ''}")
