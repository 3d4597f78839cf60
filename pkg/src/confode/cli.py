"""Command-line interface.

Usage::

    confode classify PROBLEM [--json]
    confode solve PROBLEM [--family TAG] [--fit-ic]
    confode verify PROBLEM [--samples N] [--json]
    confode sweep PROBLEM --alpha-from A --alpha-to B --steps K [--out FILE]
    confode integrate --f EXPR --alpha A --from X1 --to X2
    confode derive --f EXPR --alpha A --at X

Global flags (before the command): ``--tol-rel``, ``--tol-abs`` (oracle
tolerances) and ``--probe-min`` (smallest classifier probe coordinate).

Exit codes: 0 success, 1 verification failure, 2 parse or I/O error,
3 no family matches, 4 unsupported family, 5 degenerate problem.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys

import numpy as np

from . import classify as cl
from . import confcalc as cc
from . import expr as ex
from . import problemfile as pfile
from . import solvers as sv
from . import verify as vf

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_NO_FAMILY = 3
EXIT_UNSUPPORTED = 4
EXIT_DEGENERATE = 5

CSV_HEADER = ("alpha", "x", "y_symbolic", "y_oracle", "gap")


def _number(v: float) -> str:
    """Shortest round-tripping decimal; independent of locale."""
    v = float(v)
    if v == 0.0:
        return "0"
    return repr(v)


def _configs(args):
    vcfg = dataclasses.replace(vf.DEFAULT_VERIFY, rel_tol=args.tol_rel, abs_tol=args.tol_abs)
    ccfg = dataclasses.replace(cl.DEFAULT_CLASSIFIER, probe_min=args.probe_min)
    return vcfg, ccfg


def _class_record(c: cl.OdeClass) -> dict:
    params = {}
    for f in dataclasses.fields(c):
        v = getattr(c, f.name)
        if v is None or not f.repr:
            continue
        params[f.name] = ex.render(v) if isinstance(v, ex.Expr) else v
    return {"tag": c.tag, "label": c.label, "params": params}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(args, out) -> int:
    _, ccfg = _configs(args)
    pf = pfile.load(args.problem)
    classes = cl.classify(pf.problem(), ccfg)
    if args.json:
        json.dump({"id": pf.id, "classes": [_class_record(c) for c in classes]}, out, indent=2)
        out.write("\n")
    else:
        out.write((cl.describe(classes) if classes else "no known family") + "\n")
    return EXIT_OK if classes else EXIT_NO_FAMILY


def cmd_solve(args, out) -> int:
    _, ccfg = _configs(args)
    pf = pfile.load(args.problem)
    problem = pf.problem()
    if not cl.classify(problem, ccfg):
        out.write("no known family\n")
        return EXIT_NO_FAMILY
    sol = sv.solve(problem, args.family, ccfg)
    out.write(sol.display + "\n")
    if args.fit_ic:
        if problem.ic is None:
            raise pfile.ProblemFileError("--fit-ic needs an ic entry")
        C = vf.fit_constant(sol, problem.ic)
        out.write(f"{sol.constant} = {ex.format_number(C, 10)}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    vcfg, ccfg = _configs(args)
    pf = pfile.load(args.problem)
    rep = vf.check_file(pf, samples=args.samples, cfg=vcfg, ccfg=ccfg)
    if args.json:
        json.dump(rep.to_dict(), out, indent=2, default=_json_default)
        out.write("\n")
    else:
        r = rep.report
        lines = [
            f"{rep.id}: {'pass' if rep.passed else 'FAIL'}",
            f"family: {rep.family}",
            f"solution: {rep.solution}",
            f"max_residual: {r.max_residual:.3e}",
            f"constant_drift: {r.constant_drift:.3e}",
            f"oracle_max_gap: {r.oracle_max_gap:.3e}",
        ]
        if r.constant is not None:
            lines.append(f"constant: {ex.format_number(r.constant, 10)}")
        for name, ok in rep.variants.items():
            lines.append(f"form {name}: {'pass' if ok else 'fail'}")
        lines += rep.notes + r.notes
        out.write("\n".join(lines) + "\n")
    if not rep.classified:
        return EXIT_NO_FAMILY
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _json_default(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.floating):
        return float(v)
    raise TypeError(type(v).__name__)


def sweep_rows(pf: pfile.ProblemFile, alphas, family: str = "auto",
               vcfg: vf.VerifyConfig = vf.DEFAULT_VERIFY, ccfg: cl.ClassifierConfig = cl.DEFAULT_CLASSIFIER):
    """``(alpha, x, y_symbolic, y_oracle, gap)`` rows, alpha-major.  Each
    block ends where either curve stops (blow-up, fold, domain)."""
    family = family if family != "auto" else (pf.family or "auto")
    for alpha in alphas:
        problem = pf.problem(alpha)
        window = pf.window(alpha)
        ic = problem.ic
        if ic is None or window is None:
            raise pfile.ProblemFileError("sweep needs ic and window")
        sol = sv.solve(problem, family, ccfg)
        sol = sol.with_constant(vf.fit_constant(sol, ic))
        xo, yo, _ = vf.oracle_curve(problem, ic, window, vcfg)
        xs, ys, _ = vf.solution_curve(sol, ic, window, vcfg)
        lo, hi = max(xo[0], xs[0]), min(xo[-1], xs[-1])
        symbolic = dict(zip(xs.tolist(), ys.tolist()))
        for x, y in zip(xo.tolist(), yo.tolist()):
            if x < lo or x > hi or x not in symbolic:
                continue
            ysym = symbolic[x]
            yield alpha, x, ysym, y, abs(ysym - y) / max(1.0, abs(y))


def cmd_sweep(args, out) -> int:
    vcfg, ccfg = _configs(args)
    if args.steps < 1:
        raise pfile.ProblemFileError("--steps must be at least 1")
    pf = pfile.load(args.problem)
    alphas = [args.alpha_from] if args.steps == 1 else np.linspace(args.alpha_from, args.alpha_to, args.steps).tolist()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in sweep_rows(pf, alphas, args.family, vcfg, ccfg):
        writer.writerow([_number(v) for v in row])
    text = buf.getvalue()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise pfile.ProblemFileError(f"cannot write {args.out}: {exc}") from exc
    else:
        out.write(text)
    return EXIT_OK


def cmd_integrate(args, out) -> int:
    f = ex.parse(args.f)
    value = cc.conf_integral_numeric(f, args.lo, args.hi, args.alpha)
    out.write(_number(value) + "\n")
    return EXIT_OK


def cmd_derive(args, out) -> int:
    f = ex.parse(args.f)
    value = cc.conf_derivative_identity(f, args.at, args.alpha)
    out.write(_number(value) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="confode", description="Conformable-derivative ODE toolkit.", allow_abbrev=False)
    p.add_argument("--tol-rel", type=float, default=vf.DEFAULT_VERIFY.rel_tol, help="oracle relative tolerance")
    p.add_argument("--tol-abs", type=float, default=vf.DEFAULT_VERIFY.abs_tol, help="oracle absolute tolerance")
    p.add_argument("--probe-min", type=float, default=cl.DEFAULT_CLASSIFIER.probe_min,
                   help="smallest coordinate of classifier probe points")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", help="list the families a problem belongs to")
    s.add_argument("problem")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("solve", help="print the general solution")
    s.add_argument("problem")
    s.add_argument("--family", default="auto", choices=("auto",) + cl.PRIORITY)
    s.add_argument("--fit-ic", action="store_true", help="also print the constant fitted to the ic")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", help="residual and oracle checks on the problem window")
    s.add_argument("problem")
    s.add_argument("--samples", type=int, default=vf.DEFAULT_VERIFY.samples)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="CSV of symbolic vs oracle curves over a range of alpha")
    s.add_argument("problem")
    s.add_argument("--alpha-from", type=float, required=True)
    s.add_argument("--alpha-to", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--family", default="auto", choices=("auto",) + cl.PRIORITY)
    s.add_argument("--out", help="write the CSV here instead of stdout")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("integrate", help="alpha-integral of f over [from, to]")
    s.add_argument("--f", required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--from", dest="lo", type=float, required=True)
    s.add_argument("--to", dest="hi", type=float, required=True)
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("derive", help="conformable derivative of f at a point")
    s.add_argument("--f", required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--at", type=float, required=True)
    s.set_defaults(func=cmd_derive)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except sv.DegenerateError as exc:
        print(f"error: degenerate problem: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except sv.UnsupportedError as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except vf.FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (pfile.ProblemFileError, ex.ExprError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
