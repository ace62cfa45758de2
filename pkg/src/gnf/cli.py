"""Command line interface: ``gnf <subcommand> [flags]``.

Every run writes ``report.json`` (deterministic: sorted keys, no clock or
host data) and ``series.csv`` under ``--output``, plus ``metadata.json``
with the timestamp and environment.  Exit codes: 0 success, 1 usage or
input errors, 2 mathematical domain errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from . import __version__, kernels
from .errors import (ConfigurationError, DomainError, GNFError, NotLinearizableError,
                     ParseError)
from .scalars import format_scalar

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


class UsageError(GNFError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _num(v):
    """JSON-friendly scalar: exact values as strings, floats rounded to 17 digits."""
    if v is None:
        return None
    if isinstance(v, bool):
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return v
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 17)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return repr(f) if not math.isfinite(f) else float(f"{f:.17g}")
    return v


def _precision(args) -> int | None:
    return args.precision_bits


def _write_outputs(args, report: dict, header: list, rows: list) -> None:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("json", "both"):
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.format in ("csv", "both"):
        with open(out / "series.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow(["" if v is None else v for v in r])
    meta = {
        "created": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "argv": sys.argv[1:],
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _parse_list(text: str, what: str) -> list:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError(f"{what} is empty")
    return items


def _parse_eigenvalue(text: str):
    from .gevreyfn import Expression
    from .scalars import is_rational_text, parse_rational

    if is_rational_text(text):
        return parse_rational(text)
    try:
        return float(Expression(text, names=())())
    except ParseError as exc:
        raise UsageError(f"bad eigenvalue {text!r}: {exc}") from exc


def _floats(text: str, what: str) -> list:
    try:
        return [float(t) for t in _parse_list(text, what)]
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_normalize(args) -> int:
    from .homological import LINEARIZE, NORMAL_FORM
    from .io import load_field, parts_to_terms
    from .normalform import gevrey_order_fit, majorant_check, normalize, pushforward_check
    from .smalldivisors import eta_sequence, sigma_sequence
    from .normalform import composition_constant

    if not args.input:
        raise UsageError("normalize needs --input")
    X = load_field(args.input, nmax=args.degree, precision=_precision(args))
    mode = LINEARIZE if args.mode == "linearize" else NORMAL_FORM
    prec = X.field.precision
    report = {"command": "normalize", "mode": args.mode, "nmax": X.nmax, "n": X.n,
              "scalar_field": X.field.kind, "precision_bits": prec}
    try:
        result = normalize(X, mode, acknowledge_nonhyperbolic=args.acknowledge_nonhyperbolic)
    except NotLinearizableError as exc:
        report["error"] = {
            "type": "NotLinearizableError",
            "message": str(exc),
            "degree": exc.degree,
            "resonant_terms": parts_to_terms({exc.degree: exc.resonant}, prec)
            if exc.resonant is not None else [],
        }
        _write_outputs(args, report, ["delta"], [])
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    residuals = pushforward_check(X, result)
    alpha = args.alpha if args.alpha is not None else 0.0
    majorant = None
    eta = sigma = None
    if all(a is not None for a in result.a_seq):
        majorant = majorant_check(X, result, alpha)
        kmax = X.nmax - 1
        eta = eta_sequence(result.a_seq, alpha, kmax)
        sigma, _ = sigma_sequence(composition_constant(X, alpha), mpmath.sqrt(X.n), kmax)
    try:
        fit = gevrey_order_fit(result.u_norms)
        result.gevrey_fit = fit
    except DomainError:
        fit = None
    report.update({
        "U": parts_to_terms(dict(result.U.parts), prec),
        "N": parts_to_terms(dict(result.N.parts), prec),
        "a_seq": [_num(a) for a in result.a_seq],
        "degrees": [
            {"delta": t - 1, "degree": t, "U_norm": _num(result.u_norms[t - 2]),
             "N_norm": _num(result.n_norms[t - 2]), "residual": _num(residuals[t - 2])}
            for t in range(2, X.nmax + 1)],
        "majorant": None if majorant is None else {
            "alpha": alpha,
            "checks": [{"delta": d, "U_norm": _num(u), "bound": _num(b), "holds": ok}
                       for d, u, b, ok in majorant]},
        "gevrey_fit": None if fit is None else dict(zip(("beta", "C", "r2"), map(_num, fit))),
        "notes": result.notes,
    })
    rows = [[_num(v) if not isinstance(v, str) else v for v in r] for r in result.rows(eta, sigma)]
    _write_outputs(args, report, ["delta", "U_norm", "N_norm", "eta", "sigma", "residual"], rows)
    return EXIT_OK


def _cmd_smalldiv(args) -> int:
    from .io import load_field
    from .smalldivisors import small_divisor_report

    if args.eigenvalues:
        lam = [_parse_eigenvalue(t) for t in _parse_list(args.eigenvalues, "--eigenvalues")]
    elif args.input:
        X = load_field(args.input, precision=_precision(args))
        if not X.linear.diagonal:
            raise UsageError("smalldiv needs a diagonal linear part")
        lam = list(X.linear.eigenvalues)
    else:
        raise UsageError("smalldiv needs --eigenvalues or --input")
    kmax = args.kmax or 6
    alpha = args.alpha if args.alpha is not None else 0.0
    beta = args.beta if args.beta is not None else alpha
    c = args.composition_constant
    rep = small_divisor_report(lam, kmax, alpha, beta, c_const=c)
    report = {"command": "smalldiv"}
    report.update(rep.to_dict())
    report = json.loads(json.dumps(report, default=_num))
    _write_outputs(args, report, ["k", "omega", "brjuno_partial", "cm", "a", "eta", "sigma"],
                   [[_num(v) for v in r] for r in rep.rows()])
    return EXIT_OK


def _cmd_liouville(args) -> int:
    from .liouville import build_liouville_zeta, verify_divergence

    alpha = args.alpha if args.alpha is not None else 0.0
    beta = args.beta if args.beta is not None else alpha + 1
    gap = Fraction(str(beta)) - Fraction(str(alpha))
    n_terms = args.kmax or 4
    data = build_liouville_zeta(gap, n_terms, _precision(args) or 256)
    rep = verify_divergence(data, Fraction(str(alpha)) if float(alpha).is_integer() else alpha,
                            args.degree)
    report = {"command": "liouville", "data": data.to_dict(), "divergence": rep.to_dict()}
    report = json.loads(json.dumps(report, default=_num))
    rows = [[s["n"], s["p"], s["q"], s["log10_abs_closed_form"], s["log10_qfact_beta"],
             s.get("relative_error", "")] for s in rep.scales]
    _write_outputs(args, report, ["n", "p_n", "q_n", "log10_abs_coefficient",
                                  "log10_qfact_beta", "engine_relative_error"], rows)
    return EXIT_OK


def _cmd_flatsolve(args) -> int:
    from .flatsolver import (CATALOG, ContractionField, FlatFunction, bracket_residual,
                             lie_derivative_residual, solve_lie_bracket, solve_lie_derivative)
    from .gevreyfn import Expression

    name = args.field or "contraction-1d"
    if name not in CATALOG:
        raise UsageError(f"unknown field {name!r}; choose from {', '.join(sorted(CATALOG))}")
    entry = CATALOG[name]
    X = ContractionField.certified(entry["field"], entry["box"], entry["p"],
                                   jacobian=entry["jacobian"])
    data_text = args.data or entry["data"]
    expr = Expression(data_text, entry["names"])
    decay = args.data is None
    beta = args.beta if args.beta is not None else entry["beta"]
    hval = lambda x: float(np.nan_to_num(expr(*x), nan=0.0))  # noqa: E731
    h = FlatFunction(hval, beta, entry["M"] if decay else None, entry["eta"] if decay else None)
    if args.points:
        pts = [[float(v) for v in p.split(":")] for p in _parse_list(args.points, "--points")]
    else:
        pts = [[v] + [0.0] * (X.n - 1) if X.p == 0 else [0.0, v] for v in (0.3, 0.5, 0.7)]
        if X.p == 0 and X.n == 1:
            pts = [[v] for v in (0.3, 0.5, 0.7)]
    if any(len(p) != X.n for p in pts):
        raise UsageError(f"points need {X.n} coordinates separated by ':'")
    tol = args.tol
    report = {"command": "flatsolve", "field": name, "data": data_text, "kind": args.kind,
              "rates": {"c": _num(X.c), "C": _num(X.C)}, "tol": tol}
    rows = []
    entries = []
    if args.kind == "lie":
        def solve(x):
            return solve_lie_derivative(X, h, x, tol)
        for p in pts:
            s = solve(p)
            entries.append({"x": p, "value": _num(s.value), "error_bound": _num(s.error_bound),
                            "u_max": _num(s.u_max), "rho_sandwich": s.sandwich_ok})
            rows.append(p + [_num(s.value)])
        res = lie_derivative_residual(X, lambda x: solve(x).value, hval, pts)
    else:
        yv = lambda x: np.array([0.0] * X.p + [hval(x)] * (X.n - X.p))  # noqa: E731
        for p in pts:
            s = solve_lie_bracket(X, yv, h, p, tol)
            entries.append({"x": p, "value": [_num(v) for v in s.value],
                            "error_bound": _num(s.error_bound), "u_max": _num(s.u_max),
                            "rho_sandwich": s.sandwich_ok})
            rows.append(p + [_num(v) for v in s.value])
        res = bracket_residual(X, lambda x: solve_lie_bracket(X, yv, h, x, tol).value, yv, pts)
    report["points"] = entries
    report["finite_difference_residual"] = _num(res)
    coords = [f"x{i + 1}" for i in range(X.n)]
    vals = ["value"] if args.kind == "lie" else [f"Z{i + 1}" for i in range(X.n)]
    _write_outputs(args, report, coords + vals, rows)
    return EXIT_OK


def _cmd_gevrey_fit(args) -> int:
    from .normalform import gevrey_order_fit
    from .smalldivisors import gevrey_bound_fit

    if not args.input:
        raise UsageError("gevrey-fit needs --input")
    text = Path(args.input).read_text()
    orders = None
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        payload = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if isinstance(payload, dict):
        values, orders = payload.get("norms"), payload.get("orders")
    else:
        values = payload
    if not isinstance(values, list):
        raise ParseError(f"{args.input}: expected a list of norms or {{\"norms\": [...]}}")
    try:
        norms = [mpmath.mpf(str(v)) for v in values]
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{args.input}: non-numeric norm ({exc})") from exc
    beta, c, r2 = gevrey_order_fit(norms, orders, min_points=args.min_points)
    report = {"command": "gevrey-fit", "count": len(norms),
              "fit": {"beta": _num(beta), "C": _num(c), "r2": _num(r2)}}
    if orders is None:
        try:
            b2, c2 = gevrey_bound_fit([mpmath.mpf(1)] + norms)
            report["bound_fit"] = {"beta": _num(b2), "C": _num(c2)}
        except DomainError:
            pass
    idx = orders or list(range(1, len(norms) + 1))
    rows = [[m, _num(v)] for m, v in zip(idx, norms)]
    _write_outputs(args, report, ["order", "norm"], rows)
    return EXIT_OK


def _cmd_gevreynorm(args) -> int:
    from .gevreyfn import derivative_lemma_table, truncated_gevrey_norm

    expr = args.expr or "exp(x)"
    pts = _floats(args.points, "--points") if args.points else [0.0]
    alpha = args.alpha if args.alpha is not None else 1.0
    jmax = args.kmax or 20
    table = truncated_gevrey_norm(expr, pts, alpha, args.L, jmax, _precision(args))
    report = {"command": "gevreynorm", "expr": expr, "points": pts, "alpha": alpha, "L": args.L,
              "jmax": jmax, "partial_sums": [_num(s) for s in table.partial_sums],
              "ratio": _num(table.ratio), "diverges": table.diverges}
    if args.lemma_lambda is not None:
        lt = derivative_lemma_table(expr, pts, alpha, args.L, args.lemma_lambda, args.lemma_j,
                                    jmax)
        report["derivative_lemma"] = {"lambda": args.lemma_lambda, "j": args.lemma_j,
                                      "holds": bool(lt), "lhs": [_num(v) for v in lt.lhs],
                                      "rhs": [_num(v) for v in lt.rhs]}
    _write_outputs(args, report, ["J", "partial_sum", "term"], table.rows())
    return EXIT_OK


COMMANDS = {
    "normalize": _cmd_normalize,
    "smalldiv": _cmd_smalldiv,
    "liouville": _cmd_liouville,
    "flatsolve": _cmd_flatsolve,
    "gevrey-fit": _cmd_gevrey_fit,
    "gevreynorm": _cmd_gevreynorm,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gnf", description="Formal normal forms, small divisors, Gevrey growth.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p):
        p.add_argument("--output", default="gnf-out", help="directory for artifacts")
        p.add_argument("--format", choices=("json", "csv", "both"), default="both")
        p.add_argument("--precision-bits", type=int, default=None)

    p = sub.add_parser("normalize", help="normalize or linearize a truncated field")
    common(p)
    p.add_argument("--input", help="field JSON file")
    p.add_argument("--degree", type=int, help="truncation degree Nmax")
    p.add_argument("--mode", choices=("linearize", "normal-form"), default="normal-form")
    p.add_argument("--alpha", type=float, help="Gevrey exponent for the majorant check")
    p.add_argument("--acknowledge-nonhyperbolic", action="store_true")

    p = sub.add_parser("smalldiv", help="small-divisor sequences for a diagonal spectrum")
    common(p)
    p.add_argument("--eigenvalues", help="comma-separated, e.g. '1,-(sqrt(5)-1)/2'")
    p.add_argument("--input", help="field JSON file with a diagonal linear part")
    p.add_argument("--kmax", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--composition-constant", type=float, help="C for the majorant sequences")

    p = sub.add_parser("liouville", help="Liouville divergence example")
    common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--kmax", type=int, help="number of convergents")
    p.add_argument("--degree", type=int, help="engine truncation (default p_2+q_2+1)")

    p = sub.add_parser("flatsolve", help="flow-integral solutions with flat data")
    common(p)
    p.add_argument("--field", help="catalog field name")
    p.add_argument("--data", help="data expression (no decay constants when given)")
    p.add_argument("--kind", choices=("lie", "bracket"), default="lie")
    p.add_argument("--points", help="comma-separated points, coordinates joined by ':'")
    p.add_argument("--beta", type=float)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("gevrey-fit", help="Gevrey order of a norm sequence")
    common(p)
    p.add_argument("--input", help="JSON list, {\"norms\": [...], \"orders\": [...]} or lines")
    p.add_argument("--min-points", type=int, default=5)

    p = sub.add_parser("gevreynorm", help="truncated Gevrey norm table")
    common(p)
    p.add_argument("--expr", help="function of x")
    p.add_argument("--points", help="comma-separated evaluation points")
    p.add_argument("--alpha", type=float)
    p.add_argument("--L", type=float, default=0.5)
    p.add_argument("--kmax", type=int, help="Jmax")
    p.add_argument("--lemma-lambda", type=float)
    p.add_argument("--lemma-j", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.precision_bits is not None and args.precision_bits < 53:
            raise UsageError("--precision-bits must be >= 53")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ConfigurationError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except GNFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
