"""JSON serialization of truncated vector fields.

A field file looks like::

    {
      "n": 2,
      "linear": [["1", "0"], ["0", "-2"]],
      "terms": [{"component": 1, "exponents": [3, 1], "coeff": "1"}],
      "scalar_field": "rational",
      "precision_bits": 256
    }

Components are 1-based; coefficients are strings (``"p/q"``, integers or
decimals) so no precision is lost.  ``scalar_field`` and
``precision_bits`` are optional; the field is rational when every
coefficient is.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError
from .homological import LinearPart
from .polyvec import GradedVectorField, HomogeneousVF, multi_indices
from .scalars import (RATIONAL, Field, default_precision, float_field, format_scalar,
                      is_rational_text, parse_float, parse_rational)

_KEYS = {"n", "linear", "terms", "scalar_field", "precision_bits", "nmax"}


def _fail(where: str, msg: str):
    raise ParseError(f"{where}: {msg}")


def _coeff_text(value, where: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        _fail(where, "coefficients must be strings (or integers)")
    return str(value)


def field_from_dict(spec: dict, nmax: int | None = None,
                    precision: int | None = None) -> GradedVectorField:
    """Build a :class:`GradedVectorField` from a parsed field file."""
    if not isinstance(spec, dict):
        _fail("top level", "expected a JSON object")
    extra = set(spec) - _KEYS
    if extra:
        _fail("top level", f"unknown keys {sorted(extra)}")
    n = spec.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail("n", "must be a positive integer")
    linear = spec.get("linear")
    if not isinstance(linear, list) or len(linear) != n or any(
            not isinstance(r, list) or len(r) != n for r in linear):
        _fail("linear", f"must be an {n}x{n} matrix of strings")
    terms = spec.get("terms", [])
    if not isinstance(terms, list):
        _fail("terms", "must be a list")
    texts = [_coeff_text(v, f"linear[{i}][{j}]") for i, r in enumerate(linear)
             for j, v in enumerate(r)]
    for t, term in enumerate(terms):
        if not isinstance(term, dict) or set(term) != {"component", "exponents", "coeff"}:
            _fail(f"terms[{t}]", "needs exactly the keys component, exponents, coeff")
        texts.append(_coeff_text(term["coeff"], f"terms[{t}].coeff"))

    kind = spec.get("scalar_field")
    bits = precision or spec.get("precision_bits") or default_precision()
    if not isinstance(bits, int) or bits < 53:
        _fail("precision_bits", "must be an integer >= 53")
    if kind is None:
        kind = "rational" if all(is_rational_text(s) for s in texts) else "float"
    if kind == "rational":
        field = RATIONAL if bits == RATIONAL.precision else Field("rational", bits)
        parse = parse_rational
    elif kind == "float":
        field = float_field(bits)
        parse = lambda s: parse_float(s, bits)  # noqa: E731
    else:
        _fail("scalar_field", "must be 'rational' or 'float'")

    def coeff(text, where):
        try:
            return parse(text)
        except ParseError as exc:
            _fail(where, str(exc))

    matrix = [[coeff(str(v), f"linear[{i}][{j}]") for j, v in enumerate(r)]
              for i, r in enumerate(linear)]
    by_deg: dict[int, dict] = {}
    for t, term in enumerate(terms):
        comp, exps = term["component"], term["exponents"]
        if not isinstance(comp, int) or isinstance(comp, bool) or not 1 <= comp <= n:
            _fail(f"terms[{t}].component", f"must be an integer in 1..{n}")
        if not isinstance(exps, list) or len(exps) != n or any(
                not isinstance(e, int) or isinstance(e, bool) or e < 0 for e in exps):
            _fail(f"terms[{t}].exponents", f"must be {n} nonnegative integers")
        d = sum(exps)
        if d < 2:
            _fail(f"terms[{t}].exponents", "total degree must be >= 2 (nonlinear part only)")
        key = (comp - 1, tuple(exps))
        bucket = by_deg.setdefault(d, {})
        if key in bucket:
            _fail(f"terms[{t}]", "duplicate monomial")
        bucket[key] = coeff(str(term["coeff"]), f"terms[{t}].coeff")
    file_nmax = spec.get("nmax")
    if nmax is None:
        nmax = file_nmax if file_nmax is not None else max(by_deg, default=1)
    with field.context():
        lin = LinearPart(matrix, field)
        parts = {d: HomogeneousVF(n, d, cf, field) for d, cf in by_deg.items()}
    return GradedVectorField(lin, parts, nmax)


def load_field(path, nmax: int | None = None, precision: int | None = None) -> GradedVectorField:
    text = Path(path).read_text()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return field_from_dict(spec, nmax, precision)


def parts_to_terms(parts, precision: int) -> list:
    """Canonical term list: by degree, then component, then exponents descending."""
    out = []
    for d in sorted(parts):
        p = parts[d]
        for i in range(p.n):
            for q in multi_indices(p.n, d):
                c = p[(i, q)]
                if c != 0:
                    out.append({"component": i + 1, "exponents": list(q),
                                "coeff": format_scalar(c, precision)})
    return out


def field_to_dict(X: GradedVectorField, include_nmax: bool = False) -> dict:
    prec = X.field.precision
    spec = {
        "n": X.n,
        "linear": [[format_scalar(v, prec) for v in row] for row in X.linear.matrix],
        "terms": parts_to_terms(dict(X.parts), prec),
        "scalar_field": X.field.kind,
        "precision_bits": prec,
    }
    if include_nmax:
        spec["nmax"] = X.nmax
    return spec


def dumps_field(X: GradedVectorField, include_nmax: bool = False) -> str:
    return json.dumps(field_to_dict(X, include_nmax), indent=2) + "\n"


__all__ = ["field_from_dict", "load_field", "field_to_dict", "dumps_field", "parts_to_terms"]
