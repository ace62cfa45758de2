"""Coefficient fields: exact rationals or binary floats of fixed precision.

A computation picks one :class:`Field` and every coefficient it touches is
coerced into it.  Floats are ``mpmath.mpf`` values; the working precision is
held by the field and installed with :meth:`Field.context` around arithmetic.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC

import mpmath
from mpmath import mp

from .errors import ParseError, ScalarFieldError

DEFAULT_PRECISION_BITS = 256


def default_precision() -> int:
    """Precision in bits, overridable through ``GNF_PRECISION_BITS``."""
    raw = os.environ.get("GNF_PRECISION_BITS")
    if not raw:
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ParseError(f"GNF_PRECISION_BITS must be an integer, got {raw!r}") from exc
    if bits < 53:
        raise ParseError("GNF_PRECISION_BITS must be at least 53")
    return bits


@dataclass(frozen=True)
class Field:
    """A coefficient field.

    ``kind`` is ``"rational"`` or ``"float"``.  For rationals ``precision`` is
    only used for derived irrational quantities such as norms.
    """

    kind: str
    precision: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        if self.kind not in ("rational", "float"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.precision < 53:
            raise ValueError("precision must be at least 53 bits")

    @property
    def exact(self) -> bool:
        return self.kind == "rational"

    @contextmanager
    def context(self):
        with mp.workprec(self.precision):
            yield

    def coerce(self, value):
        """Convert ``value`` into this field, rejecting cross-field mixing."""
        if self.kind == "rational":
            if isinstance(value, bool):
                return Fraction(int(value))
            if isinstance(value, (int, Fraction)):
                return Fraction(value)
            if isinstance(value, _RationalABC):
                return Fraction(value.numerator, value.denominator)
            if isinstance(value, str):
                return parse_rational(value)
            if isinstance(value, mpmath.mpf):
                raise ScalarFieldError("float coefficient given to a rational computation")
            if isinstance(value, float):
                return Fraction(value)
            raise ScalarFieldError(f"cannot coerce {type(value).__name__} to a rational")
        with self.context():
            if isinstance(value, Fraction):
                return mpmath.mpf(value.numerator) / value.denominator
            if isinstance(value, str):
                return parse_float(value, self.precision)
            if isinstance(value, (int, float, mpmath.mpf)):
                return mpmath.mpf(value)
            if isinstance(value, _RationalABC):
                return mpmath.mpf(value.numerator) / value.denominator
            raise ScalarFieldError(f"cannot coerce {type(value).__name__} to a float")

    def check(self, value) -> None:
        if self.kind == "rational":
            if not isinstance(value, (int, Fraction)):
                raise ScalarFieldError(
                    f"{type(value).__name__} coefficient in a rational computation")
        elif not isinstance(value, mpmath.mpf):
            raise ScalarFieldError(
                f"{type(value).__name__} coefficient in a float computation")

    @property
    def zero(self):
        return Fraction(0) if self.exact else mpmath.mpf(0)

    @property
    def one(self):
        return Fraction(1) if self.exact else mpmath.mpf(1)

    def to_mpf(self, value):
        """Real value as an ``mpf`` at this field's precision."""
        with self.context():
            if isinstance(value, Fraction):
                return mpmath.mpf(value.numerator) / value.denominator
            return mpmath.mpf(value)

    def sqrt(self, value):
        """Square root as an ``mpf`` (exact rationals leave the field here)."""
        with self.context():
            return mpmath.sqrt(self.to_mpf(value))

    def describe(self) -> str:
        return "rational" if self.exact else f"float{self.precision}"


RATIONAL = Field("rational")


def float_field(precision: int | None = None) -> Field:
    return Field("float", precision or default_precision())


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer or a finite decimal exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text!r}") from exc


def parse_float(text: str, precision: int):
    text = text.strip()
    with mp.workprec(precision):
        if "/" in text:
            q = parse_rational(text)
            return mpmath.mpf(q.numerator) / q.denominator
        try:
            return mpmath.mpf(text)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"not a real number: {text!r}") from exc


def is_rational_text(text: str) -> bool:
    try:
        Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        return False
    return True


def format_scalar(value, precision: int = DEFAULT_PRECISION_BITS) -> str:
    """Serialize a coefficient as a string preserving ``precision`` bits."""
    if isinstance(value, (Fraction, int)):
        return str(value)
    if isinstance(value, mpmath.mpf):
        digits = max(17, int(precision * 0.30103) + 2)
        with mp.workprec(precision + 8):
            return mpmath.nstr(value, digits, min_fixed=-4, max_fixed=30)
    return repr(value)


def infer_field(values, precision: int | None = None) -> Field:
    """Rational when every value is exactly rational, otherwise float."""
    for v in values:
        if isinstance(v, str):
            if not is_rational_text(v):
                return float_field(precision)
        elif isinstance(v, (float, mpmath.mpf)):
            return float_field(precision)
    return Field("rational", precision or DEFAULT_PRECISION_BITS)
