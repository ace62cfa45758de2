"""Sparse homogeneous polynomial vector fields over R^n.

Monomials are keyed by exponent tuples ``Q`` (a multi-index, ``|Q| = sum(Q)``)
and vector-field coefficients by ``(i, Q)`` with ``i`` the 0-based component.
A field ``sum_{i,Q} f_{i,Q} x^Q d/dx_i`` is stored in canonical order:
component-major, then lexicographically descending exponents (so ``x1^d``
comes first within a degree).

Degrees are *coefficient* degrees throughout: a :class:`HomogeneousVF` of
degree ``d`` has every ``|Q| = d``.  The linear part has degree 1.

The Fischer (Bombieri) inner product weights the monomial ``x^Q`` by
``Q!/|Q|!``; distinct monomials are orthogonal.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from operator import add
from types import MappingProxyType
from typing import TYPE_CHECKING, Iterable, Mapping

import mpmath

from .errors import NotAUnitError, ScalarFieldError, ShapeError, TruncationError
from .scalars import RATIONAL, Field

if TYPE_CHECKING:
    from .homological import LinearPart

MultiIndex = tuple


# ---------------------------------------------------------------------------
# multi-indices
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def multi_indices(n: int, d: int) -> tuple:
    """All ``Q`` in N^n with ``|Q| = d``, lexicographically descending."""
    if n < 1 or d < 0:
        raise ShapeError("need n >= 1 and d >= 0")
    out = []
    for combo in combinations_with_replacement(range(n), d):
        q = [0] * n
        for j in combo:
            q[j] += 1
        out.append(tuple(q))
    out.sort(reverse=True)
    return tuple(out)


def unit_index(n: int, j: int) -> tuple:
    q = [0] * n
    q[j] = 1
    return tuple(q)


@lru_cache(maxsize=4096)
def mi_factorial(q: tuple) -> int:
    out = 1
    for e in q:
        out *= math.factorial(e)
    return out


@lru_cache(maxsize=4096)
def fischer_weight(q: tuple) -> Fraction:
    """``<x^Q, x^Q> = Q!/|Q|!``."""
    return Fraction(mi_factorial(q), math.factorial(sum(q)))


def _canon_key(key):
    i, q = key
    return (i, tuple(-e for e in q))


# ---------------------------------------------------------------------------
# scalar polynomials as dicts Q -> coefficient
# ---------------------------------------------------------------------------

def poly_add_into(acc: dict, p: Mapping, scale=None) -> None:
    for q, c in p.items():
        v = c if scale is None else c * scale
        acc[q] = acc.get(q, 0) + v


def poly_mul(a: Mapping, b: Mapping, maxdeg: int | None = None) -> dict:
    out: dict = {}
    for qa, ca in a.items():
        da = sum(qa)
        for qb, cb in b.items():
            if maxdeg is not None and da + sum(qb) > maxdeg:
                continue
            q = tuple(map(add, qa, qb))
            out[q] = out.get(q, 0) + ca * cb
    return out


def poly_deriv(p: Mapping, j: int) -> dict:
    out = {}
    for q, c in p.items():
        e = q[j]
        if e:
            r = list(q)
            r[j] = e - 1
            out[tuple(r)] = c * e
    return out


def _strip(p: dict) -> dict:
    return {q: c for q, c in p.items() if c != 0}


# ---------------------------------------------------------------------------
# homogeneous vector fields
# ---------------------------------------------------------------------------

class HomogeneousVF:
    """Homogeneous polynomial vector field of a fixed coefficient degree.

    Immutable; zero coefficients are never stored.
    """

    __slots__ = ("n", "degree", "field", "_coeffs")

    def __init__(self, n: int, degree: int, coeffs: Mapping | Iterable = (),
                 field: Field = RATIONAL):
        if n < 1:
            raise ShapeError("dimension must be >= 1")
        if degree < 0:
            raise ShapeError("degree must be >= 0")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict = {}
        with field.context():
            for (i, q), c in items:
                q = tuple(int(e) for e in q)
                if not 0 <= i < n or len(q) != n or min(q) < 0:
                    raise ShapeError(f"bad key {(i, q)} for dimension {n}")
                if sum(q) != degree:
                    raise ShapeError(f"monomial {q} has degree {sum(q)}, expected {degree}")
                c = _coerce_fast(field, c)
                acc[(i, q)] = acc[(i, q)] + c if (i, q) in acc else c
        self.n = n
        self.degree = degree
        self.field = field
        self._coeffs = MappingProxyType(
            {k: acc[k] for k in sorted(acc, key=_canon_key) if acc[k] != 0})

    @classmethod
    def _raw(cls, n, degree, coeffs: dict, field: Field) -> "HomogeneousVF":
        # trusted constructor: keys valid, values already in ``field``
        self = object.__new__(cls)
        self.n = n
        self.degree = degree
        self.field = field
        self._coeffs = MappingProxyType(
            {k: coeffs[k] for k in sorted(coeffs, key=_canon_key) if coeffs[k] != 0})
        return self

    @classmethod
    def zero(cls, n: int, degree: int, field: Field = RATIONAL) -> "HomogeneousVF":
        return cls._raw(n, degree, {}, field)

    @classmethod
    def from_components(cls, n: int, degree: int, components, field: Field = RATIONAL):
        if len(components) != n:
            raise ShapeError("need one component per dimension")
        coeffs = {}
        for i, comp in enumerate(components):
            for q, c in comp.items():
                if sum(q) != degree:
                    raise ShapeError(f"monomial {q} has degree {sum(q)}, expected {degree}")
                coeffs[(i, q)] = c
        return cls(n, degree, coeffs, field)

    @classmethod
    def from_matrix(cls, matrix, field: Field = RATIONAL) -> "HomogeneousVF":
        """Degree-1 field ``sum_i (sum_j a_ij x_j) d/dx_i``."""
        n = len(matrix)
        coeffs = {}
        for i, row in enumerate(matrix):
            if len(row) != n:
                raise ShapeError("matrix must be square")
            for j, a in enumerate(row):
                coeffs[(i, unit_index(n, j))] = a
        return cls(n, 1, coeffs, field)

    # mapping-like access ---------------------------------------------------
    @property
    def coeffs(self) -> Mapping:
        return self._coeffs

    def items(self):
        return self._coeffs.items()

    def __getitem__(self, key):
        return self._coeffs.get(key, self.field.zero)

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def components(self) -> list:
        comps = [dict() for _ in range(self.n)]
        for (i, q), c in self._coeffs.items():
            comps[i][q] = c
        return comps

    def to_matrix(self) -> list:
        if self.degree != 1:
            raise ShapeError("only degree-1 fields have a matrix")
        m = [[self.field.zero] * self.n for _ in range(self.n)]
        for (i, q), c in self._coeffs.items():
            m[i][q.index(1)] = c
        return m

    # arithmetic ------------------------------------------------------------
    def _check_same(self, other: "HomogeneousVF") -> None:
        if not isinstance(other, HomogeneousVF):
            raise TypeError("expected a HomogeneousVF")
        if other.n != self.n or other.degree != self.degree:
            raise ShapeError(
                f"shape mismatch: (n={self.n}, d={self.degree}) vs (n={other.n}, d={other.degree})")
        if other.field.kind != self.field.kind:
            raise ScalarFieldError("cannot mix rational and float coefficients")

    def __add__(self, other: "HomogeneousVF") -> "HomogeneousVF":
        self._check_same(other)
        out = dict(self._coeffs)
        with self.field.context():
            for k, c in other._coeffs.items():
                out[k] = out[k] + c if k in out else c
        return HomogeneousVF._raw(self.n, self.degree, out, self.field)

    def __neg__(self) -> "HomogeneousVF":
        # mpf negation rounds to the ambient precision
        with self.field.context():
            return HomogeneousVF._raw(self.n, self.degree,
                                      {k: -c for k, c in self._coeffs.items()}, self.field)

    def __sub__(self, other: "HomogeneousVF") -> "HomogeneousVF":
        return self + (-other)

    def scale(self, s) -> "HomogeneousVF":
        s = _coerce_fast(self.field, s)
        with self.field.context():
            return HomogeneousVF._raw(self.n, self.degree,
                                      {k: c * s for k, c in self._coeffs.items()}, self.field)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogeneousVF):
            return NotImplemented
        return (self.n, self.degree) == (other.n, other.degree) and \
            dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash((self.n, self.degree, tuple(self._coeffs.items())))

    def with_field(self, field: Field) -> "HomogeneousVF":
        if field == self.field:
            return self
        return HomogeneousVF(self.n, self.degree, {k: _convert(field, c) for k, c in self.items()},
                             field)

    def fischer_norm(self):
        return fischer_norm(self)

    def evaluate(self, x) -> list:
        """Numeric value at the point ``x`` (any numeric type)."""
        out = [0] * self.n
        for (i, q), c in self._coeffs.items():
            term = c
            for xj, e in zip(x, q):
                if e:
                    term = term * xj ** e
            out[i] = out[i] + term
        return out

    def __repr__(self):
        terms = ", ".join(f"{c}*x^{q}d{i + 1}" for (i, q), c in list(self.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"HomogeneousVF(n={self.n}, d={self.degree}, [{terms}{more}])"


def _coerce_fast(field: Field, c):
    if field.exact:
        if type(c) is Fraction:
            return c
    elif type(c) is mpmath.mpf:
        return c
    return field.coerce(c)


def _convert(field: Field, c):
    # explicit field change (not "mixing"): go through a value both sides accept
    if field.exact and isinstance(c, mpmath.mpf):
        man, exp = c.man_exp
        return Fraction(man) * Fraction(2) ** exp
    return field.coerce(c)


def identity_field(n: int, field: Field = RATIONAL) -> HomogeneousVF:
    return HomogeneousVF(n, 1, {(i, unit_index(n, i)): 1 for i in range(n)}, field)


# ---------------------------------------------------------------------------
# Fischer product
# ---------------------------------------------------------------------------

def fischer_inner(f: HomogeneousVF, g: HomogeneousVF):
    """``sum_{i,Q} f_{i,Q} g_{i,Q} Q!/|Q|!`` (exact for rationals)."""
    f._check_same(g)
    small, big = (f, g) if len(f) <= len(g) else (g, f)
    field = f.field
    total = field.zero
    with field.context():
        for k, c in small.items():
            other = big._coeffs.get(k)
            if other is not None:
                w = fischer_weight(k[1])
                if field.exact:
                    total += c * other * w
                else:
                    total += c * other * w.numerator / w.denominator
    return total


def fischer_norm(f: HomogeneousVF):
    """Fischer norm as an ``mpf`` at the field's precision."""
    field = f.field
    with field.context():
        if field.exact:
            s = Fraction(0)
            for (i, q), c in f.items():
                s += c * c * fischer_weight(q)
            return mpmath.sqrt(mpmath.mpf(s.numerator) / s.denominator)
        s = mpmath.mpf(0)
        for (i, q), c in f.items():
            w = fischer_weight(q)
            s += c * c * w.numerator / w.denominator
        return mpmath.sqrt(s)


# ---------------------------------------------------------------------------
# graded fields
# ---------------------------------------------------------------------------

class GradedVectorField:
    """Truncated field ``L + sum_{d=2}^{nmax} X_d``."""

    __slots__ = ("n", "linear", "nmax", "field", "_parts")

    def __init__(self, linear: "LinearPart", parts: Mapping[int, HomogeneousVF] | None = None,
                 nmax: int | None = None):
        self.n = linear.n
        self.linear = linear
        self.field = linear.field
        parts = dict(parts or {})
        if nmax is None:
            nmax = max(parts, default=1)
        self.nmax = nmax
        clean = {}
        for d, p in sorted(parts.items()):
            if p.n != self.n:
                raise ShapeError("all parts must share the dimension")
            if p.degree != d:
                raise ShapeError(f"part at key {d} has degree {p.degree}")
            if d < 2:
                raise ShapeError("nonlinear parts start at degree 2")
            if p.field.kind != self.field.kind:
                raise ScalarFieldError("parts and linear part use different fields")
            if d > nmax:
                continue
            if not p.is_zero():
                clean[d] = p
        self._parts = MappingProxyType(clean)

    @property
    def parts(self) -> Mapping[int, HomogeneousVF]:
        return self._parts

    def part(self, d: int) -> HomogeneousVF:
        if d == 1:
            return self.linear.as_field()
        p = self._parts.get(d)
        return p if p is not None else HomogeneousVF.zero(self.n, d, self.field)

    def all_parts(self) -> dict:
        """Degree -> part, including the linear part at degree 1."""
        out = {1: self.linear.as_field()}
        out.update(self._parts)
        return out

    def truncate(self, nmax: int) -> "GradedVectorField":
        return GradedVectorField(self.linear, {d: p for d, p in self._parts.items() if d <= nmax},
                                 nmax)

    def with_parts(self, parts: Mapping[int, HomogeneousVF]) -> "GradedVectorField":
        return GradedVectorField(self.linear, parts, self.nmax)

    def __eq__(self, other):
        if not isinstance(other, GradedVectorField):
            return NotImplemented
        return (self.nmax == other.nmax and self.linear.matrix == other.linear.matrix
                and dict(self._parts) == dict(other._parts))

    def evaluate(self, x) -> list:
        out = self.linear.as_field().evaluate(x)
        for p in self._parts.values():
            out = [a + b for a, b in zip(out, p.evaluate(x))]
        return out

    def __repr__(self):
        return (f"GradedVectorField(n={self.n}, nmax={self.nmax}, "
                f"degrees={sorted(self._parts)}, field={self.field.describe()})")


# ---------------------------------------------------------------------------
# Lie bracket
# ---------------------------------------------------------------------------

def _bracket_homogeneous(x: HomogeneousVF, y: HomogeneousVF) -> HomogeneousVF:
    # [X, Y] = DY.X - DX.Y
    if x.n != y.n:
        raise ShapeError("dimension mismatch in Lie bracket")
    if x.field.kind != y.field.kind:
        raise ScalarFieldError("cannot mix rational and float coefficients")
    n = x.n
    field = x.field
    xc, yc = x.components(), y.components()
    out_deg = x.degree + y.degree - 1
    if out_deg < 0:
        return HomogeneousVF.zero(n, 0, field)
    acc: dict = {}
    with field.context():
        for j in range(n):
            if xc[j]:
                for i in range(n):
                    dy = poly_deriv(yc[i], j)
                    if dy:
                        for q, c in poly_mul(xc[j], dy).items():
                            acc[(i, q)] = acc.get((i, q), 0) + c
            if yc[j]:
                for i in range(n):
                    dx = poly_deriv(xc[i], j)
                    if dx:
                        for q, c in poly_mul(yc[j], dx).items():
                            acc[(i, q)] = acc.get((i, q), 0) - c
    return HomogeneousVF._raw(n, out_deg, acc, field)


def lie_bracket(x, y):
    """Lie bracket ``[X, Y] = DY.X - DX.Y``.

    Homogeneous inputs of degrees d1, d2 give degree d1 + d2 - 1.  Graded
    inputs are truncated at the smaller ``nmax``; the linear part of the
    result is the commutator of the linear parts.
    """
    if isinstance(x, HomogeneousVF) and isinstance(y, HomogeneousVF):
        return _bracket_homogeneous(x, y)
    if isinstance(x, GradedVectorField) and isinstance(y, GradedVectorField):
        if x.n != y.n:
            raise ShapeError("dimension mismatch in Lie bracket")
        from .homological import LinearPart

        nmax = min(x.nmax, y.nmax)
        xp, yp = x.all_parts(), y.all_parts()
        acc: dict[int, HomogeneousVF] = {}
        for dx, px in xp.items():
            for dy, py in yp.items():
                d = dx + dy - 1
                if d > nmax:
                    continue
                b = _bracket_homogeneous(px, py)
                acc[d] = acc[d] + b if d in acc else b
        lin = acc.pop(1)
        linear = LinearPart(lin.to_matrix(), field=x.field)
        return GradedVectorField(linear, {d: p for d, p in acc.items() if d >= 2}, nmax)
    raise TypeError("lie_bracket needs two HomogeneousVF or two GradedVectorField")


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def _graded_components(n: int, parts: Mapping[int, HomogeneousVF], identity: bool, field: Field):
    """Components of ``Id + U`` (or of ``U``) as dicts Q -> coefficient."""
    comps = [dict() for _ in range(n)]
    if identity:
        for j in range(n):
            comps[j][unit_index(n, j)] = field.one
    with field.context():
        for p in parts.values():
            for (i, q), c in p.items():
                comps[i][q] = comps[i].get(q, 0) + c
    return comps


def substitute(x_parts: Mapping[int, HomogeneousVF], u_parts: Mapping[int, HomogeneousVF],
               n: int, maxdeg: int, field: Field, mindeg: int = 0) -> dict:
    """Homogeneous parts of ``X o (Id + U)`` for degrees ``mindeg..maxdeg``.

    Straight polynomial substitution: powers of each component of
    ``Id + U`` are built by repeated truncated multiplication.
    """
    v = _graded_components(n, {d: p for d, p in u_parts.items() if d <= maxdeg}, True, field)
    pow_cache: dict = {}

    def power(j, k):
        key = (j, k)
        if key not in pow_cache:
            if k == 0:
                pow_cache[key] = {(0,) * n: field.one}
            else:
                pow_cache[key] = poly_mul(power(j, k - 1), v[j], maxdeg)
        return pow_cache[key]

    mono_cache: dict = {}

    def monomial(q):
        if q not in mono_cache:
            acc = {(0,) * n: field.one}
            for j, e in enumerate(q):
                if e:
                    acc = poly_mul(acc, power(j, e), maxdeg)
            mono_cache[q] = acc
        return mono_cache[q]

    out_comps = [dict() for _ in range(n)]
    with field.context():
        for d, p in x_parts.items():
            if d > maxdeg:
                continue
            for (i, q), c in p.items():
                poly_add_into(out_comps[i], monomial(q), c)
    return _split_by_degree(out_comps, n, mindeg, maxdeg, field)


def _split_by_degree(comps, n, mindeg, maxdeg, field) -> dict:
    by_deg: dict = {d: {} for d in range(mindeg, maxdeg + 1)}
    for i, comp in enumerate(comps):
        for q, c in comp.items():
            d = sum(q)
            if mindeg <= d <= maxdeg and c != 0:
                by_deg[d][(i, q)] = c
    return {d: HomogeneousVF._raw(n, d, cf, field) for d, cf in by_deg.items()}


def jacobian_apply(u_parts: Mapping[int, HomogeneousVF], y_parts: Mapping[int, HomogeneousVF],
                   n: int, maxdeg: int, field: Field, mindeg: int = 0) -> dict:
    """Homogeneous parts of ``D(Id + U) . Y`` for degrees ``mindeg..maxdeg``."""
    out_comps = [dict() for _ in range(n)]
    ycomps = _graded_components(n, y_parts, False, field)
    ucomps = _graded_components(n, u_parts, False, field)
    with field.context():
        for i in range(n):
            poly_add_into(out_comps[i], {q: c for q, c in ycomps[i].items() if sum(q) <= maxdeg})
            for j in range(n):
                du = poly_deriv(ucomps[i], j)
                if du and ycomps[j]:
                    poly_add_into(out_comps[i], poly_mul(du, ycomps[j], maxdeg))
    return _split_by_degree(out_comps, n, mindeg, maxdeg, field)


def _as_parts(x) -> tuple:
    if isinstance(x, GradedVectorField):
        return x.n, x.field, dict(x.parts), x.nmax
    if isinstance(x, Mapping):
        parts = dict(x)
        any_part = next(iter(parts.values()))
        return any_part.n, any_part.field, parts, max(parts)
    raise TypeError("expected a GradedVectorField or a mapping degree -> HomogeneousVF")


def compose_truncated(r, u, delta: int) -> HomogeneousVF:
    """Degree-``delta + 1`` part of ``R o (Id + U)``.

    ``r`` and ``u`` contribute their nonlinear parts only (a graded field's
    linear part is ignored).  ``r`` must be known through degree
    ``delta + 1`` and ``u`` through degree ``delta``.
    """
    if delta < 1:
        raise TruncationError("delta must be >= 1")
    n, field, rparts, rmax = _as_parts(r)
    if isinstance(u, GradedVectorField) or (isinstance(u, Mapping) and u):
        un, ufield, uparts, umax = _as_parts(u)
        if un != n:
            raise ShapeError("dimension mismatch")
        if ufield.kind != field.kind:
            raise ScalarFieldError("cannot mix rational and float coefficients")
    else:
        uparts, umax = {}, delta
    if rmax < delta + 1:
        raise TruncationError(f"R known through degree {rmax}, need {delta + 1}")
    if umax < delta:
        raise TruncationError(f"U known through degree {umax}, need {delta}")
    target = delta + 1
    rparts = {d: p for d, p in rparts.items() if d >= 2}
    uparts = {d: p for d, p in uparts.items() if 2 <= d <= delta}
    return substitute(rparts, uparts, n, target, field, mindeg=target)[target]


# ---------------------------------------------------------------------------
# scalar power series
# ---------------------------------------------------------------------------

def series_reciprocal(s: Mapping, nmax: int) -> dict:
    """Truncated ``1/s`` for a multivariate series ``s`` (dict Q -> coeff).

    Solves ``s * r = 1`` degree by degree, so every term of ``r`` of degree
    at most ``nmax`` is exact in the coefficient arithmetic used.  Float
    coefficients are combined at the ambient mpmath precision.
    """
    if not s:
        raise NotAUnitError("zero series has no reciprocal")
    n = len(next(iter(s)))
    zero = (0,) * n
    c0 = s.get(zero, 0)
    if c0 == 0:
        raise NotAUnitError("constant term is zero")
    graded: dict = {}
    for q, c in s.items():
        if c != 0:
            graded.setdefault(sum(q), {})[q] = c
    inv0 = 1 / c0 if not isinstance(c0, int) else Fraction(1, c0)
    r: dict = {0: {zero: inv0}}
    for d in range(1, nmax + 1):
        acc: dict = {}
        for k in range(1, d + 1):
            sk = graded.get(k)
            rk = r.get(d - k)
            if sk and rk:
                for q, c in poly_mul(sk, rk).items():
                    acc[q] = acc.get(q, 0) + c
        r[d] = {q: -c * inv0 for q, c in acc.items() if c != 0}
    out = {}
    for d in range(nmax + 1):
        out.update(r[d])
    return out


def series_truncate(s: Mapping, nmax: int) -> dict:
    return {q: c for q, c in s.items() if sum(q) <= nmax and c != 0}
