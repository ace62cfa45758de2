"""Gevrey norms of one-variable model functions via Taylor jets.

Functions are given as expressions in ``x`` (``exp(-1/x)``, ``1/(1-x)``,
``x**5`` ...), parsed with :mod:`ast` and evaluated either pointwise or as a
truncated Taylor expansion (a jet) whose coefficients follow from the usual
recurrences for products, quotients, ``exp``, ``log``, powers and
``sin``/``cos``.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import DomainError, ParameterError, ParseError
from .scalars import default_precision

RATIO_WINDOW = 5


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------

class Jet1D:
    """Taylor coefficients ``c_j = f^(j)(x0) / j!`` for ``j = 0..order``."""

    __slots__ = ("x0", "order", "coeffs")

    def __init__(self, x0, coeffs: Sequence):
        self.x0 = x0
        self.coeffs = list(coeffs)
        self.order = len(self.coeffs) - 1

    @classmethod
    def constant(cls, x0, value, order: int) -> "Jet1D":
        return cls(x0, [_mpf(value)] + [mpmath.mpf(0)] * order)

    @classmethod
    def variable(cls, x0, order: int) -> "Jet1D":
        c = [mpmath.mpf(0)] * (order + 1)
        c[0] = _mpf(x0)
        if order >= 1:
            c[1] = mpmath.mpf(1)
        return cls(x0, c)

    def derivative(self, j: int):
        return self.coeffs[j] * mpmath.factorial(j)

    def derivatives(self) -> list:
        return [self.derivative(j) for j in range(self.order + 1)]

    def _wrap(self, other) -> "Jet1D":
        if isinstance(other, Jet1D):
            return other
        return Jet1D.constant(self.x0, other, self.order)

    def __add__(self, other):
        o = self._wrap(other)
        return Jet1D(self.x0, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Jet1D(self.x0, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        o = self._wrap(other)
        a, b = self.coeffs, o.coeffs
        return Jet1D(self.x0, [mpmath.fsum(a[i] * b[k - i] for i in range(k + 1))
                               for k in range(self.order + 1)])

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._wrap(other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self._wrap(other) * self.reciprocal()

    def reciprocal(self) -> "Jet1D":
        u = self.coeffs
        if u[0] == 0:
            raise DomainError(f"reciprocal of a function vanishing at x0 = {self.x0}")
        r = [1 / u[0]]
        for k in range(1, self.order + 1):
            r.append(-mpmath.fsum(u[j] * r[k - j] for j in range(1, k + 1)) / u[0])
        return Jet1D(self.x0, r)

    def exp(self) -> "Jet1D":
        u = self.coeffs
        e = [mpmath.exp(u[0])]
        for k in range(1, self.order + 1):
            e.append(mpmath.fsum(j * u[j] * e[k - j] for j in range(1, k + 1)) / k)
        return Jet1D(self.x0, e)

    def log(self) -> "Jet1D":
        u = self.coeffs
        if u[0] <= 0:
            raise DomainError(f"log of a nonpositive value at x0 = {self.x0}")
        g = [mpmath.log(u[0])]
        for k in range(1, self.order + 1):
            s = k * u[k] - mpmath.fsum(j * g[j] * u[k - j] for j in range(1, k))
            g.append(s / (k * u[0]))
        return Jet1D(self.x0, g)

    def power(self, p) -> "Jet1D":
        if isinstance(p, int) or (isinstance(p, Fraction) and p.denominator == 1):
            p = int(p)
            if p >= 0:
                out = Jet1D.constant(self.x0, 1, self.order)
                base = self
                while p:
                    if p & 1:
                        out = out * base
                    p >>= 1
                    if p:
                        base = base * base
                return out
            return self.power(-p).reciprocal()
        u = self.coeffs
        if u[0] <= 0:
            raise DomainError(f"non-integer power of a nonpositive value at x0 = {self.x0}")
        pm = _mpf(p)
        v = [u[0] ** pm]
        for k in range(1, self.order + 1):
            s = mpmath.fsum((pm * j - (k - j)) * u[j] * v[k - j] for j in range(1, k + 1))
            v.append(s / (k * u[0]))
        return Jet1D(self.x0, v)

    def sin_cos(self) -> tuple["Jet1D", "Jet1D"]:
        u = self.coeffs
        s = [mpmath.sin(u[0])]
        c = [mpmath.cos(u[0])]
        for k in range(1, self.order + 1):
            s.append(mpmath.fsum(j * u[j] * c[k - j] for j in range(1, k + 1)) / k)
            c.append(-mpmath.fsum(j * u[j] * s[k - j] for j in range(1, k + 1)) / k)
        return Jet1D(self.x0, s), Jet1D(self.x0, c)

    def __repr__(self):
        return f"Jet1D(x0={self.x0}, order={self.order})"


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

_FUNCS = ("exp", "log", "sqrt", "sin", "cos")
_CONSTS = {"pi": math.pi, "e": math.e}


class Expression:
    """A parsed expression in the variables ``names`` (default ``("x",)``).

    Evaluates pointwise with :mod:`numpy` (vectorized) and, for a single
    variable, as a :class:`Jet1D`.
    """

    def __init__(self, text: str, names: Sequence[str] = ("x",)):
        self.text = text
        self.names = tuple(names)
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ParseError(f"cannot parse expression {text!r}: {exc.msg}") from exc
        self._check(tree.body)
        self.tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
                raise ParseError(f"unsupported operator in {self.text!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ParseError(f"unsupported unary operator in {self.text!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS \
                    or len(node.args) != 1 or node.keywords:
                raise ParseError(f"unsupported call in {self.text!r}; allowed: {', '.join(_FUNCS)}")
            self._check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id not in self.names and node.id not in _CONSTS:
                raise ParseError(f"unknown name {node.id!r} in {self.text!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ParseError(f"unsupported literal in {self.text!r}")
        else:
            raise ParseError(f"unsupported syntax in {self.text!r}")

    # pointwise -------------------------------------------------------------

    def __call__(self, *args):
        env = dict(zip(self.names, args))
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return self._num(self.tree, env)

    def _num(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTS[node.id]
        if isinstance(node, ast.UnaryOp):
            v = self._num(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            return getattr(np, node.func.id)(self._num(node.args[0], env))
        a, b = self._num(node.left, env), self._num(node.right, env)
        op = node.op
        if isinstance(op, ast.Add):
            return a + b
        if isinstance(op, ast.Sub):
            return a - b
        if isinstance(op, ast.Mult):
            return a * b
        if isinstance(op, ast.Div):
            return np.divide(a, b)
        return np.power(a, b)

    # jets ------------------------------------------------------------------

    def jet(self, x0, order: int, precision: int | None = None) -> Jet1D:
        if len(self.names) != 1:
            raise ParameterError("jets are one-dimensional")
        with mpmath.workprec(precision or default_precision()):
            return self._jet(self.tree, _mpf(x0), order)

    def _exponent(self, node):
        # integer / rational literal exponents stay exact
        if isinstance(node, ast.Constant):
            v = node.value
            return int(v) if float(v).is_integer() else Fraction(v).limit_denominator(10 ** 9)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            inner = self._exponent(node.operand)
            return None if inner is None else -inner
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
            a, b = self._exponent(node.left), self._exponent(node.right)
            if a is not None and b is not None:
                r = Fraction(a) / Fraction(b)
                return int(r) if r.denominator == 1 else r
        return None

    def _jet(self, node, x0, order) -> Jet1D:
        if isinstance(node, ast.Constant):
            return Jet1D.constant(x0, node.value, order)
        if isinstance(node, ast.Name):
            if node.id in self.names:
                return Jet1D.variable(x0, order)
            return Jet1D.constant(x0, mpmath.pi if node.id == "pi" else mpmath.e, order)
        if isinstance(node, ast.UnaryOp):
            v = self._jet(node.operand, x0, order)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            arg = self._jet(node.args[0], x0, order)
            name = node.func.id
            if name == "exp":
                return arg.exp()
            if name == "log":
                return arg.log()
            if name == "sqrt":
                return arg.power(Fraction(1, 2))
            s, c = arg.sin_cos()
            return s if name == "sin" else c
        op = node.op
        if isinstance(op, ast.Pow):
            p = self._exponent(node.right)
            base = self._jet(node.left, x0, order)
            if p is not None:
                return base.power(p)
            return (base.log() * self._jet(node.right, x0, order)).exp()
        a, b = self._jet(node.left, x0, order), self._jet(node.right, x0, order)
        if isinstance(op, ast.Add):
            return a + b
        if isinstance(op, ast.Sub):
            return a - b
        if isinstance(op, ast.Mult):
            return a * b
        return a / b

    def __repr__(self):
        return f"Expression({self.text!r})"


def _as_expression(expr) -> Expression:
    return expr if isinstance(expr, Expression) else Expression(expr)


def jet_evaluate(expr, x0, order: int, precision: int | None = None) -> Jet1D:
    """Taylor jet of ``expr`` at ``x0`` through ``order``."""
    if order < 0:
        raise ParameterError("order must be >= 0")
    return _as_expression(expr).jet(x0, order, precision)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass
class NormTable:
    alpha: float
    L: float
    partial_sums: list       # S_0 .. S_Jmax
    increments: list         # term j of the sum
    ratio: float | None      # mean increment ratio over the last window
    diverges: bool

    def rows(self) -> list:
        return [[j, mpmath.nstr(s, 17), mpmath.nstr(t, 17)]
                for j, (s, t) in enumerate(zip(self.partial_sums, self.increments))]


def _mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _max_derivatives(expr: Expression, points, order: int, precision) -> list:
    best = [mpmath.mpf(0)] * (order + 1)
    for x in points:
        d = expr.jet(x, order, precision).derivatives()
        best = [max(b, abs(v)) for b, v in zip(best, d)]
    return best


def _weighted_sums(derivs: Sequence, alpha, width, count: int) -> tuple[list, list]:
    sums, terms = [], []
    acc = mpmath.mpf(0)
    for j in range(count):
        t = mpmath.power(width, alpha * j) / mpmath.factorial(j) ** alpha * derivs[j]
        acc += t
        terms.append(t)
        sums.append(acc)
    return sums, terms


def _ratio(terms: Sequence):
    tail = [t for t in terms[-(RATIO_WINDOW + 1):]]
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a != 0]
    if not ratios:
        return None
    return float(mpmath.exp(mpmath.fsum(mpmath.log(r) for r in ratios if r > 0) / len(ratios))) \
        if all(r > 0 for r in ratios) else None


def truncated_gevrey_norm(expr, points: Sequence, alpha, L, jmax: int,
                          precision: int | None = None) -> NormTable:
    """Partial sums ``S_J = sum_{j<=J} L^(alpha j) / (j!)^alpha max_K |f^(j)|``.

    Divergence is flagged when the geometric mean ratio of the last five
    increments is at least 1.
    """
    if alpha < 1:
        raise ParameterError("alpha must be >= 1")
    if L <= 0:
        raise ParameterError("L must be positive")
    if jmax < 0:
        raise ParameterError("jmax must be >= 0")
    e = _as_expression(expr)
    with mpmath.workprec(precision or default_precision()):
        derivs = _max_derivatives(e, points, jmax, precision)
        sums, terms = _weighted_sums(derivs, _mpf(alpha), _mpf(L), jmax + 1)
        ratio = _ratio(terms)
    return NormTable(float(alpha), float(L), sums, terms, ratio,
                     bool(ratio is not None and ratio >= 1))


@dataclass
class LemmaTable:
    lhs: list
    rhs: list
    holds: list

    def __bool__(self) -> bool:
        return all(self.holds)


def derivative_lemma_table(expr, points: Sequence, alpha, L, lam, j: int, jmax: int,
                           tighten=1, precision: int | None = None) -> LemmaTable:
    """Both sides of ``S_J(f^(j); L - lam) <= j!^alpha lam^(-j alpha) S_J(f; L)``
    for ``J = 0..jmax``; the right side is divided by ``tighten``."""
    if not 0 < lam < L:
        raise ParameterError("need 0 < lambda < L")
    if j < 0 or jmax < 0:
        raise ParameterError("j and jmax must be >= 0")
    if alpha < 1:
        raise ParameterError("alpha must be >= 1")
    e = _as_expression(expr)
    with mpmath.workprec(precision or default_precision()):
        a, Lm, lm = _mpf(alpha), _mpf(L), _mpf(lam)
        derivs = _max_derivatives(e, points, jmax + j, precision)
        lhs, _ = _weighted_sums(derivs[j:], a, Lm - lm, jmax + 1)
        base, _ = _weighted_sums(derivs, a, Lm, jmax + 1)
        factor = mpmath.factorial(j) ** a * mpmath.power(lm, -j * a) / tighten
        rhs = [factor * s for s in base]
        holds = [bool(l <= r) for l, r in zip(lhs, rhs)]
    return LemmaTable(lhs, rhs, holds)


def derivative_lemma_check(expr, points: Sequence, alpha, L, lam, j: int, jmax: int,
                           tighten=1) -> bool:
    """True when the derivative estimate holds at every truncation ``J <= jmax``."""
    return bool(derivative_lemma_table(expr, points, alpha, L, lam, j, jmax, tighten))


def flat_constant_check(alpha, L, lam):
    """``C = (1 - lam / L^(alpha/(alpha-1)))^(-(alpha-1))``.

    Exact (a ``Fraction``) when all inputs are rational and the powers are
    rational; an ``mpf`` otherwise.
    """
    if not alpha > 1:
        raise ParameterError("alpha must be > 1")
    if not (L > 0 and lam > 0):
        raise ParameterError("L and lambda must be positive")
    try:
        a, Lf, lf = Fraction(alpha), Fraction(L), Fraction(lam)
        exact = not any(isinstance(v, float) and not v.is_integer() for v in (alpha, L, lam))
    except (TypeError, ValueError):
        exact = False
    if exact:
        expo = a / (a - 1)
        if expo.denominator == 1 or Lf == 1:
            lp = Lf ** int(expo) if expo.denominator == 1 else Fraction(1)
            if not lf < lp:
                raise ParameterError("need lambda < L^(alpha/(alpha-1))")
            base = 1 - lf / lp
            outer = -(a - 1)
            if outer.denominator == 1:
                return base ** int(outer)
    with mpmath.workprec(default_precision()):
        am, Lm, lm = (_mpf(v) for v in (alpha, L, lam))
        lp = Lm ** (am / (am - 1))
        if not lm < lp:
            raise ParameterError("need lambda < L^(alpha/(alpha-1))")
        return (1 - lm / lp) ** (-(am - 1))


__all__ = ["Jet1D", "Expression", "jet_evaluate", "NormTable", "truncated_gevrey_norm",
           "LemmaTable", "derivative_lemma_table", "derivative_lemma_check",
           "flat_constant_check"]
