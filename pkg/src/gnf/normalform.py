"""Degree-by-degree normalization of ``X = L + R``.

We look for ``Id + U`` and ``N`` with ``X o (Id + U) = D(Id + U) . N``.  At
coefficient degree ``t`` the unknowns ``U_t`` and ``N_t`` enter only through
``[L, U_t] + N_t``, so each degree reduces to one cohomological solve:

    [L, U_t] + N_t = {R o (Id + U_<t)}_t - sum_{a+b-1=t} DU_a . N_b

Degrees are polynomial degrees throughout this module: ``U_delta`` in the
small-divisor notation is the degree ``delta + 1`` part here.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import mpmath
import numpy as np

from .errors import DomainError, InsufficientDataError, ParameterError, TruncationError
from .homological import (LINEARIZE, NORMAL_FORM, LinearPart, build_degree_operator,
                          solve_cohomological)
from .polyvec import (GradedVectorField, HomogeneousVF, fischer_norm, jacobian_apply,
                      lie_bracket, substitute)
from .smalldivisors import eta_sequence, sigma_sequence


@dataclass
class NormalizationResult:
    X: GradedVectorField
    mode: str
    U: GradedVectorField            # zero linear part, degrees 2..nmax
    N: GradedVectorField            # linear part L
    a_seq: list                     # a_seq[t-2] governs the degree-t solve
    u_norms: list                   # u_norms[t-2] = |U_t|
    n_norms: list
    residuals: list | None = None
    majorant: list | None = None
    gevrey_fit: tuple | None = None
    notes: list = dc_field(default_factory=list)

    @property
    def nmax(self) -> int:
        return self.X.nmax

    def rows(self, eta=None, sigma=None) -> list:
        """CSV rows ``(delta, |U|, |N|, eta, sigma, residual)``."""
        out = []
        for t in range(2, self.nmax + 1):
            delta = t - 1
            out.append([
                delta,
                _f(self.u_norms[t - 2]),
                _f(self.n_norms[t - 2]),
                _f(eta[delta]) if eta is not None and delta < len(eta) else "",
                _f(sigma[delta]) if sigma is not None and delta < len(sigma) else "",
                _f(self.residuals[t - 2]) if self.residuals else "",
            ])
        return out


def _f(v):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return str(v)
    return mpmath.nstr(mpmath.mpf(v), 17) if not isinstance(v, (int, float)) else v


def _mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _zero_linear(n: int, field) -> LinearPart:
    return LinearPart([[field.zero] * n for _ in range(n)], field)


def normalize(X: GradedVectorField, mode: str = NORMAL_FORM, tol: float | None = None,
              acknowledge_nonhyperbolic: bool = False) -> NormalizationResult:
    """Compute ``U`` (degrees ``2..X.nmax``) and the normal form ``N``.

    ``mode`` is ``"linearize"`` (any resonant remainder aborts) or
    ``"normal_form"``.  ``tol`` defaults to 0 for rational fields and
    ``1e-10`` (relative to the degree's right-hand side) for float fields.
    """
    if mode not in (LINEARIZE, NORMAL_FORM):
        raise ParameterError(f"unknown mode {mode!r}")
    if X.nmax < 2:
        raise TruncationError("need nmax >= 2")
    L = X.linear
    if L.is_zero():
        raise DomainError("linear part is zero; every monomial is resonant")
    if mode == LINEARIZE and not L.hyperbolic and not acknowledge_nonhyperbolic:
        raise ParameterError("linear part is not hyperbolic; pass acknowledge_nonhyperbolic=True")
    n, field = X.n, X.field
    rparts = dict(X.parts)
    u_parts: dict[int, HomogeneousVF] = {}
    n_parts: dict[int, HomogeneousVF] = {}
    a_seq, u_norms, n_norms = [], [], []
    with field.context():
        for t in range(2, X.nmax + 1):
            composed = substitute(rparts, u_parts, n, t, field, mindeg=t)[t]
            if u_parts and n_parts:
                composed = composed - jacobian_apply(u_parts, n_parts, n, t, field, mindeg=t)[t]
            op = build_degree_operator(L, t - 1)
            u_t, n_t = solve_cohomological(op, composed, mode, tol)
            a_seq.append(op.a_k)
            if not u_t.is_zero():
                u_parts[t] = u_t
            if not n_t.is_zero():
                n_parts[t] = n_t
            u_norms.append(fischer_norm(u_t))
            n_norms.append(fischer_norm(n_t))
    U = GradedVectorField(_zero_linear(n, field), u_parts, X.nmax)
    N = GradedVectorField(L, n_parts, X.nmax)
    return NormalizationResult(X, mode, U, N, a_seq, u_norms, n_norms)


def pushforward_check(X: GradedVectorField, result: NormalizationResult,
                      tol: float | None = None) -> list:
    """Per-degree Fischer norms of ``{X o (Id+U) - D(Id+U) . N}_t``, ``t = 2..nmax``.

    Evaluated by direct series substitution, independently of the engine's
    incremental bookkeeping.  Stores the residuals on ``result`` and returns
    them; ``result.notes`` records any degree above ``tol * (1 + |X_t|)``.
    """
    if result.X.nmax != X.nmax:
        raise TruncationError("result was computed at a different truncation")
    n, field, nmax = X.n, X.field, X.nmax
    if tol is None:
        tol = 0 if field.exact else 1e-10
    with field.context():
        lhs = substitute(X.all_parts(), dict(result.U.parts), n, nmax, field, mindeg=1)
        rhs = jacobian_apply(dict(result.U.parts), result.N.all_parts(), n, nmax, field, mindeg=1)
        residuals = []
        for t in range(2, nmax + 1):
            r = fischer_norm(lhs[t] - rhs[t])
            residuals.append(r)
            if r > tol * (1 + fischer_norm(X.part(t))):
                result.notes.append(f"conjugacy residual {mpmath.nstr(r, 6)} at degree {t}")
    result.residuals = residuals
    return residuals


def composition_constant(X: GradedVectorField, alpha) -> mpmath.mpf:
    """``C = max_mu (|R_mu| / ((mu+1)!)^alpha)^(1/(mu+1))`` over the stored degrees."""
    with mpmath.workprec(X.field.precision):
        best = mpmath.mpf(0)
        for d, p in X.parts.items():
            mu = d - 1
            val = (fischer_norm(p) / mpmath.factorial(d) ** alpha) ** (mpmath.mpf(1) / d)
            best = max(best, val)
    return best


MAJORANT_SLACK = 1e-12


def majorant_check(X: GradedVectorField, result: NormalizationResult, alpha,
                   a_seq: Sequence | None = None) -> list:
    """``|U_delta| <= eta_delta sigma_delta`` for ``delta = 1..nmax-1``.

    ``a_seq`` defaults to the divisor scales the engine met.  A relative
    slack of ``1e-12`` absorbs rounding where the bound is attained.
    Returns ``(delta, |U_delta|, eta_delta * sigma_delta, ok)`` tuples.
    """
    kmax = X.nmax - 1
    a_seq = list(result.a_seq if a_seq is None else a_seq)
    if len(a_seq) < kmax or any(a is None for a in a_seq[:kmax]):
        raise DomainError("a_seq is missing entries for the requested horizon")
    out = []
    with mpmath.workprec(max(X.field.precision, 113)):
        eta = eta_sequence(a_seq, alpha, kmax)
        sigma, _ = sigma_sequence(composition_constant(X, alpha), mpmath.sqrt(X.n), kmax)
        for delta in range(1, kmax + 1):
            u = mpmath.mpf(result.u_norms[delta - 1])
            bound = _mpf(eta[delta]) * _mpf(sigma[delta])
            out.append((delta, u, bound, bool(u <= bound * (1 + MAJORANT_SLACK))))
    result.majorant = out
    return out


def gevrey_order_fit(norms: Sequence, orders: Sequence | None = None,
                     min_points: int = 5) -> tuple[float, float, float]:
    """Fit ``ln|U| ~ beta ln(m!) + m ln C + b``; returns ``(beta, C, R^2)``.

    ``orders`` gives the index ``m`` of each norm (default ``1, 2, ...``).
    Zero norms are dropped; ``beta`` is clipped at 0 (and the remaining
    parameters refit).
    """
    if orders is None:
        orders = range(1, len(norms) + 1)
    pts = [(int(m), float(mpmath.log(mpmath.mpf(v))))
           for m, v in zip(orders, norms) if v is not None and v != 0]
    if len(pts) < min_points:
        raise InsufficientDataError(f"need >= {min_points} nonzero norms, have {len(pts)}")
    m = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    lf = np.array([math.lgamma(k + 1) for k in m])
    design = np.column_stack([lf, m, np.ones_like(m)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    beta, lnc, b = coef
    if beta < 0:
        beta = 0.0
        (lnc, b), *_ = np.linalg.lstsq(design[:, 1:], y, rcond=None)
    pred = beta * lf + lnc * m + b
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(beta), float(math.exp(lnc)), r2


def normal_form_commutes(result: NormalizationResult) -> list:
    """``[S, N_t]`` per degree for a diagonal linear part (zero when ``N`` is normal)."""
    L = result.N.linear
    if not L.diagonal:
        raise ParameterError("commutation test needs a diagonal linear part")
    S = L.as_field()
    return [lie_bracket(S, result.N.part(t)) for t in range(2, result.nmax + 1)]


__all__ = ["NormalizationResult", "normalize", "pushforward_check", "majorant_check",
           "composition_constant", "gevrey_order_fit", "normal_form_commutes",
           "LINEARIZE", "NORMAL_FORM"]
