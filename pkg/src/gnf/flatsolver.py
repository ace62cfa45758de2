"""Flow-integral solutions of ``L_X f = h`` and ``[X, Z] = Y`` for flat data.

``X`` contracts a neighbourhood of ``F = {x_p = ... = x_{n-1} = 0}``
(0-based fiber coordinates) in the sense ``-c rho^2 <= L_X(rho^2) <= -C rho^2``.
Then ``rho(phi_u x)`` decays at least like ``e^(-Cu/2)`` and data flat on
``F`` decays along the flow fast enough for

    f(x) = -int_0^oo h(phi_u x) du,     Z(x) = -int_0^oo F(x,u)^-1 Y(phi_u x) du

to converge; ``F`` is the fundamental matrix of the linearized flow.
Trajectories are integrated with scipy's DOP853, the integrand is carried as
extra states, and the tail beyond the last step is bounded from the decay
constants of the data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (BoxExitError, ConfigurationError, DivergenceError, IllConditionedError,
                     NotContractingError, ParameterError)

RATE_MARGIN = 1.05
RTOL = 1e-12
SANDWICH_TOL = 1e-7
MAX_WINDOWS = 60
FD_STEP = 1e-6


def _rho(x: np.ndarray, p: int) -> float:
    return float(np.sqrt(np.sum(np.asarray(x)[p:] ** 2)))


def _grid(box: Sequence, resolution: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    return np.array(list(itertools.product(*axes)))


def certify_contraction(vector_field: Callable, box: Sequence, resolution: int = 21,
                        p: int = 0) -> tuple[float, float]:
    """Sampled rates ``(c, C)`` with ``-c rho^2 <= L_X(rho^2) <= -C rho^2`` on ``box``.

    ``L_X(rho^2) = 2 sum_{i>=p} x_i X_i``.  The sampled extremes of
    ``-L_X(rho^2)/rho^2`` are widened by a factor 1.05 on each side.
    """
    if resolution < 2:
        raise ParameterError("resolution must be >= 2")
    lo_rate, hi_rate = math.inf, -math.inf
    for x in _grid(box, resolution):
        rho2 = float(np.sum(x[p:] ** 2))
        if rho2 == 0:
            continue
        v = np.asarray(vector_field(x), dtype=float)
        rate = -2.0 * float(np.dot(x[p:], v[p:])) / rho2
        if rate <= 0:
            raise NotContractingError(f"L_X(rho^2) = {-rate * rho2:.3g} >= 0 at {x.tolist()}",
                                      witness=x.tolist(), value=-rate * rho2)
        lo_rate, hi_rate = min(lo_rate, rate), max(hi_rate, rate)
    if not math.isfinite(lo_rate):
        raise ParameterError("box contains no point off the flat set")
    return hi_rate * RATE_MARGIN, lo_rate / RATE_MARGIN


@dataclass
class ContractionField:
    vector_field: Callable                  # x (ndarray) -> X(x)
    n: int
    p: int                                  # fiber coordinates are x[p:]
    box: list
    c: float
    C: float
    jacobian: Callable | None = None        # x -> DX(x), n x n

    @classmethod
    def certified(cls, vector_field, box, p: int = 0, resolution: int = 21, jacobian=None):
        box = [tuple(map(float, b)) for b in box]
        c, C = certify_contraction(vector_field, box, resolution, p)
        return cls(vector_field, len(box), p, box, c, C, jacobian)

    def __post_init__(self):
        if not 0 < self.C <= self.c:
            raise ParameterError("rates must satisfy 0 < C <= c")
        if len(self.box) != self.n or not 0 <= self.p < self.n:
            raise ParameterError("box and fiber split do not match the dimension")

    def jac(self, x: np.ndarray) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x), dtype=float).reshape(self.n, self.n)
        out = np.empty((self.n, self.n))
        for j in range(self.n):
            step = FD_STEP * (1 + abs(x[j]))
            e = np.zeros(self.n)
            e[j] = step
            out[:, j] = (np.asarray(self.vector_field(x + e)) -
                         np.asarray(self.vector_field(x - e))) / (2 * step)
        return out

    def jacobian_bound(self, resolution: int = 11) -> float:
        return RATE_MARGIN * max(np.linalg.norm(self.jac(x), 2) for x in _grid(self.box, resolution))

    def inside(self, x) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(x, self.box))


@dataclass
class FlatFunction:
    """Data ``h`` flat on ``F`` with optional decay ``|h| <= M exp(-eta rho^(-1/(beta-1)))``."""

    evaluator: Callable
    beta: float
    M: float | None = None
    eta: float | None = None

    def __post_init__(self):
        if not self.beta > 1:
            raise ParameterError("beta must be > 1")

    @property
    def has_decay(self) -> bool:
        return self.M is not None and self.eta is not None

    @property
    def gamma(self) -> float:
        return 1.0 / (self.beta - 1.0)

    def bound(self, rho: float) -> float:
        if rho == 0:
            return 0.0
        return self.M * math.exp(-self.eta * rho ** (-self.gamma))

    def verify(self, points: Sequence, p: int, rel: float = 1e-9) -> bool:
        """Sampled decay: ``|h(x)| <= M exp(-eta rho^-gamma)`` at each point."""
        if not self.has_decay:
            raise ConfigurationError("no decay constants declared")
        for x in points:
            x = np.asarray(x, dtype=float)
            if np.max(np.abs(self.evaluator(x))) > self.bound(_rho(x, p)) * (1 + rel) + 1e-300:
                return False
        return True


@dataclass
class FlowSolution:
    value: np.ndarray | float
    error_bound: float
    u_max: float
    sandwich_ok: bool
    windows: int
    notes: list = dc_field(default_factory=list)


def _tail_bound(h: FlatFunction, rho_end: float, C: float, growth: float = 0.0,
                weight: float = 1.0) -> float:
    """Bound on ``int_0^oo weight e^(growth s) |h(phi_s y)| ds`` from the decay constants.

    Uses ``rho(phi_s y) <= rho_end e^(-Cs/2)`` and ``e^t >= 1 + t``.
    """
    if rho_end == 0 or h.M == 0:
        return 0.0
    s0 = rho_end ** (-h.gamma)
    rate = h.eta * s0 * C * h.gamma / 2 - growth
    if rate <= 0:
        return math.inf
    return weight * h.M * math.exp(-h.eta * s0) / rate


class _Integrator:
    """Shared window loop for the scalar and bracket solvers."""

    def __init__(self, X: ContractionField, rhs, n_extra: int, quad_slice: slice):
        self.X = X
        self.rhs = rhs
        self.n_extra = n_extra
        self.quad = quad_slice
        self.sandwich_ok = True

    def _events(self):
        events = []
        for i, (lo, hi) in enumerate(self.X.box):
            for bound, sign in ((lo, 1.0), (hi, -1.0)):
                def ev(t, y, i=i, bound=bound, sign=sign):
                    return sign * (y[i] - bound)
                ev.terminal = True
                ev.direction = -1
                events.append(ev)
        return events

    def window(self, t0: float, t1: float, y0: np.ndarray, rho0: float, tol: float):
        n = self.X.n
        atol = np.full(y0.shape, 1e-14)
        atol[self.quad] = max(tol * 1e-3, 1e-300)
        sol = solve_ivp(self.rhs, (t0, t1), y0, method="DOP853", rtol=RTOL, atol=atol,
                        events=self._events(), dense_output=True)
        if sol.status == 1:
            te = sol.t_events
            hit = next(i for i, e in enumerate(te) if len(e))
            raise BoxExitError(f"trajectory left the box through face {hit} at u = {sol.t[-1]:.4g}")
        if sol.status < 0:
            raise DivergenceError(f"integration failed: {sol.message}")
        # rho sandwich along the window
        for u in np.linspace(t0, t1, 17):
            r = _rho(sol.sol(u)[:n], self.X.p)
            lo = rho0 * math.exp(-self.X.c * u / 2)
            hi = rho0 * math.exp(-self.X.C * u / 2)
            if r < lo * (1 - SANDWICH_TOL) - 1e-300 or r > hi * (1 + SANDWICH_TOL) + 1e-300:
                self.sandwich_ok = False
        return sol.y[:, -1]


def solve_lie_derivative(X: ContractionField, h: FlatFunction, x, tol: float = 1e-10
                         ) -> FlowSolution:
    """``f(x) = -int_0^oo h(phi_u x) du`` so that ``L_X f = h``.

    With decay constants the integration stops once the certified tail bound
    is below ``tol / 2``.  Without them, windows of doubling length are
    compared: growing window integrals mean ``h`` is not flat
    (:class:`DivergenceError`); decaying ones still leave the tail
    uncertified (:class:`ConfigurationError`).
    """
    x = np.asarray(x, dtype=float).reshape(X.n)
    if not X.inside(x):
        raise BoxExitError(f"start point {x.tolist()} is outside the box")
    n = X.n

    def rhs(t, y):
        out = np.empty(n + 1)
        out[:n] = X.vector_field(y[:n])
        out[n] = float(h.evaluator(y[:n]))
        return out

    integ = _Integrator(X, rhs, 1, slice(n, n + 1))
    rho0 = _rho(x, X.p)
    y = np.concatenate([x, [0.0]])
    t = 0.0
    length = 2.0 / X.C
    prev = None
    for k in range(MAX_WINDOWS):
        t1 = t + length
        y_new = integ.window(t, t1, y, rho0, tol)
        chunk = y_new[n] - y[n]
        y, t = y_new, t1
        if h.has_decay:
            if abs(float(h.evaluator(y[:n]))) > h.bound(_rho(y[:n], X.p)) * (1 + 1e-9) + 1e-300:
                raise DivergenceError(f"h exceeds its declared decay bound at {y[:n].tolist()}")
            tail = _tail_bound(h, _rho(y[:n], X.p), X.C)
            if tail < tol / 2:
                return FlowSolution(-y[n], tail + RTOL * abs(y[n]), t, integ.sandwich_ok, k + 1)
        else:
            if prev is not None:
                if abs(chunk) >= abs(prev) and chunk != 0:
                    raise DivergenceError("integrand does not decay over a doubling window; "
                                          "h is not flat along the flow")
                if chunk == 0 and prev == 0 and y[n] == 0:
                    return FlowSolution(0.0, 0.0, t, integ.sandwich_ok, k + 1,
                                        ["integrand vanished identically"])
                if abs(chunk) < tol:
                    raise ConfigurationError("h decays but has no decay constants; "
                                             "the tail cannot be bounded")
            prev = chunk
            length *= 2
    raise DivergenceError(f"tail bound not reached after {MAX_WINDOWS} windows")


def solve_lie_bracket(X: ContractionField, Y: Callable, h: FlatFunction, x,
                      tol: float = 1e-10) -> FlowSolution:
    """``Z(x) = -int_0^oo G(u) Y(phi_u x) du`` with ``G = F^-1``, ``dG/du = -G DX``.

    ``h`` carries the decay constants of ``|Y|`` (its evaluator is unused
    beyond bound checks).  ``[X, Z] = DZ.X - DX.Z = Y``.
    """
    if not h.has_decay:
        raise ConfigurationError("bracket solves need decay constants for Y")
    x = np.asarray(x, dtype=float).reshape(X.n)
    if not X.inside(x):
        raise BoxExitError(f"start point {x.tolist()} is outside the box")
    n = X.n
    nn = n * n
    kappa = X.jacobian_bound()

    def rhs(t, y):
        pos = y[:n]
        g = y[n:n + nn].reshape(n, n)
        out = np.empty(n + nn + n)
        out[:n] = X.vector_field(pos)
        out[n:n + nn] = (-g @ X.jac(pos)).ravel()
        out[n + nn:] = g @ np.asarray(Y(pos), dtype=float).reshape(n)
        return out

    integ = _Integrator(X, rhs, nn + n, slice(n + nn, n + nn + n))
    rho0 = _rho(x, X.p)
    y = np.concatenate([x, np.eye(n).ravel(), np.zeros(n)])
    t = 0.0
    length = 2.0 / X.C
    for k in range(MAX_WINDOWS):
        y = integ.window(t, t + length, y, rho0, tol)
        t += length
        g = y[n:n + nn].reshape(n, n)
        cond = np.linalg.cond(g)
        if cond > 1 / tol:
            raise IllConditionedError(f"fundamental matrix condition {cond:.3g} exceeds 1/tol")
        pos = y[:n]
        if np.max(np.abs(Y(pos))) > h.bound(_rho(pos, X.p)) * (1 + 1e-9) + 1e-300:
            raise DivergenceError(f"Y exceeds its declared decay bound at {pos.tolist()}")
        tail = _tail_bound(h, _rho(pos, X.p), X.C, growth=kappa, weight=np.linalg.norm(g, 2))
        if tail < tol / 2:
            z = -y[n + nn:]
            return FlowSolution(z, tail + RTOL * float(np.max(np.abs(z))), t,
                                integ.sandwich_ok, k + 1)
    raise DivergenceError(f"tail bound not reached after {MAX_WINDOWS} windows")


def lie_derivative_residual(X: ContractionField, f: Callable, h: Callable, points,
                            step: float = 1e-4) -> float:
    """Sup over ``points`` of ``|X . grad f - h|`` by central differences."""
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float).reshape(X.n)
        grad = np.empty(X.n)
        for j in range(X.n):
            e = np.zeros(X.n)
            e[j] = step
            grad[j] = (f(x + e) - f(x - e)) / (2 * step)
        v = np.asarray(X.vector_field(x), dtype=float)
        worst = max(worst, abs(float(np.dot(v, grad)) - float(h(x))))
    return worst


def bracket_residual(X: ContractionField, Z: Callable, Y: Callable, points,
                     step: float = 1e-4) -> float:
    """Sup over ``points`` of ``|DZ.X - DX.Z - Y|`` by central differences."""
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float).reshape(X.n)
        dz = np.empty((X.n, X.n))
        for j in range(X.n):
            e = np.zeros(X.n)
            e[j] = step
            dz[:, j] = (np.asarray(Z(x + e)) - np.asarray(Z(x - e))) / (2 * step)
        v = np.asarray(X.vector_field(x), dtype=float)
        r = dz @ v - X.jac(x) @ np.asarray(Z(x)) - np.asarray(Y(x), dtype=float)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def flat_decay_check(rho: Sequence, values: Sequence, beta: float,
                     eta_guess: float | None = None) -> tuple[float, bool]:
    """Fit ``ln|f| ~ const - eta rho^(-1/(beta-1))``; returns ``(eta, ok)``.

    ``ok`` needs ``eta > 0`` and the slopes fitted separately on the inner
    and outer halves of the samples to agree within a factor 4/3, which
    rejects power-law decay (its slope in ``t = rho^-gamma`` flattens as
    ``rho -> 0``).  All-zero samples pass vacuously with ``eta = inf``.
    ``eta_guess`` only seeds the report when the fit is degenerate.
    """
    if not beta > 1:
        raise ParameterError("beta must be > 1")
    pts = [(float(r), abs(float(v))) for r, v in zip(rho, values) if r > 0 and v != 0]
    if not pts:
        return math.inf, True
    if len(pts) < 4:
        raise ParameterError("need at least 4 nonzero samples")
    gamma = 1.0 / (beta - 1.0)
    pts.sort()
    t = np.array([r ** (-gamma) for r, _ in pts])
    y = np.array([math.log(v) for _, v in pts])

    def slope(tt, yy):
        return float(np.polyfit(tt, yy, 1)[0])

    eta = -slope(t, y)
    half = len(pts) // 2
    inner = -slope(t[:half], y[:half])
    outer = -slope(t[half:], y[half:])
    agree = inner > 0 and outer > 0 and 0.75 <= inner / outer <= 4 / 3
    if not math.isfinite(eta) and eta_guess is not None:
        eta = float(eta_guess)
    return eta, bool(eta > 0 and agree)


# ---------------------------------------------------------------------------
# catalog of model problems
# ---------------------------------------------------------------------------

def _contraction_1d(x):
    return -np.asarray(x, dtype=float)


def _fiber_2d(x):
    x = np.asarray(x, dtype=float)
    return np.array([-0.25 * x[0] * x[1] ** 2, -x[1] * (1 + 0.25 * x[0] ** 2)])


CATALOG = {
    "contraction-1d": dict(field=_contraction_1d, box=[(-1.0, 1.0)], p=0,
                           jacobian=lambda x: np.array([[-1.0]]),
                           data="exp(-1/x**2)", names=("x",), beta=1.5, M=1.0, eta=1.0),
    "fiber-2d": dict(field=_fiber_2d, box=[(-0.5, 0.5), (-0.5, 0.5)], p=1, jacobian=None,
                     data="exp(-1/y**2)", names=("x", "y"), beta=1.5, M=1.0, eta=1.0),
}


def quadrature_oracle_1d(h: Callable, x: float) -> float:
    """``-int_0^x h(s)/s ds`` for ``X = -x d/dx``: the reduced form of the flow integral."""
    from scipy.integrate import quad
    val, _ = quad(lambda s: h(s) / s if s != 0 else 0.0, 0.0, x, epsabs=1e-15, epsrel=1e-13,
                  limit=200)
    return -val


__all__ = ["certify_contraction", "ContractionField", "FlatFunction", "FlowSolution",
           "solve_lie_derivative", "solve_lie_bracket", "lie_derivative_residual",
           "bracket_residual", "flat_decay_check", "CATALOG", "quadrature_oracle_1d"]
