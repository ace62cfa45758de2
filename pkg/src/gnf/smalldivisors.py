"""Small-divisor sequences, arithmetic conditions and majorant recursions.

Indexing conventions (lists are 0-based):

* ``omega[p]`` is omega_{p+1}, the worst nonzero divisor over
  ``2 <= |Q| <= 2^(p+1)``.  Brjuno partial sums and the Carletti-Marmi
  sequence read ``omega[p]`` wherever the formula has ``omega_{p+1}``.
* ``a_seq[k-1]`` is the divisor scale of coefficient degree ``k + 1``, i.e. the
  divisor that governs ``eta_k`` and ``U_k``.

Sequences of majorants are computed exactly over ``Fraction`` when their
inputs are rational, and otherwise in log space by the kernels (results are
returned as ``mpf`` so factorial growth never overflows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import kernels
from .errors import DomainError, InsufficientDataError, ParameterError

DEFAULT_QCAP = {1: 1024, 2: 1024, 3: 128}
FALLBACK_QCAP = 48
CONDITION_TOL = 1e-9


class OmegaList(list):
    """``omega`` values plus the scan horizon they are valid for."""

    def __init__(self, values, qcap: int, capped: bool, exact: bool):
        super().__init__(values)
        self.qcap = qcap
        self.capped = capped
        self.exact = exact

    @property
    def label(self) -> str:
        return f"capped at |Q| <= {self.qcap}" if self.capped else f"complete to |Q| <= {self.qcap}"


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _exact_values(values) -> list | None:
    out = []
    for v in values:
        if isinstance(v, bool):
            return None
        if isinstance(v, (int, Fraction)):
            out.append(Fraction(v))
        elif isinstance(v, str):
            try:
                out.append(Fraction(v))
            except ValueError:
                return None
        else:
            return None
    return out


def divisor_minima(eigenvalues: Sequence, qmax: int) -> tuple[list, bool]:
    """Per-degree minimum nonzero divisor for ``2 <= d <= qmax``.

    Returns ``(minima, exact)`` where ``minima[d]`` is ``None`` when every
    divisor of degree ``d`` vanishes.
    """
    exact = _exact_values(eigenvalues)
    if exact is not None:
        den = math.lcm(*(v.denominator for v in exact))
        nums = [int(v * den) for v in exact]
        if max(abs(x) for x in nums) * (qmax + 1) < kernels.INT_SCAN_LIMIT:
            raw = kernels.divisor_minima_int(nums, qmax)
        else:
            raw = kernels.python_backend.divisor_minima_int(nums, qmax)
        return [Fraction(v, den) if v else None for v in raw], True
    lam = [float(_to_mpf(v)) for v in eigenvalues]
    raw = kernels.divisor_minima_float(lam, qmax)
    return [mpmath.mpf(v) if v else None for v in raw], False


def omega_sequence(eigenvalues: Sequence, kmax: int, qcap: int | None = None) -> OmegaList:
    """``[omega_1, ..., omega_kmax]`` by brute force over ``|Q| <= min(2^k, qcap)``.

    Rational eigenvalues are scanned exactly (integer arithmetic); real ones
    in double precision with a relative zero tolerance of ``1e-12``.
    """
    if kmax < 1:
        raise ParameterError("kmax must be >= 1")
    n = len(eigenvalues)
    if qcap is None:
        qcap = DEFAULT_QCAP.get(n, FALLBACK_QCAP)
    limit = min(2 ** kmax, qcap)
    minima, exact = divisor_minima(eigenvalues, max(limit, 2))
    values = []
    running = None
    d_done = 1
    for k in range(1, kmax + 1):
        top = min(2 ** k, limit)
        for d in range(d_done + 1, top + 1):
            m = minima[d]
            if m is not None and (running is None or m < running):
                running = m
        d_done = max(d_done, top)
        values.append(running)
    return OmegaList(values, qcap, 2 ** kmax > qcap, exact)


def brjuno_partials(omega: Sequence) -> list:
    """Partial sums ``-sum_{p<=k} ln(omega[p]) / 2^p`` as floats."""
    out = []
    total = mpmath.mpf(0)
    with mpmath.workprec(113):
        for p, w in enumerate(omega):
            if w is None or w <= 0:
                raise DomainError(f"omega[{p}] = {w} is not positive")
            total -= mpmath.log(_to_mpf(w)) / 2 ** p
            out.append(float(total))
    return out


def carletti_marmi_sequence(omega: Sequence, alpha: float, beta: float) -> list:
    """``-2 sum_{p<=k} ln(omega_{p+1})/2^p - ln((2^k)!^(beta-alpha)) / 2^k`` per ``k``.

    ``omega[p]`` plays omega_{p+1}.
    """
    if beta < alpha:
        raise ParameterError("need beta >= alpha")
    gap = beta - alpha
    out = []
    total = mpmath.mpf(0)
    with mpmath.workprec(113):
        for k, w in enumerate(omega):
            if w is None or w <= 0:
                raise DomainError(f"omega[{k}] = {w} is not positive")
            total -= 2 * mpmath.log(_to_mpf(w)) / 2 ** k
            fact = mpmath.loggamma(2 ** k + 1) / 2 ** k
            out.append(float(total - gap * fact))
    return out


def carletti_marmi_holds(sequence: Sequence) -> bool:
    """Horizon-bounded diagnosis: no new running maximum over the last third.

    A heuristic echo of the lim sup condition, never a proof of it.
    """
    if len(sequence) < 3:
        raise InsufficientDataError("need at least 3 terms to diagnose")
    start = len(sequence) - max(1, len(sequence) // 3)
    running = max(sequence[:start])
    for v in sequence[start:]:
        if v > running + CONDITION_TOL * (1 + abs(running)):
            return False
        running = max(running, v)
    return True


def siegel_fit(a_seq: Sequence) -> tuple[float, float, float]:
    """Fit ``a_k >= c / k^tau`` on the running record minima of ``a_seq``.

    ``a_seq[k-1]`` is ``a_k``.  Returns ``(c, tau, residual)`` where the
    residual is the largest log-violation ``ln c - tau ln k - ln a_k`` over
    all finite entries (0 when the fit is a true lower bound).
    """
    pts = []
    running = None
    for k, a in enumerate(a_seq, start=1):
        if a is None:
            continue
        if running is None or a <= running:
            running = a
            pts.append((k, float(mpmath.log(_to_mpf(a)))))
    if len(pts) < 3:
        raise InsufficientDataError(f"need >= 3 record minima, have {len(pts)}")
    lk = np.array([math.log(k) for k, _ in pts])
    la = np.array([v for _, v in pts])
    design = np.column_stack([np.ones_like(lk), -lk])
    (lnc, tau), *_ = np.linalg.lstsq(design, la, rcond=None)
    if tau < 0:
        tau = 0.0
        lnc = float(np.mean(la))
    residual = 0.0
    for k, a in enumerate(a_seq, start=1):
        if a is None:
            continue
        viol = lnc - tau * math.log(k) - float(mpmath.log(_to_mpf(a)))
        residual = max(residual, viol)
    return float(math.exp(lnc)), float(tau), float(max(residual, 0.0))


def _check_divisors(a_seq: Sequence, kmax: int) -> None:
    if len(a_seq) < kmax:
        raise DomainError(f"need {kmax} divisor entries, have {len(a_seq)}")
    for k in range(kmax):
        a = a_seq[k]
        if a is None or a <= 0:
            raise DomainError(f"divisor for eta_{k + 1} is {a}; must be positive")


def _any_mpf(values) -> bool:
    return any(isinstance(v, mpmath.mpf) for v in values)


def eta_sequence(a_seq: Sequence, alpha, kmax: int) -> list:
    """``[eta_0, ..., eta_kmax]`` with ``eta_0 = 1`` and

    ``eta_k = max_mu max_{k_1+...+k_{mu+1}+mu=k} ((mu+1)!)^alpha prod eta_{k_i} / a``

    where ``a = a_seq[k-1]``.  Exact over ``Fraction`` for rational divisors
    and integer ``alpha``; at the ambient mpmath precision (at least 113
    bits) when any input is an ``mpf``; otherwise log-space via the kernels.
    """
    if kmax < 0:
        raise ParameterError("kmax must be >= 0")
    _check_divisors(a_seq, kmax)
    exact = _exact_values(a_seq[:kmax])
    if exact is not None and float(alpha).is_integer():
        return _eta_dp(exact, int(alpha), kmax, Fraction)
    if _any_mpf(list(a_seq[:kmax]) + [alpha]):
        with mpmath.workprec(max(mpmath.mp.prec, 113)):
            return _eta_dp([_to_mpf(a) for a in a_seq[:kmax]], mpmath.mpf(alpha), kmax,
                           mpmath.mpf)
    log_div = [float(mpmath.log(_to_mpf(a))) for a in a_seq[:kmax]]
    logs = kernels.log_eta_dp(log_div, float(alpha), kmax)
    with mpmath.workprec(113):
        return [mpmath.exp(v) for v in logs]


def _eta_dp(a: list, alpha, kmax: int, num) -> list:
    # best[(m, j)]: largest product of j etas with indices summing to m
    eta = [num(1)]
    best: dict = {}
    for k in range(1, kmax + 1):
        m = k - 1
        best[(m, 1)] = eta[m]
        for j in range(2, kmax + 2):
            best[(m, j)] = max(eta[t] * best[(m - t, j - 1)] for t in range(m + 1))
        top = max(num(math.factorial(mu + 1)) ** alpha * best[(k - mu, mu + 1)]
                  for mu in range(1, k + 1))
        eta.append(top / a[k - 1])
    return eta


def sigma_sequence(c, sigma0, kmax: int) -> tuple[list, list]:
    """``sigma_delta = sum_mu sum_{compositions} C^(mu+1) prod sigma_{delta_i}``.

    Exact for rational inputs, mpmath for ``mpf`` inputs, log-space kernel
    for plain floats.  Returns ``(sigma, ratios)`` with
    ``ratios[d] = sigma_{d+1} / sigma_d``.
    """
    if kmax < 0:
        raise ParameterError("kmax must be >= 0")
    if c < 0 or sigma0 <= 0:
        raise ParameterError("need C >= 0 and sigma0 > 0")
    exact = _exact_values([c, sigma0])
    if exact is not None:
        sigma = _sigma_dp(exact[0], exact[1], kmax, Fraction)
    elif _any_mpf([c, sigma0]):
        with mpmath.workprec(max(mpmath.mp.prec, 113)):
            sigma = _sigma_dp(_to_mpf(c), _to_mpf(sigma0), kmax, mpmath.mpf)
    else:
        log_c = float(mpmath.log(_to_mpf(c))) if c > 0 else float("-inf")
        logs = kernels.log_sigma_dp(log_c, float(mpmath.log(_to_mpf(sigma0))), kmax)
        with mpmath.workprec(113):
            sigma = [mpmath.exp(v) if v != float("-inf") else mpmath.mpf(0) for v in logs]
    ratios = []
    for d in range(kmax):
        ratios.append(sigma[d + 1] / sigma[d] if sigma[d] != 0 else None)
    return sigma, ratios


def _sigma_dp(c, s0, kmax: int, num) -> list:
    # tot[(m, j)]: sum over ordered j-part compositions of m of the sigma products
    sigma = [s0]
    tot: dict = {}
    for delta in range(1, kmax + 1):
        m = delta - 1
        tot[(m, 1)] = sigma[m]
        for j in range(2, kmax + 2):
            tot[(m, j)] = sum((sigma[t] * tot[(m - t, j - 1)] for t in range(m + 1)), num(0))
        sigma.append(sum((c ** (mu + 1) * tot[(delta - mu, mu + 1)] for mu in range(1, delta + 1)),
                         num(0)))
    return sigma


def gevrey_bound_fit(eta: Sequence) -> tuple[float, float]:
    """Least squares ``ln eta_k ~ beta ln k! + k ln C``; returns ``(beta, C)``."""
    if len(eta) < 4:
        raise InsufficientDataError("need at least 4 terms")
    ks, ys = [], []
    for k, v in enumerate(eta):
        if v is None or v <= 0:
            raise DomainError(f"eta_{k} = {v} is not positive")
        ks.append(k)
        ys.append(float(mpmath.log(_to_mpf(v))))
    lf = np.array([math.lgamma(k + 1) for k in ks])
    kk = np.array(ks, dtype=float)
    y = np.array(ys)
    (beta, lnc), *_ = np.linalg.lstsq(np.column_stack([lf, kk]), y, rcond=None)
    if beta < 0:
        beta = 0.0
        lnc = float(np.dot(kk, y) / np.dot(kk, kk))
    return float(beta), float(math.exp(lnc))


@dataclass
class MajorantSequences:
    alpha: float
    a_seq: list
    eta: list
    C: object
    sigma0: object
    sigma: list
    sigma_ratios: list
    beta_fit: tuple | None

    def to_dict(self) -> dict:
        return {
            "alpha": float(self.alpha),
            "C": _num(self.C),
            "sigma0": _num(self.sigma0),
            "a_seq": [_num(a) for a in self.a_seq],
            "eta": [_num(v) for v in self.eta],
            "sigma": [_num(v) for v in self.sigma],
            "sigma_ratios": [_num(v) for v in self.sigma_ratios],
            "beta_fit": None if self.beta_fit is None else
            {"beta": self.beta_fit[0], "C": self.beta_fit[1]},
        }


def majorant_sequences(a_seq: Sequence, alpha, c, sigma0, kmax: int) -> MajorantSequences:
    eta = eta_sequence(a_seq, alpha, kmax)
    sigma, ratios = sigma_sequence(c, sigma0, kmax)
    try:
        fit = gevrey_bound_fit(eta)
    except InsufficientDataError:
        fit = None
    return MajorantSequences(alpha, list(a_seq[:kmax]), eta, c, sigma0, sigma, ratios, fit)


@dataclass
class SmallDivisorReport:
    eigenvalues: list
    kmax: int
    omega: OmegaList
    brjuno_partials: list
    cm_sequence: list
    cm_holds: bool | None
    siegel: tuple | None
    a_seq: list
    alpha: float = 0.0
    beta: float = 0.0
    majorants: MajorantSequences | None = None
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [_num(v) for v in self.eigenvalues],
            "kmax": self.kmax,
            "alpha": self.alpha,
            "beta": self.beta,
            "omega": [_num(v) for v in self.omega],
            "omega_scan": self.omega.label,
            "brjuno_partials": self.brjuno_partials,
            "cm_sequence": self.cm_sequence,
            "cm_condition": None if self.cm_holds is None else
            {"holds_at_horizon": self.cm_holds, "horizon": self.kmax,
             "method": "running max flat over the last third (heuristic)"},
            "siegel_fit": None if self.siegel is None else
            dict(zip(("c", "tau", "residual"), self.siegel)),
            "a_seq": [_num(v) for v in self.a_seq],
            "majorants": None if self.majorants is None else self.majorants.to_dict(),
            "notes": list(self.notes),
        }

    def rows(self) -> list:
        """CSV rows: k, omega, brjuno_partial, cm, a, eta, sigma."""
        out = []
        maj = self.majorants
        for k in range(1, self.kmax + 1):
            out.append([
                k,
                _num(self.omega[k - 1]),
                self.brjuno_partials[k - 1] if self.brjuno_partials else "",
                self.cm_sequence[k - 1] if self.cm_sequence else "",
                _num(self.a_seq[k - 1]) if k - 1 < len(self.a_seq) else "",
                _num(maj.eta[k]) if maj and k < len(maj.eta) else "",
                _num(maj.sigma[k]) if maj and k < len(maj.sigma) else "",
            ])
        return out


def _num(v):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v.numerator)
    if isinstance(v, int):
        return v
    if isinstance(v, (mpmath.mpf, float, np.floating)):
        fv = float(v)
        if math.isinf(fv) or fv == 0 and v != 0:
            return mpmath.nstr(v, 17)
        return fv
    if isinstance(v, mpmath.mpc):
        return [float(v.real), float(v.imag)]
    return v


def small_divisor_report(eigenvalues: Sequence, kmax: int, alpha: float = 0.0,
                         beta: float | None = None, a_seq: Sequence | None = None,
                         c_const=None, sigma0=None, qcap: int | None = None) -> SmallDivisorReport:
    """Assemble all sequences for a diagonal spectrum.

    ``a_seq`` defaults to the brute-force per-degree minima; the majorants are
    included when ``c_const`` (the composition constant) is given.
    """
    if beta is None:
        beta = alpha
    omega = omega_sequence(eigenvalues, kmax, qcap)
    notes = []
    if omega.capped:
        notes.append(f"omega scan {omega.label}")
    if any(w is None for w in omega):
        notes.append("some omega_k undefined (all divisors zero)")
        partials, cm, holds = [], [], None
    else:
        partials = brjuno_partials(omega)
        cm = carletti_marmi_sequence(omega, alpha, beta)
        holds = carletti_marmi_holds(cm) if len(cm) >= 3 else None
    if a_seq is None:
        minima, _ = divisor_minima(eigenvalues, kmax + 1)
        a_seq = [minima[k + 1] for k in range(1, kmax + 1)]
    try:
        siegel = siegel_fit(a_seq)
    except InsufficientDataError as exc:
        siegel = None
        notes.append(f"siegel fit skipped: {exc}")
    maj = None
    if c_const is not None:
        if sigma0 is None:
            sigma0 = mpmath.sqrt(len(eigenvalues))
        maj = majorant_sequences(a_seq, alpha, c_const, sigma0, kmax)
    return SmallDivisorReport(list(eigenvalues), kmax, omega, partials, cm, holds, siegel,
                              list(a_seq), alpha, beta, maj, notes)
