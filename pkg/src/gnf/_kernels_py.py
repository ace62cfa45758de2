"""Pure-Python reference kernels.

Same signatures and results as the compiled ``_kernels`` module; used when the
extension is not built or ``GNF_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import math

NEG_INF = float("-inf")


def _compositions(d: int, n: int):
    """Exponent tuples of total degree ``d`` in ``n`` variables (lex descending)."""
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            yield (first,) + rest


def divisor_minima_int(lam_num, qmax: int) -> list:
    """Per degree ``d`` (index ``d``), the min nonzero ``|(Q, lam) - lam_i|``.

    ``lam_num`` are integers (eigenvalues scaled by a common denominator), so
    everything is exact.  Entry 0 where a degree has only zero divisors;
    entries 0 and 1 are unused.
    """
    n = len(lam_num)
    out = [0] * (qmax + 1)
    for d in range(2, qmax + 1):
        best = 0
        for q in _compositions(d, n):
            s = 0
            for j in range(n):
                s += q[j] * lam_num[j]
            for i in range(n):
                v = abs(s - lam_num[i])
                if v != 0 and (best == 0 or v < best):
                    best = v
        out[d] = best
    return out


def divisor_minima_float(lam, qmax: int, zero_tol: float = 1e-12) -> list:
    """Float version of :func:`divisor_minima_int` (``0.0`` marks "none").

    A divisor counts as zero when ``|v| <= zero_tol * d * max|lam|``.
    """
    n = len(lam)
    scale = max(abs(x) for x in lam) if lam else 1.0
    out = [0.0] * (qmax + 1)
    for d in range(2, qmax + 1):
        best = 0.0
        thresh = zero_tol * d * scale
        for q in _compositions(d, n):
            s = 0.0
            for j in range(n):
                s += q[j] * lam[j]
            for i in range(n):
                v = abs(s - lam[i])
                if v > thresh and (best == 0.0 or v < best):
                    best = v
        out[d] = best
    return out


def log_eta_dp(log_div, alpha: float, kmax: int) -> list:
    """Log of the eta majorant sequence ``[log eta_0, ..., log eta_kmax]``.

    ``log_div[k - 1]`` is the log of the divisor dividing ``eta_k``.
    ``best[m][j]`` holds the log of the max product of ``j`` etas whose
    indices sum to ``m``.
    """
    log_eta = [0.0] * (kmax + 1)
    best = [[NEG_INF] * (kmax + 2) for _ in range(kmax + 1)]
    lfact = [math.lgamma(m + 1) for m in range(kmax + 3)]
    for k in range(1, kmax + 1):
        m = k - 1
        best[m][1] = log_eta[m]
        for j in range(2, kmax + 2):
            b = NEG_INF
            for t in range(m + 1):
                v = log_eta[t] + best[m - t][j - 1]
                if v > b:
                    b = v
            best[m][j] = b
        top = NEG_INF
        for mu in range(1, k + 1):
            v = alpha * lfact[mu + 1] + best[k - mu][mu + 1]
            if v > top:
                top = v
        log_eta[k] = top - log_div[k - 1]
    return log_eta


def _logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def log_sigma_dp(log_c: float, log_sigma0: float, kmax: int) -> list:
    """Log of the sigma majorant sequence ``[log sigma_0, ..., log sigma_kmax]``.

    ``tot[m][j]`` is the log of the sum over ordered compositions of ``m``
    into ``j`` parts of the product of sigmas.
    """
    log_sigma = [NEG_INF] * (kmax + 1)
    log_sigma[0] = log_sigma0
    tot = [[NEG_INF] * (kmax + 2) for _ in range(kmax + 1)]
    for delta in range(1, kmax + 1):
        m = delta - 1
        tot[m][1] = log_sigma[m]
        for j in range(2, kmax + 2):
            acc = NEG_INF
            for t in range(m + 1):
                acc = _logaddexp(acc, log_sigma[t] + tot[m - t][j - 1])
            tot[m][j] = acc
        acc = NEG_INF
        for mu in range(1, delta + 1):
            acc = _logaddexp(acc, (mu + 1) * log_c + tot[delta - mu][mu + 1])
        log_sigma[delta] = acc
    return log_sigma
