# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: small-divisor scans and the majorant DPs.

Mirrors ``_kernels_py`` exactly; see there for the contracts.
"""

from libc.math cimport fabs, log1p, exp, lgamma, INFINITY
from libc.stdlib cimport malloc, free
from libc.string cimport memset

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline bint _next_composition(long long* q, int n):
    # lexicographically next-smaller exponent vector with the same total
    cdef int j, k
    cdef long long tail
    if n == 1:
        return False
    j = n - 2
    while j >= 0 and q[j] == 0:
        j -= 1
    if j < 0:
        return False
    q[j] -= 1
    tail = 0
    for k in range(j + 1, n):
        tail += q[k]
        q[k] = 0
    q[j + 1] = tail + 1
    return True


def divisor_minima_int(lam_num, int qmax):
    cdef int n = len(lam_num)
    cdef long long* lam = <long long*> malloc(n * sizeof(long long))
    cdef long long* q = <long long*> malloc(n * sizeof(long long))
    cdef int d, i, j
    cdef long long s, v, best
    out = [0] * (qmax + 1)
    try:
        for j in range(n):
            lam[j] = lam_num[j]
        for d in range(2, qmax + 1):
            best = 0
            for j in range(n):
                q[j] = 0
            q[0] = d
            while True:
                s = 0
                for j in range(n):
                    s += q[j] * lam[j]
                for i in range(n):
                    v = s - lam[i]
                    if v < 0:
                        v = -v
                    if v != 0 and (best == 0 or v < best):
                        best = v
                if not _next_composition(q, n):
                    break
            out[d] = best
    finally:
        free(lam)
        free(q)
    return out


def divisor_minima_float(lam_in, int qmax, double zero_tol=1e-12):
    cdef int n = len(lam_in)
    cdef double* lam = <double*> malloc(n * sizeof(double))
    cdef long long* q = <long long*> malloc(n * sizeof(long long))
    cdef int d, i, j
    cdef double s, v, best, thresh, scale = 0.0
    out = [0.0] * (qmax + 1)
    try:
        for j in range(n):
            lam[j] = lam_in[j]
            if fabs(lam[j]) > scale:
                scale = fabs(lam[j])
        for d in range(2, qmax + 1):
            best = 0.0
            thresh = zero_tol * d * scale
            for j in range(n):
                q[j] = 0
            q[0] = d
            while True:
                s = 0.0
                for j in range(n):
                    s += q[j] * lam[j]
                for i in range(n):
                    v = fabs(s - lam[i])
                    if v > thresh and (best == 0.0 or v < best):
                        best = v
                if not _next_composition(q, n):
                    break
            out[d] = best
    finally:
        free(lam)
        free(q)
    return out


def log_eta_dp(log_div, double alpha, int kmax):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eta = np.zeros(kmax + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] best = np.full((kmax + 1, kmax + 2), -INFINITY)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ldiv = np.asarray(log_div, dtype=np.float64)
    cdef int k, m, j, t, mu
    cdef double b, v, top
    for k in range(1, kmax + 1):
        m = k - 1
        best[m, 1] = eta[m]
        for j in range(2, kmax + 2):
            b = -INFINITY
            for t in range(m + 1):
                v = eta[t] + best[m - t, j - 1]
                if v > b:
                    b = v
            best[m, j] = b
        top = -INFINITY
        for mu in range(1, k + 1):
            v = alpha * lgamma(mu + 2) + best[k - mu, mu + 1]
            if v > top:
                top = v
        eta[k] = top - ldiv[k - 1]
    return [float(x) for x in eta]


cdef inline double _logaddexp(double a, double b):
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


def log_sigma_dp(double log_c, double log_sigma0, int kmax):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sig = np.full(kmax + 1, -INFINITY)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] tot = np.full((kmax + 1, kmax + 2), -INFINITY)
    cdef int delta, m, j, t, mu
    cdef double acc
    sig[0] = log_sigma0
    for delta in range(1, kmax + 1):
        m = delta - 1
        tot[m, 1] = sig[m]
        for j in range(2, kmax + 2):
            acc = -INFINITY
            for t in range(m + 1):
                acc = _logaddexp(acc, sig[t] + tot[m - t, j - 1])
            tot[m, j] = acc
        acc = -INFINITY
        for mu in range(1, delta + 1):
            acc = _logaddexp(acc, (mu + 1) * log_c + tot[delta - mu, mu + 1])
        sig[delta] = acc
    return [float(x) for x in sig]
