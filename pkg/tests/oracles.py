"""Independent reference computations used only by the tests."""

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product


def compositions(total, parts):
    """All ordered tuples of ``parts`` nonnegative integers summing to ``total``."""
    return [c for c in product(range(total + 1), repeat=parts) if sum(c) == total]


def eta_enumerated(a, alpha, kmax):
    """eta by trying every (mu, composition) directly; ``a[k-1]`` divides eta_k."""
    eta = [Fraction(1)]
    for k in range(1, kmax + 1):
        best = None
        for mu in range(1, k + 1):
            for comp in compositions(k - mu, mu + 1):
                v = Fraction(math.factorial(mu + 1)) ** alpha
                for ki in comp:
                    v *= eta[ki]
                best = v if best is None or v > best else best
        eta.append(best / a[k - 1])
    return eta


def sigma_enumerated(c, s0, kmax):
    sigma = [Fraction(s0)]
    for d in range(1, kmax + 1):
        tot = Fraction(0)
        for mu in range(1, d + 1):
            for comp in compositions(d - mu, mu + 1):
                v = Fraction(c) ** (mu + 1)
                for di in comp:
                    v *= sigma[di]
                tot += v
        sigma.append(tot)
    return sigma


def brute_divisors(lam, degree):
    """All nonzero ``|(Q, lam) - lam_i|`` for ``|Q| = degree`` (exact for Fractions)."""
    n = len(lam)
    out = []
    for q in product(range(degree + 1), repeat=n):
        if sum(q) != degree:
            continue
        s = sum(qj * lj for qj, lj in zip(q, lam))
        for i in range(n):
            v = abs(s - lam[i])
            if v != 0:
                out.append(v)
    return out
