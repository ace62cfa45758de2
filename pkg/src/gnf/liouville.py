"""A Liouville-type rotation number forcing Gevrey divergence of the linearizer.

``zeta`` is built as a continued fraction whose partial quotients are chosen
so that each convergent denominator ``q_{n+1}`` just exceeds
``(q_n!)^(beta-alpha)``.  After the last stored quotient the expansion
continues with ones, so every complete quotient is an explicit algebraic
number and

    p_n - zeta q_n = (-1)^(n-1) / (q_n zeta_{n+1} + q_{n-1})

is known to full *relative* precision however tiny it is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
from mpmath import iv

from .errors import DomainError, ParameterError
from .homological import LINEARIZE, LinearPart
from .normalform import gevrey_order_fit, normalize
from .polyvec import GradedVectorField, HomogeneousVF, series_reciprocal
from .scalars import float_field

MIN_PRECISION = 256
# q! is formed exactly; beyond this the construction stops with a horizon note
FACTORIAL_LIMIT = 200_000
FIRST_QUOTIENT = 2


@dataclass
class LiouvilleData:
    gap: Fraction | float               # beta - alpha
    precision: int
    quotients: list                     # a_1 .. a_{n+1}; ones afterwards
    convergents: list                   # (p_n, q_n), n = 1..horizon
    zeta: mpmath.mpf
    errors: list                        # p_n - zeta q_n as mpf (relative precision)
    upper_ok: list
    lower_ok: list
    c: mpmath.mpf                       # lower band constant
    horizon: int
    notes: list = dc_field(default_factory=list)

    def __repr__(self) -> str:
        # the last quotient has ~10^5 digits; keep the repr printable
        return (f"LiouvilleData(gap={self.gap}, precision={self.precision}, "
                f"convergents={self.convergents}, horizon={self.horizon})")

    def to_dict(self, alpha=None) -> dict:
        with mpmath.workprec(self.precision):
            return {
                "beta_minus_alpha": str(self.gap),
                "precision_bits": self.precision,
                "zeta": mpmath.nstr(self.zeta, 40),
                "convergents": [[p, q] for p, q in self.convergents],
                "partial_quotients": [str(a) if a.bit_length() <= 64 else
                                      f"~10^{len(str(a)) - 1}" for a in self.quotients[:-1]]
                + [f"~10^{_digits(self.quotients[-1]) - 1}"],
                "errors_p_minus_zeta_q": [mpmath.nstr(e, 25) for e in self.errors],
                "upper_bound_verified": self.upper_ok,
                "lower_bound_verified": self.lower_ok,
                "c": mpmath.nstr(self.c, 25),
                "horizon": self.horizon,
                "notes": list(self.notes),
            }


def _digits(a: int) -> int:
    # decimal digit count without converting a huge int to a string
    if a.bit_length() < 3000:
        return len(str(a))
    return int(a.bit_length() * math.log10(2)) + 1


def _factorial_power(q: int, gap, ctx):
    """``(q!)^gap`` as an interval (``ctx`` is ``mpmath.iv``)."""
    fact = ctx.mpf(math.factorial(q))
    g = Fraction(gap)
    if g.denominator == 1:
        return fact ** int(g)
    return ctx.exp(ctx.log(fact) * ctx.mpf(g.numerator) / g.denominator)


def _ceil_power(q: int, gap) -> int:
    """``ceil((q!)^gap)`` exactly for integer gaps, via rounding up otherwise."""
    g = Fraction(gap)
    if g.denominator == 1:
        return math.factorial(q) ** int(g)
    with mpmath.workprec(64 + int(g * math.lgamma(q + 1) / math.log(2)) + 64):
        return int(mpmath.ceil(mpmath.mpf(math.factorial(q)) ** (mpmath.mpf(g.numerator) / g.denominator)))


def build_liouville_zeta(beta_minus_alpha, n_terms: int, precision_bits: int = MIN_PRECISION
                         ) -> LiouvilleData:
    """Continued fraction ``[0; a_1, a_2, ...]`` with convergents in the Diophantine band.

    ``a_{n+1}`` is the least quotient with ``q_{n+1} >= (q_n!)^(beta-alpha)``,
    which gives ``|zeta - p_n/q_n| < 1/(q_n (q_n!)^(beta-alpha))``.  The lower
    band constant ``c`` is the smallest ``(q_n!)^(beta-alpha) q_n |zeta - p_n/q_n|``
    over the stored ``n``.  Both bounds are checked in interval arithmetic.
    """
    if n_terms < 1:
        raise ParameterError("n_terms must be >= 1")
    gap = Fraction(beta_minus_alpha) if not isinstance(beta_minus_alpha, float) \
        else Fraction(beta_minus_alpha).limit_denominator(10 ** 6)
    if gap < 1:
        raise ParameterError("beta - alpha must be >= 1")
    precision = max(precision_bits, MIN_PRECISION)
    notes = []
    quotients = [FIRST_QUOTIENT]
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    convergents = []
    p, q, p_prev, q_prev = FIRST_QUOTIENT * p + p_prev, FIRST_QUOTIENT * q + q_prev, p, q
    convergents.append((p, q))
    horizon = n_terms
    for n in range(1, n_terms + 1):
        if q > FACTORIAL_LIMIT:
            horizon = n - 1
            convergents = convergents[:horizon]
            quotients = quotients[:horizon + 1]
            notes.append(f"stopped at n = {horizon}: q_{n}! exceeds the factorial limit")
            break
        target = _ceil_power(q, gap)
        a = max(1, -(-(target - q_prev) // q))
        quotients.append(a)
        p, q, p_prev, q_prev = a * p + p_prev, a * q + q_prev, p, q
        if n < n_terms:
            convergents.append((p, q))
    if horizon < 1:
        raise DomainError("no convergent could be verified")

    with mpmath.workprec(precision):
        # complete quotients zeta_k = a_k + 1/zeta_{k+1}, with a golden tail
        phi = (1 + mpmath.sqrt(5)) / 2
        complete = {len(quotients) + 1: phi}
        for k in range(len(quotients), 0, -1):
            complete[k] = quotients[k - 1] + 1 / complete[k + 1]
        zeta = 1 / complete[1]
        errors = []
        q_before = 1  # q_0
        for n, (pn, qn) in enumerate(convergents, start=1):
            e = (-1) ** (n - 1) / (qn * complete[n + 1] + q_before)
            errors.append(e)
            q_before = qn

    upper_ok, cs = [], []
    q_before = 1
    for n, (pn, qn) in enumerate(convergents, start=1):
        # |zeta - p/q| (q!)^gap = (q!)^gap / (q zeta_{n+1} + q_{n-1}) must be < 1
        with _interval_prec(quotients, n, precision):
            ratio = _factorial_power(qn, gap, iv) / _denominator_iv(quotients, n, qn, q_before)
            upper_ok.append(bool(ratio.b < 1))
            cs.append(mpmath.mpf(ratio.a))
        q_before = qn
    c = min(cs)
    lower_ok = [bool(cn >= c > 0) for cn in cs]
    return LiouvilleData(gap, precision, quotients, convergents, zeta, errors, upper_ok, lower_ok,
                         c, horizon, notes)


class _interval_prec:
    """Interval precision wide enough to resolve ``q_{n+1}`` against ``(q_n!)^gap``."""

    def __init__(self, quotients, n, precision):
        q_prev, q = 0, 1
        for a in quotients[:n + 1]:
            q_prev, q = q, a * q + q_prev
        self.bits = precision + q.bit_length() + 64

    def __enter__(self):
        self.saved = iv.prec
        iv.prec = self.bits
        return self

    def __exit__(self, *exc):
        iv.prec = self.saved
        return False


def _denominator_iv(quotients, n, qn, q_before):
    """Interval for ``q_n zeta_{n+1} + q_{n-1}``, i.e. ``1/|p_n - zeta q_n|``."""
    comp = (1 + iv.sqrt(5)) / 2
    for k in range(len(quotients), n, -1):
        comp = iv.mpf(quotients[k - 1]) + 1 / comp
    return iv.mpf(qn) * comp + q_before


def liouville_field(data: LiouvilleData, alpha, nmax: int) -> GradedVectorField:
    """``X = f S`` with ``S = x d/dx - zeta y d/dy`` and
    ``f = 1 / (1 - sum_n (q_n!)^alpha x^p_n y^q_n)`` truncated at degree ``nmax``.

    The first nonlinear term has degree ``p_1 + q_1 + 1``; below that ``X = S``.
    """
    field = float_field(data.precision)
    notes = []
    with field.context():
        zeta = data.zeta
        linear = LinearPart([[field.one, field.zero], [field.zero, -zeta]], field,
                            eigenvalues=(field.one, -zeta))
        g = {(0, 0): field.one}
        for pn, qn in data.convergents:
            if pn + qn <= nmax - 1:
                g[(pn, qn)] = -mpmath.mpf(math.factorial(qn)) ** alpha
        if len(g) == 1:
            notes.append("truncation below the first correction; X = S")
            return GradedVectorField(linear, {}, max(nmax, 1))
        f = series_reciprocal(g, nmax - 1)
        parts: dict = {}
        for (i, j), c in f.items():
            d = i + j + 1
            if d < 2 or d > nmax or c == 0:
                continue
            acc = parts.setdefault(d, {})
            acc[(0, (i + 1, j))] = c
            acc[(1, (i, j + 1))] = -zeta * c
    return GradedVectorField(linear, {d: HomogeneousVF(2, d, cf, field) for d, cf in parts.items()},
                             nmax)


def closed_form_coefficient(data: LiouvilleData, alpha, n: int):
    """``(q_n!)^alpha / (p_n - zeta q_n)`` at the data's precision."""
    if not 1 <= n <= len(data.convergents):
        raise ParameterError(f"n must be in 1..{len(data.convergents)}")
    _, qn = data.convergents[n - 1]
    with mpmath.workprec(data.precision):
        if alpha == 0:
            return 1 / data.errors[n - 1]
        return mpmath.mpf(math.factorial(qn)) ** alpha / data.errors[n - 1]


def collides(convergents: list, n: int) -> bool:
    """True when ``(p_n, q_n)`` is a sum of two or more earlier exponent pairs.

    Counts for all but the last two earlier pairs are enumerated; the last
    two are then fixed by a 2x2 integer solve (or a 1-D scan when they are
    parallel).  Every ``p_k >= 1``, so each count is at most ``p_n``.
    """
    tp, tq = convergents[n - 1]
    gens = convergents[:n - 1]

    def last_two(rp, rq, used):
        (a, b), (c, d) = gens[-2:]
        det = a * d - b * c
        if det != 0:
            x_num, y_num = rp * d - rq * c, a * rq - b * rp
            if x_num % det or y_num % det:
                return False
            x, y = x_num // det, y_num // det
            return x >= 0 and y >= 0 and used + x + y >= 2
        for x in range(rp // a + 1):
            sp, sq = rp - x * a, rq - x * b
            if sp % c == 0 and sq == (sp // c) * d and used + x + sp // c >= 2:
                return True
        return False

    def search(k, rp, rq, used):
        if rp < 0 or rq < 0:
            return False
        left = len(gens) - k
        if left == 0:
            return rp == 0 and rq == 0 and used >= 2
        if left == 1:
            a, b = gens[k]
            return rp % a == 0 and rq == (rp // a) * b and used + rp // a >= 2
        if left == 2:
            return last_two(rp, rq, used)
        a, b = gens[k]
        top = min(rp // a, rq // b) if b else rp // a
        return any(search(k + 1, rp - c * a, rq - c * b, used + c) for c in range(top + 1))

    return search(0, tp, tq, 0)


@dataclass
class DivergenceReport:
    alpha: float
    beta: float
    nmax: int
    scales: list            # per n: dict with closed form, engine value, flags
    beta_hat: float | None
    fit_C: float | None
    fit_r2: float | None
    resonance_free: bool
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "nmax": self.nmax,
                "scales": self.scales, "beta_hat": self.beta_hat, "fit_C": self.fit_C,
                "fit_r2": self.fit_r2, "resonance_free": self.resonance_free,
                "notes": list(self.notes)}


def verify_divergence(data: LiouvilleData, alpha, nmax: int | None = None,
                      rel_tol: float = 1e-20) -> DivergenceReport:
    """Engine coefficients vs the closed form, plus the Gevrey growth of the latter.

    The engine runs in linearize mode at truncation ``nmax`` (default
    ``p_2 + q_2 + 1``).  For each ``n`` whose target monomial
    ``x^(p_n+1) y^q_n d/dx`` lies inside the truncation and is not reachable
    from products of earlier monomials, the engine coefficient is compared
    with the closed form.  The growth fit uses the closed-form magnitudes of
    every stored ``n``, indexed by ``q_n``.
    """
    conv = data.convergents
    if nmax is None:
        if len(conv) < 2:
            raise ParameterError("need at least two convergents for the default truncation")
        nmax = conv[1][0] + conv[1][1] + 1
    beta = float(alpha) + float(data.gap)
    notes = []
    X = liouville_field(data, alpha, nmax)
    result = normalize(X, LINEARIZE)
    scales = []
    with mpmath.workprec(data.precision):
        for n, (pn, qn) in enumerate(conv, start=1):
            closed = closed_form_coefficient(data, alpha, n)
            lower = mpmath.mpf(math.factorial(qn)) ** beta
            q_before = conv[n - 2][1] if n > 1 else 1
            with _interval_prec(data.quotients, n, data.precision):
                coef_iv = _denominator_iv(data.quotients, n, qn, q_before)
                if alpha != 0:
                    coef_iv = coef_iv * _factorial_power(qn, Fraction(alpha), iv)
                holds = bool(_factorial_power(qn, Fraction(beta), iv).b < coef_iv.a)
            entry = {
                "n": n, "p": pn, "q": qn,
                "closed_form": mpmath.nstr(closed, 30),
                "log10_abs_closed_form": float(mpmath.log10(abs(closed))),
                "log10_qfact_beta": float(mpmath.log10(lower)),
                "divergence_inequality": holds,
            }
            target = pn + qn + 1
            if target > nmax:
                entry["engine"] = None
                entry["status"] = "beyond truncation"
            elif collides(conv, n):
                entry["engine"] = None
                entry["status"] = "degree collision; comparison skipped"
            else:
                eng = result.U.part(target)[(0, (pn + 1, qn))]
                rel = abs(eng - closed) / abs(closed)
                entry["engine"] = mpmath.nstr(eng, 30)
                entry["relative_error"] = mpmath.nstr(rel, 5)
                entry["match"] = bool(rel <= rel_tol)
                entry["status"] = "compared"
            scales.append(entry)
        mags = [abs(closed_form_coefficient(data, alpha, n)) for n in range(1, len(conv) + 1)]
    try:
        beta_hat, c_hat, r2 = gevrey_order_fit(mags, orders=[q for _, q in conv], min_points=4)
    except DomainError as exc:  # the fit is diagnostic: report rather than abort
        beta_hat = c_hat = r2 = None
        notes.append(f"growth fit skipped: {exc}")
    return DivergenceReport(float(alpha), beta, nmax, scales, beta_hat, c_hat, r2, True, notes)


__all__ = ["LiouvilleData", "build_liouville_zeta", "liouville_field", "closed_form_coefficient",
           "collides", "verify_divergence", "DivergenceReport"]
