import math
from itertools import product
from fractions import Fraction

import mpmath
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from gnf.errors import ParameterError
from gnf.liouville import (build_liouville_zeta, closed_form_coefficient, collides,
                           liouville_field, verify_divergence)
from gnf.normalform import gevrey_order_fit


@pytest.fixture(scope="module")
def data():
    return build_liouville_zeta(1, 4)


def test_parameter_checks():
    with pytest.raises(ParameterError):
        build_liouville_zeta(1, 0)
    with pytest.raises(ParameterError):
        build_liouville_zeta(Fraction(1, 2), 3)


def test_convergents_shape(data):
    assert data.convergents == [(1, 2), (1, 3), (3, 8), (15121, 40323)]
    qs = [q for _, q in data.convergents]
    assert all(b > a for a, b in zip(qs, qs[1:]))
    assert all(math.gcd(p, q) == 1 for p, q in data.convergents)
    assert data.horizon == 4 and data.precision >= 256


def test_quotients_hit_the_band(data):
    # q_{n+1} is the first denominator reaching (q_n!)^gap
    qs = [1] + [q for _, q in data.convergents]
    for n in range(1, len(qs) - 1):
        need = math.factorial(qs[n])
        assert qs[n + 1] >= need
        assert qs[n + 1] - qs[n] < need


def test_errors_against_direct_evaluation(data):
    with mpmath.workprec(600):
        for (p, q), e in list(zip(data.convergents, data.errors))[:3]:
            direct = p - data.zeta * q
            assert abs(direct - e) <= mpmath.mpf(2) ** -200 * abs(e)


def test_convergent_property(data):
    with mpmath.workprec(data.precision):
        for (p, q), e in zip(data.convergents, data.errors):
            # |zeta - p/q| = |e| / q < 1/q^2
            assert abs(e) < mpmath.mpf(1) / q


def test_band_verified(data):
    assert all(data.upper_ok) and all(data.lower_ok)
    assert 0 < data.c <= 1


def test_band_small_scales_independently(data):
    with mpmath.workprec(1024):
        for (p, q), e in list(zip(data.convergents, data.errors))[:3]:
            scaled = abs(e) * math.factorial(q)          # q |zeta - p/q| (q!)^gap
            assert data.c * (1 - mpmath.mpf(10) ** -60) <= scaled < 1


def test_field_below_first_correction(data):
    X = liouville_field(data, 0, 3)
    assert X.parts == {} or all(p.is_zero() for p in X.parts.values())
    assert X.linear.matrix[0][0] == 1
    with mpmath.workprec(data.precision):
        assert X.linear.matrix[1][1] == -data.zeta


def test_field_first_correction(data):
    X = liouville_field(data, 0, 4)
    part = X.part(4)
    with mpmath.workprec(data.precision):
        assert part[(0, (2, 2))] == 1
        assert part[(1, (1, 3))] == -data.zeta
    assert len(part) == 2


def test_field_cross_terms_match_series(data):
    nmax = 9
    X = liouville_field(data, 0, nmax)
    x, y = sp.symbols("x y")
    f = 1 / (1 - x * y ** 2 - x * y ** 3)
    ser = sp.expand(sp.series(sp.series(f, x, 0, nmax).removeO(), y, 0, nmax).removeO())
    poly = sp.Poly(ser, x, y)
    for (i, j), c in poly.terms():
        d = i + j + 1
        if 2 <= d <= nmax:
            assert X.part(d)[(0, (i + 1, j))] == int(c)


def test_closed_form_sign_and_range(data):
    with mpmath.workprec(data.precision):
        for n, (p, q) in enumerate(data.convergents, start=1):
            cf = closed_form_coefficient(data, 0, n)
            assert mpmath.sign(cf) == mpmath.sign(data.errors[n - 1])
            lower = mpmath.mpf(math.factorial(q))
            assert abs(cf) <= lower * q * q / data.c * (1 + mpmath.mpf(10) ** -60)
            if n <= 3:
                assert abs(cf) > lower
    with pytest.raises(ParameterError):
        closed_form_coefficient(data, 0, 5)


def test_divergence_inequality_exact_reason(data):
    # |cf| = q zeta_{n+1} + q_{n-1} > q_{n+1} >= q_n!, with integers only;
    # at n = 4 the two sides agree to ~168000 digits, beyond 256-bit resolution
    qs = [1] + [q for _, q in data.convergents]
    qnext = data.quotients[4] * qs[4] + qs[3]
    assert qnext >= math.factorial(qs[4])


def test_closed_form_alpha_scaling(data):
    with mpmath.workprec(data.precision):
        a0 = closed_form_coefficient(data, 0, 3)
        a1 = closed_form_coefficient(data, 1, 3)
        assert mpmath.almosteq(a1, a0 * math.factorial(8), 1e-60)


def test_collision_detection():
    assert not collides([(1, 2), (1, 3)], 2)
    assert collides([(1, 2), (2, 4)], 2)
    assert collides([(1, 2), (1, 3), (2, 5)], 3)
    # (3, 8) = (1, 2) + 2 (1, 3): the third scale is reachable by products
    assert collides([(1, 2), (1, 3), (3, 8)], 3)
    # (15121, 40323) = (5040 - c)(1, 2) + (10081 - 2c)(1, 3) + c (3, 8)
    assert collides([(1, 2), (1, 3), (3, 8), (15121, 40323)], 4)


@given(st.lists(st.tuples(st.integers(1, 4), st.integers(0, 6)), min_size=1, max_size=4),
       st.tuples(st.integers(1, 9), st.integers(0, 14)))
def test_collision_matches_brute_force(earlier, target):
    conv = earlier + [target]
    counts = product(*[range(target[0] // a + 1) for a, _ in earlier])
    expected = any(
        sum(cs) >= 2 and sum(c * a for c, (a, _) in zip(cs, earlier)) == target[0]
        and sum(c * b for c, (_, b) in zip(cs, earlier)) == target[1] for cs in counts)
    assert collides(conv, len(conv)) == expected


def test_divergence_report(data):
    rep = verify_divergence(data, 0)
    assert rep.nmax == 1 + 3 + 1
    compared = [s for s in rep.scales if s["status"] == "compared"]
    assert [s["n"] for s in compared] == [1, 2]
    assert all(s["match"] for s in compared)
    assert all(s["divergence_inequality"] for s in rep.scales)
    assert rep.beta_hat == pytest.approx(1.0, abs=0.3)
    assert rep.resonance_free


def test_fit_trend_toward_beta(data):
    with mpmath.workprec(data.precision):
        mags = [abs(closed_form_coefficient(data, 0, n)) for n in range(1, 5)]
    qs = [q for _, q in data.convergents]
    b3, *_ = gevrey_order_fit(mags[:3], orders=qs[:3], min_points=3)
    b4, *_ = gevrey_order_fit(mags, orders=qs, min_points=4)
    assert abs(b4 - 1) <= abs(b3 - 1)
