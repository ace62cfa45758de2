import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from gnf.errors import DomainError, ParameterError, ParseError
from gnf.gevreyfn import (Expression, Jet1D, derivative_lemma_check, derivative_lemma_table,
                          flat_constant_check, jet_evaluate, truncated_gevrey_norm)

F = Fraction
CATALOG = ["exp(x)", "1/(1-x)", "exp(-1/x)", "x^3 - 2*x + 1", "sin(x)*exp(x)",
           "log(1+x)", "sqrt(1+x)", "cos(x^2)", "(1+x)^(-3/2)", "exp(-x^(-2))"]


def close(a, b, rel):
    return abs(a - b) <= rel * max(abs(a), abs(b), mpmath.mpf(10) ** -30)


# --- jets -------------------------------------------------------------------------

def test_exp_jet():
    j = jet_evaluate("exp(x)", 0, 4)
    with mpmath.workprec(256):
        for c, e in zip(j.coeffs, [1, 1, F(1, 2), F(1, 6), F(1, 24)]):
            assert close(c, mpmath.mpf(e.numerator) / e.denominator, 1e-70)


def test_geometric_jet():
    j = jet_evaluate("1/(1-x)", 0, 3)
    assert [float(c) for c in j.coeffs] == [1, 1, 1, 1]


@pytest.mark.parametrize("text", CATALOG)
def test_jets_match_numerical_derivatives(text):
    x0 = mpmath.mpf("0.5")
    x = sp.Symbol("x")
    f = sp.lambdify(x, sp.sympify(text.replace("^", "**")), "mpmath")
    with mpmath.workprec(200):
        d = jet_evaluate(text, x0, 6, 200).derivatives()
        for k in range(5):
            assert close(d[k], mpmath.diff(f, x0, k), 1e-6)


def test_exp_minus_inverse_against_central_differences():
    # plain double-precision central differences, orders <= 4
    d = jet_evaluate("exp(-1/x)", 0.5, 6).derivatives()
    g = lambda t: math.exp(-1 / t)  # noqa: E731
    h = 1e-2
    fd = [g(0.5),
          (g(0.5 + h) - g(0.5 - h)) / (2 * h),
          (g(0.5 + h) - 2 * g(0.5) + g(0.5 - h)) / h ** 2]
    for k in range(3):
        # f''(1/2) = f (1/x^4 - 2/x^3) = 0 exactly; the difference quotient is O(h^2)
        assert float(d[k]) == pytest.approx(fd[k], rel=1e-3, abs=1e-3)


def test_singular_point():
    with pytest.raises(DomainError):
        jet_evaluate("1/x", 0, 3)
    with pytest.raises(DomainError):
        jet_evaluate("log(x)", 0, 3)


def test_parse_errors():
    for bad in ["x +", "__import__('os')", "foo(x)", "x.y", "lambda: 1"]:
        with pytest.raises(ParseError):
            Expression(bad)


def test_expression_vectorized():
    e = Expression("exp(-1/x^2)")
    xs = np.array([0.3, 0.5])
    assert np.allclose(e(xs), np.exp(-1 / xs ** 2))


@given(st.sampled_from(CATALOG), st.sampled_from(CATALOG))
def test_jet_product_rule(a, b):
    x0 = mpmath.mpf("0.4")
    with mpmath.workprec(200):
        ja, jb = jet_evaluate(a, x0, 6, 200), jet_evaluate(b, x0, 6, 200)
        jab = jet_evaluate(f"({a})*({b})", x0, 6, 200)
        prod = ja * jb
        for u, v in zip(prod.coeffs, jab.coeffs):
            assert close(u, v, mpmath.mpf(10) ** -50)


# --- norms ---------------------------------------------------------------------

def test_constant_norm():
    t = truncated_gevrey_norm("1", [0, 0.5], 1, 2, 10)
    assert [float(s) for s in t.partial_sums] == [1.0] * 11


def test_exp_norm_converges_half_width():
    t = truncated_gevrey_norm("exp(x)", [0], 1, F(1, 2), 30)
    with mpmath.workprec(256):
        assert close(t.partial_sums[-1], mpmath.exp(mpmath.mpf(1) / 2), 1e-30)
    assert t.ratio < 0.2 and not t.diverges


def test_exp_norm_width_two_still_converges():
    # sum 2^j / j! converges for any width; the ratio 2/j drops below 1
    t = truncated_gevrey_norm("exp(x)", [0], 1, 2, 30)
    assert not t.diverges
    with mpmath.workprec(256):
        assert close(t.partial_sums[-1], mpmath.exp(2), 1e-15)


def test_geometric_norm_diverges_width_two():
    t = truncated_gevrey_norm("1/(1-x)", [0], 1, 2, 30)
    assert t.diverges and t.ratio == pytest.approx(2, rel=1e-12)


@given(st.sampled_from(CATALOG), st.sampled_from([1, 1.5, 2]), st.sampled_from([0.25, 0.5, 1]))
def test_partial_sums_monotone(text, alpha, L):
    t = truncated_gevrey_norm(text, [0.3, 0.6], alpha, L, 12)
    assert all(b >= a for a, b in zip(t.partial_sums, t.partial_sums[1:]))


@given(st.sampled_from(CATALOG), st.sampled_from(CATALOG), st.sampled_from([1, 2]))
def test_algebra_property(a, b, alpha):
    K = [0.3, 0.45, 0.6]
    J = 10
    fa = truncated_gevrey_norm(a, K, alpha, 0.25, J).partial_sums[-1]
    fb = truncated_gevrey_norm(b, K, alpha, 0.25, J).partial_sums[-1]
    fab = truncated_gevrey_norm(f"({a})*({b})", K, alpha, 0.25, J).partial_sums[-1]
    assert fab <= fa * fb * (1 + 1e-10)


def test_norm_parameters():
    with pytest.raises(ParameterError):
        truncated_gevrey_norm("x", [0], 0.5, 1, 3)
    with pytest.raises(ParameterError):
        truncated_gevrey_norm("x", [0], 1, 0, 3)


# --- derivative lemma -------------------------------------------------------------

@pytest.mark.parametrize("text", ["exp(x)", "sin(x)*exp(x)", "1/(2-x)"])
def test_lemma_j_zero(text):
    assert derivative_lemma_check(text, [0, 0.3], 1, 1, 0.5, 0, 15)


def test_lemma_exp():
    assert derivative_lemma_check("exp(x)", [0], 1, 1, 0.5, 2, 20)


def test_lemma_sharpness_probe():
    table = derivative_lemma_table("exp(x)", [0], 1, 1, 0.5, 2, 20, tighten=10)
    assert not table
    assert table.holds[0] is False


def test_lemma_parameters():
    with pytest.raises(ParameterError):
        derivative_lemma_check("exp(x)", [0], 1, 1, 1.5, 1, 5)


# --- flat constant -------------------------------------------------------------

def test_flat_constant_exact_values():
    assert flat_constant_check(2, 1, F(1, 2)) == 2
    assert isinstance(flat_constant_check(2, 1, F(1, 2)), Fraction)
    assert flat_constant_check(3, 1, F(1, 2)) == 4


def test_flat_constant_small_lambda():
    assert float(flat_constant_check(2, 1, 1e-9)) == pytest.approx(1, abs=1e-8)


def test_flat_constant_general_float():
    with mpmath.workprec(256):
        got = flat_constant_check(2.5, 1.3, 0.4)
        ref = (1 - mpmath.mpf(0.4) / mpmath.mpf(1.3) ** (mpmath.mpf(2.5) / 1.5)) ** -1.5
        assert close(got, ref, 1e-40)


def test_flat_constant_parameters():
    with pytest.raises(ParameterError):
        flat_constant_check(1, 1, F(1, 2))
    with pytest.raises(ParameterError):
        flat_constant_check(2, 1, 1)
