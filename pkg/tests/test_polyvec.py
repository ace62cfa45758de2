import random
from fractions import Fraction

import mpmath
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from gnf.errors import NotAUnitError, ScalarFieldError, ShapeError, TruncationError
from gnf.homological import LinearPart
from gnf.polyvec import (GradedVectorField, HomogeneousVF, compose_truncated, fischer_inner,
                         fischer_norm, fischer_weight, identity_field, lie_bracket,
                         multi_indices, poly_mul, series_reciprocal, substitute)
from gnf.scalars import RATIONAL, float_field

from conftest import from_sympy, random_homogeneous, symbols, to_sympy


def mono(n, d, i, q, c=1):
    return HomogeneousVF(n, d, {(i, tuple(q)): Fraction(c)})


# --- Fischer product -------------------------------------------------------

def test_fischer_mixed_monomial():
    f = mono(2, 2, 0, (1, 1))
    assert fischer_inner(f, f) == Fraction(1, 2)


def test_fischer_distinct_monomials_orthogonal():
    assert fischer_inner(mono(2, 2, 0, (2, 0)), mono(2, 2, 0, (1, 1))) == 0


def test_fischer_quartic_second_component():
    f = mono(2, 4, 1, (3, 1))
    assert fischer_inner(f, f) == Fraction(1, 4)


def test_fischer_shape_mismatch():
    with pytest.raises(ShapeError):
        fischer_inner(mono(2, 2, 0, (2, 0)), mono(2, 3, 0, (3, 0)))


def test_identity_norm_is_sqrt_n():
    for n in (1, 2, 3):
        with RATIONAL.context():
            assert abs(fischer_norm(identity_field(n)) - mpmath.sqrt(n)) < mpmath.mpf(10) ** -70


@given(st.integers(0, 10_000))
def test_fischer_symmetric_bilinear(seed):
    rng = random.Random(seed)
    f, g, h = (random_homogeneous(rng, 2, 3) for _ in range(3))
    a = Fraction(rng.randint(-3, 3), 2)
    assert fischer_inner(f, g) == fischer_inner(g, f)
    assert fischer_inner(f.scale(a) + h, g) == a * fischer_inner(f, g) + fischer_inner(h, g)


def test_zero_field_is_empty_and_normless():
    z = HomogeneousVF.zero(2, 3)
    assert len(z) == 0 and fischer_norm(z) == 0
    assert len(HomogeneousVF(2, 2, {(0, (2, 0)): 0})) == 0


def test_mixing_fields_rejected():
    f = mono(2, 2, 0, (2, 0))
    g = HomogeneousVF(2, 2, {(0, (2, 0)): 1}, float_field(128))
    with pytest.raises(ScalarFieldError):
        f + g


def test_key_degree_checked():
    with pytest.raises(ShapeError):
        HomogeneousVF(2, 2, {(0, (3, 0)): 1})


# --- Lie bracket -----------------------------------------------------------

def sympy_bracket(x, y):
    xs = symbols(x.n)
    X, Y = sp.Matrix(to_sympy(x)), sp.Matrix(to_sympy(y))
    return list(Y.jacobian(xs) * X - X.jacobian(xs) * Y)


def test_bracket_example_saddle():
    L = LinearPart.diagonal_of([Fraction(1), Fraction(-2)]).as_field()
    u = mono(2, 2, 1, (2, 0))
    assert lie_bracket(L, u) == u.scale(4)


@pytest.mark.parametrize("lam", [(1, -2), (3, 5), (Fraction(1, 2), Fraction(-7, 3))])
def test_diagonal_eigenrelation_all_monomials(lam):
    lam = [Fraction(v) for v in lam]
    S = LinearPart.diagonal_of(lam).as_field()
    for d in range(1, 5):
        for i in range(2):
            for q in multi_indices(2, d):
                u = mono(2, d, i, q)
                div = sum(a * b for a, b in zip(q, lam)) - lam[i]
                assert lie_bracket(S, u) == u.scale(div)
                assert lie_bracket(S, u) == from_sympy(sympy_bracket(S, u), 2, d)


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 4))
def test_bracket_matches_sympy(seed, d1, d2):
    rng = random.Random(seed)
    x, y = random_homogeneous(rng, 2, d1, 0.6), random_homogeneous(rng, 2, d2, 0.6)
    assert lie_bracket(x, y) == from_sympy(sympy_bracket(x, y), 2, d1 + d2 - 1)


@given(st.integers(0, 10_000))
def test_bracket_antisymmetric_and_self_zero(seed):
    rng = random.Random(seed)
    x, y = random_homogeneous(rng, 3, 2, 0.5), random_homogeneous(rng, 3, 3, 0.5)
    assert lie_bracket(x, y) == -lie_bracket(y, x)
    assert lie_bracket(x, x).is_zero()


@given(st.integers(0, 10_000))
def test_jacobi_identity_graded(seed):
    rng = random.Random(seed)
    L = LinearPart.diagonal_of([Fraction(1), Fraction(-3)])

    def rf():
        return GradedVectorField(L, {d: random_homogeneous(rng, 2, d, 0.5) for d in (2, 3, 4)}, 4)

    x, y, z = rf(), rf(), rf()
    total = _graded_add(_graded_add(lie_bracket(x, lie_bracket(y, z)),
                                    lie_bracket(y, lie_bracket(z, x))),
                        lie_bracket(z, lie_bracket(x, y)))
    assert all(p.is_zero() for p in total.parts.values())
    assert total.linear.is_zero()


def _graded_add(a, b):
    parts = {d: a.part(d) + b.part(d) for d in range(2, a.nmax + 1)}
    lin = a.linear.as_field() + b.linear.as_field()
    return GradedVectorField(LinearPart(lin.to_matrix(), RATIONAL), parts, a.nmax)


# --- composition -------------------------------------------------------------

def test_compose_with_zero_u_returns_r():
    r = {2: mono(2, 2, 0, (1, 1), 3), 3: mono(2, 3, 1, (0, 3), -2)}
    assert compose_truncated(r, {}, 2) == r[3]
    assert compose_truncated(r, {}, 1) == r[2]


def test_compose_one_dimensional_hand_example():
    c = Fraction(5, 7)
    r = {2: mono(1, 2, 0, (2,)), 3: HomogeneousVF.zero(1, 3)}
    u = {2: mono(1, 2, 0, (2,), c)}
    assert compose_truncated(r, u, 2) == mono(1, 3, 0, (3,), 2 * c)


def test_compose_truncation_errors():
    r = {2: mono(1, 2, 0, (2,))}
    with pytest.raises(TruncationError):
        compose_truncated(r, {2: mono(1, 2, 0, (2,))}, 2)
    with pytest.raises(TruncationError):
        compose_truncated(r, {}, 0)


@given(st.integers(0, 10_000))
def test_compose_matches_brute_force_substitution(seed):
    rng = random.Random(seed)
    n, nmax = 2, 5
    r = {d: random_homogeneous(rng, n, d, 0.5) for d in range(2, nmax + 1)}
    u = {d: random_homogeneous(rng, n, d, 0.5) for d in range(2, nmax)}
    xs = symbols(n)
    shifted = [x + sum(to_sympy(p)[j] for p in u.values()) for j, x in enumerate(xs)]
    full = [sp.Integer(0)] * n
    for p in r.values():
        for i, e in enumerate(to_sympy(p)):
            full[i] += e.subs(dict(zip(xs, shifted)), simultaneous=True)
    for delta in range(1, nmax):
        assert compose_truncated(r, u, delta) == from_sympy(full, n, delta + 1)


def test_substitute_float_field_matches_rational():
    rng = random.Random(3)
    r = {2: random_homogeneous(rng, 2, 2), 3: random_homogeneous(rng, 2, 3)}
    u = {2: random_homogeneous(rng, 2, 2)}
    ff = float_field(128)
    exact = substitute(r, u, 2, 5, RATIONAL, 2)
    approx = substitute({d: p.with_field(ff) for d, p in r.items()},
                        {d: p.with_field(ff) for d, p in u.items()}, 2, 5, ff, 2)
    for d in range(2, 6):
        diff = exact[d].with_field(ff) - approx[d]
        assert fischer_norm(diff) < mpmath.mpf(2) ** -100


# --- polarization / sub-multiplicativity -----------------------------------

def polarized(r: HomogeneousVF, us):
    """``R~(u_1..u_m)``: coefficient of t_1...t_m in R(sum t_i u_i), over m!."""
    n, m = r.n, r.degree
    ts = sp.symbols(f"t1:{m + 1}")
    xs = symbols(n)
    arg = [sum(t * to_sympy(u)[j] for t, u in zip(ts, us)) for j in range(n)]
    out = []
    for comp in to_sympy(r):
        e = sp.expand(comp.subs(dict(zip(xs, arg)), simultaneous=True))
        coeff = sp.Poly(e, *ts).coeff_monomial(sp.prod(ts))
        out.append(coeff / sp.factorial(m))
    return from_sympy(out, n, sum(u.degree for u in us))


@pytest.mark.parametrize("mu", [1, 2, 3])
def test_polarization_bounded_by_fischer_norm(mu):
    rng = random.Random(100 + mu)
    for trial in range(6):
        r = random_homogeneous(rng, 2, mu + 1, 0.7)
        us = [random_homogeneous(rng, 2, rng.randint(1, 3), 0.7) for _ in range(mu + 1)]
        us = [u for u in us if not u.is_zero()]
        if len(us) != mu + 1 or r.is_zero():
            continue
        val = fischer_norm(polarized(r, us))
        bound = fischer_norm(r) * mpmath.fprod(fischer_norm(u) for u in us)
        assert val <= bound * (1 + mpmath.mpf(10) ** -12)


# --- series reciprocal -------------------------------------------------------

def test_reciprocal_of_one():
    assert series_reciprocal({(0,): Fraction(1)}, 5) == {(0,): Fraction(1)}


def test_reciprocal_geometric():
    out = series_reciprocal({(0,): Fraction(1), (1,): Fraction(-1)}, 4)
    assert out == {(k,): Fraction(1) for k in range(5)}


def test_reciprocal_two_variables_product_is_one():
    s = {(0, 0): Fraction(1), (2, 3): Fraction(-1)}
    r = series_reciprocal(s, 10)
    assert r == {(0, 0): 1, (2, 3): 1, (4, 6): 1}
    prod = poly_mul(s, r, 10)
    assert {q: c for q, c in prod.items() if c != 0} == {(0, 0): 1}


def test_reciprocal_not_a_unit():
    with pytest.raises(NotAUnitError):
        series_reciprocal({(1, 0): Fraction(1)}, 3)


@given(st.integers(0, 10_000))
def test_reciprocal_property(seed):
    rng = random.Random(seed)
    s = {(0, 0): Fraction(rng.randint(1, 3))}
    for q in [(1, 0), (0, 1), (1, 1), (2, 0), (0, 3)]:
        s[q] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    nmax = 6
    prod = poly_mul(s, series_reciprocal(s, nmax), nmax)
    assert {q: c for q, c in prod.items() if c != 0} == {(0, 0): 1}
