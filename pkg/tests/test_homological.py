import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from gnf.errors import NotLinearizableError, ShapeError
from gnf.homological import (LINEARIZE, NORMAL_FORM, LinearPart, a_sequence, brute_force_a,
                             build_degree_operator, solve_cohomological)
from gnf.polyvec import HomogeneousVF, fischer_inner, fischer_norm, lie_bracket
from gnf.scalars import float_field

from conftest import random_homogeneous

F = Fraction
GOLDEN = (mpmath.sqrt(5) - 1) / 2


def diag(*lam):
    return LinearPart.diagonal_of([F(x) for x in lam])


def rel_close(a, b, tol=1e-10):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    return abs(a - b) <= tol * max(abs(a), abs(b))


# --- operator structure ------------------------------------------------------

def test_diagonal_operator_matrix_is_diagonal_with_divisors():
    op = build_degree_operator(diag(1, -2), 1)
    size = len(op.basis)
    assert size == 2 * 3
    for r in range(size):
        for c in range(size):
            if r != c:
                assert op.matrix[r][c] == 0
    lam = (1, -2)
    for j, (i, q) in enumerate(op.basis):
        assert op.matrix[j][j] == q[0] * lam[0] + q[1] * lam[1] - lam[i]
    assert op.a_k == 1


def test_resonant_monomial_in_kernel_of_adjoint():
    op = build_degree_operator(diag(1, -2), 3)
    res = HomogeneousVF(2, 4, {(0, (3, 1)): 1})
    assert op.apply(res).is_zero()
    assert res in op.kernel_basis


def test_zero_linear_part_has_no_scale():
    op = build_degree_operator(diag(0, 0), 2)
    assert op.a_k is None and op.rank == 0
    assert all(s == 0 for s in op.singular_values)
    assert len(op.kernel_basis) == len(op.basis)


def test_degree_must_be_positive():
    with pytest.raises(ShapeError):
        build_degree_operator(diag(1, -2), 0)


@pytest.mark.parametrize("n,k", [(1, 3), (2, 2), (3, 1)])
def test_matrix_is_square_of_basis_size(n, k):
    op = build_degree_operator(diag(*range(1, n + 1)), k)
    from math import comb
    size = n * comb(n + k, k + 1)
    assert len(op.matrix) == size and all(len(row) == size for row in op.matrix)


# --- a_k -----------------------------------------------------------------------

def test_a_sequence_saddle_matches_brute_force():
    seq = a_sequence(diag(1, -2), 6)
    # divisors are nonzero integers, and |Q| = 4 forces the value 3
    assert seq == [1, 1, 3, 1, 1, 3]
    for k, a in enumerate(seq, start=1):
        assert a == brute_force_a([1, -2], k)


def test_a_one_poincare_domain():
    op = build_degree_operator(diag(1, 2), 1)
    nonzero = sorted({abs(op.matrix[j][j]) for j in range(len(op.basis))} - {0})
    assert nonzero == [1, 2, 3]
    assert op.a_k == 1


def test_a_sequence_golden_float_decreasing_and_positive():
    ff = float_field(256)
    with ff.context():
        L = LinearPart.diagonal_of([mpmath.mpf(1), -GOLDEN], ff)
        seq = a_sequence(L, 8)
        for k, a in enumerate(seq, start=1):
            assert a > 0
            assert rel_close(a, brute_force_a([mpmath.mpf(1), -GOLDEN], k))
    assert seq[-1] < seq[0]


@given(st.integers(0, 10_000))
def test_a_k_permutation_invariant(seed):
    rng = random.Random(seed)
    lam = [F(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(3)]
    perm = lam[:]
    rng.shuffle(perm)
    for k in (1, 2):
        a = build_degree_operator(LinearPart.diagonal_of(lam), k).a_k
        b = build_degree_operator(LinearPart.diagonal_of(perm), k).a_k
        assert a == b


def test_nondiagonal_a_k_is_min_singular_value():
    L = LinearPart([[F(1), F(1)], [F(0), F(-2)]])
    op = build_degree_operator(L, 2)
    import numpy as np
    sv = np.linalg.svd(np.array(op.orthonormal_matrix, dtype=float), compute_uv=False)
    assert float(op.a_k) == pytest.approx(min(s for s in sv if s > 1e-12 * sv.max()), rel=1e-12)


# --- solving -------------------------------------------------------------------

def test_one_dimensional_hand_solve():
    op = build_degree_operator(diag(-1), 1)
    for a in (F(3), F(-5, 7)):
        u, nf = solve_cohomological(op, HomogeneousVF(1, 2, {(0, (2,)): a}), LINEARIZE)
        assert u == HomogeneousVF(1, 2, {(0, (2,)): -a})
        assert nf.is_zero()


def test_resonant_rhs_normal_form_and_linearize():
    op = build_degree_operator(diag(1, -2), 3)
    res = HomogeneousVF(2, 4, {(0, (3, 1)): 1})
    u, nf = solve_cohomological(op, res, NORMAL_FORM)
    assert u.is_zero() and nf == res
    with pytest.raises(NotLinearizableError) as info:
        solve_cohomological(op, res, LINEARIZE)
    assert info.value.resonant == res


def test_rhs_shape_mismatch():
    op = build_degree_operator(diag(1, -2), 1)
    with pytest.raises(ShapeError):
        solve_cohomological(op, HomogeneousVF(2, 3, {(0, (3, 0)): 1}))


def _check_solution(L, rhs, k, exact):
    op = build_degree_operator(L, k)
    # round-off floor for float fields: a few ulps at the working precision
    floor = 0 if exact else mpmath.mpf(2) ** (20 - L.field.precision) * fischer_norm(rhs)
    u, nf = solve_cohomological(op, rhs, NORMAL_FORM)
    resid = op.apply(u) + nf - rhs
    if exact:
        assert resid.is_zero()
    else:
        assert fischer_norm(resid) <= 1e-10 * max(fischer_norm(rhs), 1)
    # N is orthogonal to the range, U to the kernel of d0
    for b in op.basis:
        w = op.apply(HomogeneousVF._raw(L.n, k + 1, {b: L.field.one}, L.field))
        ip = fischer_inner(nf, w)
        if exact:
            assert ip == 0
        else:
            assert abs(ip) <= (1e-10 * fischer_norm(nf) + floor) * fischer_norm(w)
    for b in op.basis:
        e = HomogeneousVF._raw(L.n, k + 1, {b: L.field.one}, L.field)
        if op.apply(e).is_zero():
            ip = fischer_inner(u, e)
            if exact:
                assert ip == 0
            else:
                assert abs(ip) <= 1e-10 * fischer_norm(u) + floor
    return u, nf


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_reconstruction_diagonal_exact(seed, n):
    rng = random.Random(seed)
    lam = [F(rng.choice([1, -1, 2, -2, 3, -3])) for _ in range(n)]
    k = rng.randint(1, 8 if n < 3 else 4)
    rhs = random_homogeneous(rng, n, k + 1, 0.4)
    _check_solution(LinearPart.diagonal_of(lam), rhs, k, exact=True)


@given(st.integers(0, 10_000))
def test_reconstruction_nondiagonal_exact(seed):
    rng = random.Random(seed)
    m = [[F(rng.randint(-3, 3)) for _ in range(2)] for _ in range(2)]
    if all(v == 0 for row in m for v in row):
        m[0][0] = F(1)
    k = rng.randint(1, 4)
    rhs = random_homogeneous(rng, 2, k + 1, 0.6)
    _check_solution(LinearPart(m), rhs, k, exact=True)


def test_reconstruction_three_dim_nondiagonal():
    rng = random.Random(7)
    m = [[F(1), F(1), F(0)], [F(0), F(-2), F(1)], [F(0), F(0), F(3)]]
    for k in (1, 2):
        rhs = random_homogeneous(rng, 3, k + 1, 0.5)
        _check_solution(LinearPart(m), rhs, k, exact=True)


def test_reconstruction_float_nondiagonal():
    ff = float_field(128)
    rng = random.Random(11)
    with ff.context():
        L = LinearPart([[mpmath.mpf(1), mpmath.mpf("0.5")], [mpmath.mpf(0), -GOLDEN]], ff)
        for k in (1, 2, 3):
            rhs = random_homogeneous(rng, 2, k + 1).with_field(ff)
            _check_solution(L, rhs, k, exact=False)


def test_kernel_fields_commute_with_diagonal_linear_part():
    L = diag(1, -2)
    for k in range(1, 6):
        op = build_degree_operator(L, k)
        for v in op.kernel_basis:
            assert lie_bracket(L.as_field(), v).is_zero()


def test_projection_fixed_point():
    op = build_degree_operator(diag(1, -2), 3)
    for v in op.kernel_basis:
        u, nf = solve_cohomological(op, v)
        assert u.is_zero() and nf == v
