"""The homological operator ``d0 = [L, .]`` degree by degree.

For each coefficient degree ``k + 1`` the operator is assembled as a matrix
in the monomial basis ``x^Q e_i`` and conjugated into the Fischer-orthonormal
basis ``x^Q e_i / sqrt(Q!/|Q|!)``.  The adjoint is the transpose there, so
``d0 d0^t`` is positive semi-definite by construction and the small-divisor
scale ``a_k`` is its smallest nonzero singular value.

Solves come in three flavours sharing one contract (minimal Fischer norm
solution, normal-form part = projection onto ``ker d0^t``):

* diagonal ``L``: the matrix is diagonal, coefficients are divided exactly;
* rational non-diagonal ``L``: exact projections over ``Fraction``;
* float non-diagonal ``L``: SVD at the field's precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import _exact
from .errors import NotLinearizableError, ShapeError
from .polyvec import (HomogeneousVF, _bracket_homogeneous, fischer_norm, fischer_weight,
                      multi_indices, unit_index)
from .scalars import RATIONAL, Field, float_field, infer_field

LINEARIZE = "linearize"
NORMAL_FORM = "normal_form"
HYPERBOLIC_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-12


class LinearPart:
    """Linear vector field ``sum_i (sum_j a_ij x_j) d/dx_i``."""

    def __init__(self, matrix, field: Field | None = None, eigenvalues: Sequence | None = None):
        rows = [list(r) for r in matrix]
        n = len(rows)
        if n < 1 or any(len(r) != n for r in rows):
            raise ShapeError("linear part must be a nonempty square matrix")
        if field is None:
            field = infer_field([v for r in rows for v in r])
        self.field = field
        self.n = n
        with field.context():
            self.matrix = tuple(tuple(field.coerce(v) for v in r) for r in rows)
        self.diagonal = all(self.matrix[i][j] == 0 for i in range(n) for j in range(n) if i != j)
        triangular = self.diagonal or all(
            self.matrix[i][j] == 0 for i in range(n) for j in range(i)) or all(
            self.matrix[i][j] == 0 for i in range(n) for j in range(i + 1, n))
        self.exact_spectrum = triangular and eigenvalues is None
        if eigenvalues is not None:
            self.eigenvalues = tuple(eigenvalues)
        elif triangular:
            self.eigenvalues = tuple(self.matrix[i][i] for i in range(n))
        else:
            self.eigenvalues = self._numeric_eigenvalues()

    @classmethod
    def diagonal_of(cls, eigenvalues: Sequence, field: Field | None = None) -> "LinearPart":
        n = len(eigenvalues)
        if field is None:
            field = infer_field(list(eigenvalues))
        zero = field.zero
        m = [[eigenvalues[i] if i == j else zero for j in range(n)] for i in range(n)]
        return cls(m, field)

    def _numeric_eigenvalues(self) -> tuple:
        with self.field.context():
            m = mpmath.matrix([[self.field.to_mpf(v) for v in r] for r in self.matrix])
            ev = mpmath.eig(m, left=False, right=False)
        return tuple(sorted((mpmath.mpc(e) for e in ev), key=lambda z: (float(z.real), float(z.imag))))

    @property
    def real_eigenvalues(self) -> list:
        with self.field.context():
            return [self.field.to_mpf(e) if not isinstance(e, mpmath.mpc) else e.real
                    for e in self.eigenvalues]

    @property
    def hyperbolic(self) -> bool:
        if self.exact_spectrum:
            return all(e != 0 for e in self.eigenvalues)
        with self.field.context():
            return min(abs(mpmath.re(e)) for e in self.eigenvalues) > HYPERBOLIC_TOL

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.matrix for v in r)

    def as_field(self) -> HomogeneousVF:
        return HomogeneousVF.from_matrix(self.matrix, self.field)

    def transposed(self) -> "LinearPart":
        return LinearPart([list(c) for c in zip(*self.matrix)], self.field)

    def __repr__(self):
        return f"LinearPart(n={self.n}, diagonal={self.diagonal}, field={self.field.describe()})"


@dataclass
class DegreeOperator:
    """Matrix realization of ``d0`` on fields of coefficient degree ``k + 1``."""

    k: int
    linear: LinearPart
    basis: list
    matrix: list                    # monomial basis, entries in the field
    orthonormal_matrix: object      # mpmath matrix (float) or numpy array (rational spectra)
    singular_values: list
    a_k: object                     # None when every singular value vanishes
    rank: int
    kernel_basis: list              # HomogeneousVF spanning ker(d0^t)
    rank_tol: float = DEFAULT_RANK_TOL
    divisors: list | None = None    # diagonal case: (Q, lambda) - lambda_i per basis element
    _svd: tuple | None = dc_field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return self.k + 1

    @property
    def n(self) -> int:
        return self.linear.n

    @property
    def field(self) -> Field:
        return self.linear.field

    def apply(self, u: HomogeneousVF) -> HomogeneousVF:
        """``[L, u]``."""
        return _bracket_homogeneous(self.linear.as_field(), u)


def _weights(basis, field: Field) -> list:
    with field.context():
        out = []
        for _, q in basis:
            w = fischer_weight(q)
            out.append(mpmath.sqrt(mpmath.mpf(w.numerator) / w.denominator))
        return out


def build_degree_operator(linear: LinearPart, k: int, rank_tol: float = DEFAULT_RANK_TOL
                          ) -> DegreeOperator:
    """Assemble ``d0`` on coefficient degree ``k + 1`` with its spectrum."""
    if k < 1:
        raise ShapeError("k must be >= 1")
    n, field = linear.n, linear.field
    d = k + 1
    basis = [(i, q) for i in range(n) for q in multi_indices(n, d)]
    index = {b: j for j, b in enumerate(basis)}
    size = len(basis)
    lin_field = linear.as_field()
    with field.context():
        cols = []
        for b in basis:
            img = _bracket_homogeneous(lin_field, HomogeneousVF._raw(n, d, {b: field.one}, field))
            col = [field.zero] * size
            for key, c in img.items():
                col[index[key]] = c
            cols.append(col)
        matrix = [[cols[c][r] for c in range(size)] for r in range(size)]

        divisors = None
        if linear.diagonal:
            lam = [linear.matrix[i][i] for i in range(n)]
            divisors = [sum((qj * lj for qj, lj in zip(q, lam)), field.zero) - lam[i]
                        for i, q in basis]

        w = _weights(basis, field)
        if field.exact and divisors is not None:
            # diagonal operator: the singular values are the |divisors|, exactly
            ortho = np.diag([float(dv) for dv in divisors]) if size else np.zeros((0, 0))
            singular = [abs(dv) for dv in divisors]
            svd = None
        elif field.exact:
            wf = [float(x) for x in w]
            ortho = np.array([[float(matrix[r][c]) * wf[r] / wf[c] for c in range(size)]
                              for r in range(size)])
            sv = np.linalg.svd(ortho, compute_uv=False) if size else np.zeros(0)
            singular = [mpmath.mpf(float(s)) for s in sv]
            svd = None
        else:
            ortho = mpmath.matrix(size, size)
            for r in range(size):
                for c in range(size):
                    if matrix[r][c] != 0:
                        ortho[r, c] = matrix[r][c] * w[r] / w[c]
            if size:
                uu, ss, vv = mpmath.svd_r(ortho, compute_uv=True)
                singular = [ss[i] for i in range(len(ss))]
            else:
                uu = ss = vv = None
                singular = []
            svd = (uu, ss, vv)

        smax = max(singular, default=0)
        if field.exact:
            if divisors is not None:
                rank = sum(1 for dv in divisors if dv != 0)
            else:
                rank = len(_exact.rref(matrix)[1]) if size else 0
            nonzero = sorted(singular, reverse=True)[:rank]
        else:
            thresh = rank_tol * smax
            nonzero = [s for s in singular if s > thresh]
            rank = len(nonzero)
        a_k = min(nonzero) if nonzero else None

        kernel = _kernel_basis(linear, basis, matrix, divisors, w, svd, rank, field)
    return DegreeOperator(k=k, linear=linear, basis=basis, matrix=matrix, orthonormal_matrix=ortho,
                          singular_values=sorted(singular, reverse=True), a_k=a_k, rank=rank,
                          kernel_basis=kernel, rank_tol=rank_tol, divisors=divisors, _svd=svd)


def _is_zero_divisor(dv, field: Field, thresh) -> bool:
    return dv == 0 if field.exact else abs(dv) <= thresh


def _kernel_basis(linear, basis, matrix, divisors, w, svd, rank, field) -> list:
    n = linear.n
    d = sum(basis[0][1]) if basis else 0
    out = []
    if divisors is not None:
        smax = max((abs(field.to_mpf(x)) for x in divisors), default=0)
        thresh = DEFAULT_RANK_TOL * smax
        for b, dv, wb in zip(basis, divisors, w):
            if _is_zero_divisor(dv, field, thresh):
                coeff = field.one if field.exact else 1 / wb
                out.append(HomogeneousVF._raw(n, d, {b: coeff}, field))
        return out
    if field.exact:
        # ker(d0*) = ker(A^T G), G = diag(Q!/|Q|!)
        g = [fischer_weight(q) for _, q in basis]
        atg = [[matrix[c][r] * g[c] for c in range(len(basis))] for r in range(len(basis))]
        for v in _exact.nullspace(atg, len(basis)):
            out.append(HomogeneousVF._raw(n, d, {b: c for b, c in zip(basis, v) if c != 0}, field))
        return out
    uu, ss, vv = svd
    size = len(basis)
    order = sorted(range(size), key=lambda i: -ss[i])
    for col in order[rank:]:
        coeffs = {basis[r]: uu[r, col] / w[r] for r in range(size) if uu[r, col] != 0}
        out.append(HomogeneousVF._raw(n, d, coeffs, field))
    return out


def a_sequence(linear: LinearPart, kmax: int) -> list:
    """``[a_1, ..., a_kmax]``; ``None`` where no nonzero singular value exists."""
    if kmax < 1:
        raise ShapeError("kmax must be >= 1")
    return [build_degree_operator(linear, k).a_k for k in range(1, kmax + 1)]


def brute_force_a(eigenvalues: Sequence, k: int, precision: int = 256):
    """Min nonzero ``|(Q, lambda) - lambda_i|`` over ``|Q| = k + 1`` (diagonal oracle)."""
    n = len(eigenvalues)
    best = None
    with mpmath.workprec(precision):
        lam = [x if isinstance(x, (mpmath.mpf, mpmath.mpc)) else
               (mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x))
               for x in eigenvalues]
        for q in multi_indices(n, k + 1):
            s = mpmath.fsum(qj * lj for qj, lj in zip(q, lam))
            for i in range(n):
                v = abs(s - lam[i])
                if v != 0 and (best is None or v < best):
                    best = v
    return best


def solve_cohomological(op: DegreeOperator, rhs: HomogeneousVF, mode: str = NORMAL_FORM,
                        tol: float | None = None) -> tuple[HomogeneousVF, HomogeneousVF]:
    """Split ``rhs = [L, U] + N`` with ``N`` in ``ker d0^t`` and ``U`` of minimal norm.

    Returns ``(U, N)``.  In linearize mode a nonzero ``N`` (beyond
    ``tol * |rhs|``) raises :class:`NotLinearizableError`.
    """
    if mode not in (LINEARIZE, NORMAL_FORM):
        raise ValueError(f"unknown mode {mode!r}")
    field = op.field
    n, d = op.n, op.degree
    if rhs.n != n or rhs.degree != d:
        raise ShapeError(f"rhs has (n={rhs.n}, d={rhs.degree}), operator expects (n={n}, d={d})")
    if rhs.field.kind != field.kind:
        from .errors import ScalarFieldError
        raise ScalarFieldError("rhs and operator use different fields")
    if tol is None:
        tol = 0 if field.exact else 1e-10
    with field.context():
        if op.divisors is not None:
            u, nf = _solve_diagonal(op, rhs)
        elif field.exact:
            u, nf = _solve_exact(op, rhs)
        else:
            u, nf = _solve_svd(op, rhs)
        if mode == LINEARIZE and not nf.is_zero():
            if field.exact or fischer_norm(nf) > tol * fischer_norm(rhs):
                raise NotLinearizableError(
                    f"resonant terms at degree {d} cannot be removed", resonant=nf, degree=d)
            nf = HomogeneousVF.zero(n, d, field)
    return u, nf


def _solve_diagonal(op: DegreeOperator, rhs: HomogeneousVF):
    field = op.field
    index = {b: j for j, b in enumerate(op.basis)}
    smax = max((abs(field.to_mpf(x)) for x in op.divisors), default=0)
    thresh = op.rank_tol * smax
    u, nf = {}, {}
    for key, c in rhs.items():
        dv = op.divisors[index[key]]
        if _is_zero_divisor(dv, field, thresh):
            nf[key] = c
        else:
            u[key] = c / dv
    return (HomogeneousVF._raw(op.n, op.degree, u, field),
            HomogeneousVF._raw(op.n, op.degree, nf, field))


def _solve_exact(op: DegreeOperator, rhs: HomogeneousVF):
    basis, a = op.basis, op.matrix
    size = len(basis)
    g = [fischer_weight(q) for _, q in basis]
    r = [rhs[b] for b in basis]
    at = _exact.transpose(a)
    _, piv = _exact.rref(a)
    if piv:
        bm = [[a[row][c] for c in piv] for row in range(size)]
        # (B^T G B) c = B^T G r
        btg = [[bm[row][j] * g[row] for row in range(size)] for j in range(len(piv))]
        gram = _exact.matmul(btg, bm)
        coef = _exact.solve(gram, _exact.matvec(btg, r))
        rng = _exact.matvec(bm, coef)
    else:
        rng = [Fraction(0)] * size
    nvec = [ri - yi for ri, yi in zip(r, rng)]
    # minimal G-norm u with A u = rng lies in range(G^{-1} A^T)
    ginv_at = [[at[row][c] / g[row] for c in range(size)] for row in range(size)]
    _, piv2 = _exact.rref(ginv_at)
    uvec = [Fraction(0)] * size
    if piv2:
        cm = [[ginv_at[row][c] for c in piv2] for row in range(size)]
        ac = _exact.matmul(a, cm)
        act = _exact.transpose(ac)
        z = _exact.solve(_exact.matmul(act, ac), _exact.matvec(act, rng))
        uvec = _exact.matvec(cm, z)
    field = op.field
    return (HomogeneousVF._raw(op.n, op.degree, dict(zip(basis, uvec)), field),
            HomogeneousVF._raw(op.n, op.degree, dict(zip(basis, nvec)), field))


def _solve_svd(op: DegreeOperator, rhs: HomogeneousVF):
    uu, ss, vv = op._svd
    basis = op.basis
    size = len(basis)
    w = _weights(basis, op.field)
    rhat = [rhs[b] * w[j] for j, b in enumerate(basis)]
    order = sorted(range(size), key=lambda i: -ss[i])
    keep = order[:op.rank]
    # N = r - U_r U_r^T r ; u = V_r S^-1 U_r^T r   (vv holds V^T)
    proj = [mpmath.mpf(0)] * size
    uhat = [mpmath.mpf(0)] * size
    for col in keep:
        dot = mpmath.fsum(uu[r, col] * rhat[r] for r in range(size))
        for r in range(size):
            proj[r] += uu[r, col] * dot
        coef = dot / ss[col]
        for r in range(size):
            uhat[r] += vv[col, r] * coef
    nvec = [rh - p for rh, p in zip(rhat, proj)]
    field = op.field
    u = {b: uhat[j] / w[j] for j, b in enumerate(basis)}
    nf = {b: nvec[j] / w[j] for j, b in enumerate(basis)}
    return (HomogeneousVF._raw(op.n, op.degree, u, field),
            HomogeneousVF._raw(op.n, op.degree, nf, field))


def diagonal_linear(eigenvalues: Sequence, precision: int | None = None) -> LinearPart:
    """Convenience: diagonal linear part in the natural field of ``eigenvalues``."""
    field = infer_field(list(eigenvalues), precision)
    return LinearPart.diagonal_of(list(eigenvalues), field)


__all__ = [
    "LINEARIZE", "NORMAL_FORM", "LinearPart", "DegreeOperator", "build_degree_operator",
    "a_sequence", "brute_force_a", "solve_cohomological", "diagonal_linear", "RATIONAL",
    "float_field", "unit_index",
]
