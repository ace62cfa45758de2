"""Small exact linear algebra over ``Fraction`` (dense, row-major lists)."""

from __future__ import annotations

from fractions import Fraction


def rref(m: list) -> tuple[list, list]:
    """Reduced row echelon form and pivot columns."""
    a = [list(map(Fraction, row)) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [v / p for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def nullspace(m: list, ncols: int | None = None) -> list:
    """Basis of ``{v : m v = 0}``."""
    if not m:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    r, pivots = rref(m)
    cols = len(m[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for row, p in enumerate(pivots):
            v[p] = -r[row][f]
        basis.append(v)
    return basis


def transpose(m: list) -> list:
    return [list(col) for col in zip(*m)]


def matmul(a: list, b: list) -> list:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: list, v: list) -> list:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def solve(a: list, b: list) -> list:
    """Solve the square nonsingular system ``a x = b``."""
    n = len(a)
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular system")
    return [red[i][n] for i in range(n)]
