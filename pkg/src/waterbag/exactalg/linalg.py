"""Small exact linear algebra over rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence


class SingularMatrixError(ArithmeticError):
    pass


def inverse(matrix: Sequence[Sequence]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse of a square rational matrix."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> List[Fraction]:
    """Least-norm-free exact solve of a consistent (possibly overdetermined) system."""
    rows = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    ncols = len(matrix[0]) if matrix else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    for row in rows[r:]:
        if row[-1]:
            raise SingularMatrixError("inconsistent linear system")
    if len(pivots) < ncols:
        raise SingularMatrixError("linear system is underdetermined")
    out = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        out[c] = rows[i][-1]
    return out
