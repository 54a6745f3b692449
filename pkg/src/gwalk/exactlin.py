"""Exact linear algebra over the rationals.

Everything here works on lists of lists of Fraction and never touches
floats.  The elimination core is fraction-free (Bareiss) on integer
matrices obtained by clearing denominators row by row, so intermediate
entries stay exact and reasonably small.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def _clear_row(row: list[Fraction]) -> list[int]:
    den = 1
    for x in row:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def _bareiss_echelon(rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.  Returns (echelon rows, pivot columns)."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [list(r) for r in rows]
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def kernel_basis(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right null space of `matrix`, as Fraction vectors.

    The basis is the canonical one obtained by setting each free variable
    to 1 in turn, so the result is deterministic.
    """
    m = len(matrix)
    if m == 0:
        return []
    n = len(matrix[0])
    ech, pivots = _bareiss_echelon([_clear_row(r) for r in matrix])
    free = [c for c in range(n) if c not in pivots]
    basis: list[list[Fraction]] = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        # back-substitute pivot variables from the bottom up
        for i in range(len(pivots) - 1, -1, -1):
            pc = pivots[i]
            s = sum((Fraction(ech[i][j]) * vec[j] for j in range(pc + 1, n)), Fraction(0))
            vec[pc] = -s / ech[i][pc]
        basis.append(vec)
    return basis


def solve(matrix: list[list[Fraction]], rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve A X = B exactly for square nonsingular A; B given as columns-of-rows.

    `rhs` is a list of rows (same row count as A, any number of columns).
    Raises ValueError if A is singular.
    """
    m = len(matrix)
    if any(len(r) != m for r in matrix):
        raise ValueError("matrix must be square")
    k = len(rhs[0]) if m else 0
    aug = [list(matrix[i]) + list(rhs[i]) for i in range(m)]
    ech, pivots = _bareiss_echelon([_clear_row(r) for r in aug])
    if len(pivots) != m or pivots != list(range(m)):
        raise ValueError("matrix is singular")
    sol = [[Fraction(0)] * k for _ in range(m)]
    for i in range(m - 1, -1, -1):
        for col in range(k):
            s = Fraction(ech[i][m + col])
            for j in range(i + 1, m):
                s -= Fraction(ech[i][j]) * sol[j][col]
            sol[i][col] = s / ech[i][i]
    return sol


def mat_vec(matrix: list[list[Fraction]], vec: list[Fraction]) -> list[Fraction]:
    return [sum((row[j] * vec[j] for j in range(len(vec))), Fraction(0)) for row in matrix]
