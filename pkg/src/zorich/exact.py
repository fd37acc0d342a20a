"""Exact linear algebra over the rationals.

Matrices are lists of rows (or 2-D numpy object arrays) holding ``int`` or
``Fraction`` entries. Rank and determinant use fraction-free (Bareiss)
elimination on integer rows; kernels and solves go through reduced row
echelon form over ``Fraction``.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

import numpy as np


def _rows(m) -> list[list]:
    if isinstance(m, np.ndarray):
        return [list(r) for r in m.tolist()]
    return [list(r) for r in m]


def _integer_rows(m) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (rank-preserving)."""
    out = []
    for row in _rows(m):
        den = 1
        for v in row:
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def bareiss(rows: list[list[int]]) -> tuple[list[list[int]], list[int], int]:
    """Fraction-free forward elimination, in place.

    Returns ``(rows, pivot_columns, sign)`` where ``sign`` tracks row swaps.
    """
    n = len(rows)
    ncols = len(rows[0]) if n else 0
    pivots: list[int] = []
    prev = 1
    sign = 1
    r = 0
    for c in range(ncols):
        if r == n:
            break
        p = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
            sign = -sign
        piv = rows[r][c]
        for i in range(r + 1, n):
            ri = rows[i]
            a = ri[c]
            rr = rows[r]
            for j in range(c + 1, ncols):
                ri[j] = (piv * ri[j] - a * rr[j]) // prev
            ri[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return rows, pivots, sign


def exact_rank(m) -> int:
    rows = _integer_rows(m)
    if not rows or not rows[0]:
        return 0
    return len(bareiss(rows)[1])


def pivot_columns(m) -> list[int]:
    """Leftmost maximal set of linearly independent columns."""
    rows = _integer_rows(m)
    if not rows or not rows[0]:
        return []
    return bareiss(rows)[1]


def det(m) -> int | Fraction:
    rows = _rows(m)
    n = len(rows)
    if n == 0:
        return 1
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    den = 1
    for row in rows:
        for v in row:
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
    ints = [[int(v * den) for v in row] for row in rows]
    ints, pivots, sign = bareiss(ints)
    if len(pivots) < n:
        return 0
    value = sign * ints[n - 1][n - 1]
    if den == 1:
        return value
    return Fraction(value, den**n)


def rref(m) -> tuple[list[list[Fraction]], list[int]]:
    rows = [[Fraction(v) for v in r] for r in _rows(m)]
    n = len(rows)
    ncols = len(rows[0]) if n else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == n:
            break
        p = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def exact_kernel(m) -> list[list[Fraction]]:
    """Basis of the right kernel ``{v : M v = 0}`` as a list of vectors.

    Vectors are scaled to have integer, primitive entries.
    """
    rows, pivots = rref(m)
    ncols = len(rows[0]) if rows else 0
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -rows[i][f]
        basis.append(_primitive(v))
    return basis


def _primitive(v: Sequence[Fraction]) -> list[Fraction]:
    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    g = g or 1
    return [Fraction(x // g) for x in ints]


def solve(m, b) -> list[Fraction] | None:
    """One solution ``x`` of ``M x = b``, or ``None`` if inconsistent."""
    rows = _rows(m)
    aug = [list(r) + [bv] for r, bv in zip(rows, b)]
    red, pivots = rref(aug)
    ncols = len(rows[0])
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = red[i][ncols]
    return x


def columns_to_matrix(cols: Sequence[Sequence]) -> list[list]:
    """Stack column vectors side by side into a list of rows."""
    if not cols:
        return []
    n = len(cols[0])
    return [[col[i] for col in cols] for i in range(n)]


def matmul(a, b) -> list[list]:
    ra, rb = _rows(a), _rows(b)
    cols = list(zip(*rb))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in ra]


def transpose(a) -> list[list]:
    return [list(c) for c in zip(*_rows(a))]


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def charpoly(m) -> list[Fraction]:
    """Characteristic polynomial coefficients, highest degree first.

    Faddeev-LeVerrier; every division is exact over the rationals.
    """
    a = [[Fraction(v) for v in r] for r in _rows(m)]
    n = len(a)
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        prev = mk
        mk = matmul(a, prev)
        for i in range(n):
            mk[i][i] += coeffs[-1]
        am = matmul(a, mk)
        ck = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(ck)
    return coeffs


def root_multiplicity(coeffs: Sequence[Fraction], root: Fraction | int) -> int:
    """Multiplicity of ``root`` in the polynomial given highest degree first."""
    poly = [Fraction(c) for c in coeffs]
    mult = 0
    while len(poly) > 1:
        q = [poly[0]]
        for c in poly[1:]:
            q.append(c + q[-1] * root)
        if q[-1] != 0:
            break
        poly = q[:-1]
        mult += 1
    return mult
