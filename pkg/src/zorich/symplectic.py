"""The antisymmetric operator Omega(pi), its image H(pi) and the form on it.

Everything here is exact (``int`` / ``Fraction``). Subspaces of ``R^A`` are
given by ambient column vectors in alphabet order; ``H(pi)`` gets the basis
``{Omega e_x : x in pivots}`` where the pivots are the leftmost independent
columns of Omega, and in that basis the Gram matrix of the symplectic form
is just the pivot submatrix of Omega.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact
from .errors import InvalidInput
from .perm import Letter, Permutation
from .rauzy import Arrow, Path, as_int_matrix, theta, theta_path


def omega(p: Permutation) -> np.ndarray:
    """``M[y, x] = <Omega e_x, e_y>``: +1 if x is right of y on top and left of
    y on the bottom, -1 for the opposite crossing, 0 otherwise."""
    letters = p.alphabet.letters
    d = len(letters)
    m = np.zeros((d, d), dtype=object)
    for j, x in enumerate(letters):
        for i, y in enumerate(letters):
            a0, a1 = p.pos0(x), p.pos1(x)
            b0, b1 = p.pos0(y), p.pos1(y)
            if a0 > b0 and a1 < b1:
                m[i, j] = 1
            elif a0 < b0 and a1 > b1:
                m[i, j] = -1
    return m


def genus(p: Permutation) -> int:
    return exact.exact_rank(omega(p)) // 2


@dataclass(frozen=True)
class SubspaceBasis:
    """Linearly independent ambient vectors spanning a subspace."""

    vectors: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        vecs = tuple(tuple(Fraction(v) for v in vec) for vec in self.vectors)
        object.__setattr__(self, "vectors", vecs)
        if vecs and exact.exact_rank(exact.columns_to_matrix(vecs)) != len(vecs):
            raise InvalidInput("subspace basis vectors are linearly dependent")

    @classmethod
    def span(cls, vectors: Sequence[Sequence]) -> "SubspaceBasis":
        """Independent subset (leftmost first) of arbitrary spanning vectors."""
        vectors = [list(v) for v in vectors]
        if not vectors:
            return cls(())
        piv = exact.pivot_columns(exact.columns_to_matrix(vectors))
        return cls(tuple(tuple(vectors[i]) for i in piv))

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def matrix(self) -> list[list[Fraction]]:
        return exact.columns_to_matrix(self.vectors)


@dataclass(frozen=True)
class SymplecticSpace:
    perm: Permutation
    pivots: tuple[Letter, ...]
    basis: SubspaceBasis
    gram: tuple[tuple[int, ...], ...]

    @property
    def genus(self) -> int:
        return len(self.pivots) // 2

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def coords(self, v: Sequence) -> list[Fraction]:
        """Coordinates of an ambient vector in the H basis."""
        c = exact.solve(self.basis.matrix(), list(v))
        if c is None:
            raise InvalidInput("vector is not in H(pi)")
        return c

    def contains(self, v: Sequence) -> bool:
        return exact.solve(self.basis.matrix(), list(v)) is not None

    def form(self, u: Sequence, v: Sequence) -> Fraction:
        """The symplectic form on two ambient vectors of H."""
        cu, cv = self.coords(u), self.coords(v)
        g = self.gram
        return sum(cu[i] * g[i][j] * cv[j] for i in range(self.dim) for j in range(self.dim))

    def ambient(self, c: Sequence) -> list[Fraction]:
        vecs = self.basis.vectors
        d = len(vecs[0])
        return [sum(Fraction(c[k]) * vecs[k][i] for k in range(len(vecs))) for i in range(d)]


def h_basis(p: Permutation) -> SymplecticSpace:
    om = omega(p)
    piv = exact.pivot_columns(om)
    letters = p.alphabet.letters
    vecs = tuple(tuple(om[:, j].tolist()) for j in piv)
    gram = tuple(tuple(int(om[i, j]) for j in piv) for i in piv)
    return SymplecticSpace(p, tuple(letters[j] for j in piv), SubspaceBasis(vecs), gram)


def verify_conjugacy(item: Arrow | Path, matrix: np.ndarray | None = None) -> bool:
    """``Theta Omega(start) Theta^T == Omega(end)`` exactly.

    ``matrix`` overrides the computed Theta (used to test corrupted input).
    """
    if isinstance(item, Arrow):
        m = theta(item) if matrix is None else matrix
    else:
        m = theta_path(item) if matrix is None else matrix
    lhs = m.dot(omega(item.start)).dot(m.T)
    return bool(np.array_equal(lhs, omega(item.end)))


def _coord_matrix(f: SubspaceBasis, s: SymplecticSpace) -> list[list[Fraction]]:
    # columns = H coordinates of the vectors of f
    return exact.columns_to_matrix([s.coords(v) for v in f.vectors])


def is_isotropic(f: SubspaceBasis, s: SymplecticSpace) -> bool:
    c = _coord_matrix(f, s)
    if not c:
        return True
    prod = exact.matmul(exact.matmul(exact.transpose(c), s.gram), c)
    return all(v == 0 for row in prod for v in row)


def symplectic_orthogonal(f: SubspaceBasis, s: SymplecticSpace) -> SubspaceBasis:
    if f.dim == 0:
        return s.basis
    c = _coord_matrix(f, s)
    constraints = exact.matmul(exact.transpose(c), s.gram)
    kern = exact.exact_kernel(constraints)
    return SubspaceBasis(tuple(tuple(s.ambient(k)) for k in kern))


def darboux_basis(s: SymplecticSpace) -> list[list[Fraction]]:
    """Symplectic basis ``e_1..e_g, f_1..f_g`` of H as ambient vectors.

    Symplectic Gram-Schmidt on the H coordinates, so ``w(e_i, f_j) = delta_ij``
    and all other pairings vanish. The inner product making this basis
    orthonormal is adapted to the form.
    """
    n = s.dim
    g = [[Fraction(v) for v in row] for row in s.gram]

    def w(u, v):
        return sum(u[i] * g[i][j] * v[j] for i in range(n) for j in range(n) if g[i][j])

    pool = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    es, fs = [], []
    while pool:
        u = pool.pop(0)
        partner = next((k for k, v in enumerate(pool) if w(u, v) != 0), None)
        if partner is None:
            # u lies in the radical of what remains; cannot happen for a
            # non-degenerate form once earlier pairs are projected out
            raise AssertionError("degenerate Gram matrix")
        v = pool.pop(partner)
        c = w(u, v)
        v = [x / c for x in v]
        es.append(u)
        fs.append(v)
        projected = []
        for z in pool:
            # remove components along the new hyperbolic pair
            a, b = w(z, v), w(u, z)
            projected.append([z[i] - a * u[i] - b * v[i] for i in range(n)])
        pool = [z for z in projected if any(z)]
    return [s.ambient(c) for c in es + fs]


def restricted_matrix(m: np.ndarray, s: SymplecticSpace, basis: list[list[Fraction]] | None = None):
    """Matrix of a loop's Theta on H(pi) in the given (default Darboux) basis.

    Returns rows of Fractions. ``m`` must map H(pi) into itself.
    """
    if basis is None:
        basis = darboux_basis(s)
    w = exact.columns_to_matrix(basis)
    mw = exact.matmul([[Fraction(int(v)) for v in row] for row in m.tolist()], w)
    wt = exact.transpose(w)
    gram = exact.matmul(wt, w)
    rhs = exact.matmul(wt, mw)
    cols = []
    for j in range(len(basis)):
        col = exact.solve(gram, [row[j] for row in rhs])
        cols.append(col)
    out = exact.columns_to_matrix(cols)
    check = exact.matmul(w, out)
    if check != mw:
        raise InvalidInput("matrix does not preserve H(pi)")
    return out


def standard_j(g: int) -> list[list[int]]:
    n = 2 * g
    j = [[0] * n for _ in range(n)]
    for i in range(g):
        j[i][g + i] = 1
        j[g + i][i] = -1
    return j


def is_minimal_class_rep(p: Permutation) -> bool:
    return p.d == 2 * genus(p)


def projection_matrix(p: Permutation, b: Letter) -> np.ndarray:
    """The coordinate projection ``R^A -> R^(A minus b)``."""
    letters = p.alphabet.letters
    rows = [[int(x == y) for x in letters] for y in letters if y != b]
    return as_int_matrix(rows)
