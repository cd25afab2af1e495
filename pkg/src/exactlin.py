"""
Exact rational linear algebra.

Matrices are numpy object arrays of ``fractions.Fraction``. Every routine is
deterministic: echelon forms are fully reduced, kernels come from the free
columns of the reduced form, and subspaces are stored by a canonical basis of
primitive integer rows so that exterior monomial indices are reproducible.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

import numpy as np

from exceptions import AlgebraError, SingularMatrix

logger = logging.getLogger(__name__)

Vector = tuple[Fraction, ...]


# ============================================================================
# MATRIX CONSTRUCTION
# ============================================================================


def qmatrix(rows, cols: int | None = None) -> np.ndarray:
    """
    Build a dense rational matrix.

    Args:
        rows: Nested sequence (or 2D array) of numbers convertible to Fraction
        cols: Column count, required only when ``rows`` is empty

    Returns:
        Object array of shape (len(rows), cols) holding Fractions
    """
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        out = np.empty(rows.shape, dtype=object)
        for index, value in np.ndenumerate(rows):
            out[index] = Fraction(value)
        return out

    data = [[Fraction(x) for x in row] for row in rows]
    if not data:
        return np.empty((0, cols or 0), dtype=object)
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise AlgebraError("ragged matrix rows")
    out = np.empty((len(data), width), dtype=object)
    for i, row in enumerate(data):
        for j, value in enumerate(row):
            out[i, j] = value
    return out


def qzeros(rows: int, cols: int) -> np.ndarray:
    """Zero rational matrix."""
    out = np.empty((rows, cols), dtype=object)
    out.fill(Fraction(0))
    return out


def qidentity(n: int) -> np.ndarray:
    """Identity rational matrix."""
    out = qzeros(n, n)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def qvector(values: Iterable) -> Vector:
    """Immutable rational vector."""
    return tuple(Fraction(x) for x in values)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product that keeps Fraction entries for empty inner dimensions."""
    if a.shape[1] == 0:
        return qzeros(a.shape[0], b.shape[1])
    return a.dot(b)


def is_zero(matrix: np.ndarray) -> bool:
    """Check whether every entry vanishes."""
    return all(x == 0 for x in matrix.flat)


# ============================================================================
# ELIMINATION
# ============================================================================


def rref(matrix) -> tuple[np.ndarray, tuple[int, ...]]:
    """
    Reduced row echelon form.

    Args:
        matrix: Rational matrix (any shape)

    Returns:
        (R, pivots) where R has the same shape as the input, its first
        len(pivots) rows are the nonzero rows, and pivots lists pivot columns
    """
    reduced = qmatrix(matrix).copy()
    n_rows, n_cols = reduced.shape
    pivots: list[int] = []
    row = 0
    for col in range(n_cols):
        if row == n_rows:
            break
        pivot_row = next((i for i in range(row, n_rows) if reduced[i, col] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != row:
            reduced[[row, pivot_row]] = reduced[[pivot_row, row]]
        reduced[row] = reduced[row] / reduced[row, col]
        for i in range(n_rows):
            if i != row and reduced[i, col] != 0:
                reduced[i] = reduced[i] - reduced[i, col] * reduced[row]
        pivots.append(col)
        row += 1
    return reduced, tuple(pivots)


def rank(matrix) -> int:
    """Rank of a rational matrix."""
    m = qmatrix(matrix)
    if m.size == 0:
        return 0
    return len(rref(m)[1])


def kernel_basis(matrix) -> np.ndarray:
    """
    Canonical basis of the right kernel {x : Ax = 0}.

    One basis vector per free column f of the reduced echelon form, with
    x_f = 1, the other free coordinates zero, and pivot coordinates read off
    the reduced rows.

    Returns:
        Matrix whose columns are the basis vectors (shape cols(A) x nullity)
    """
    m = qmatrix(matrix)
    n_cols = m.shape[1]
    if m.shape[0] == 0:
        return qidentity(n_cols)
    reduced, pivots = rref(m)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = qzeros(n_cols, len(free))
    for k, f in enumerate(free):
        basis[f, k] = Fraction(1)
        for r, p in enumerate(pivots):
            basis[p, k] = -reduced[r, f]
    return basis


def solve(matrix, rhs: Sequence) -> Vector | None:
    """
    Solve Ax = b with free variables set to zero.

    Returns:
        A solution vector, or None when the system is inconsistent
    """
    m = qmatrix(matrix)
    b = qvector(rhs)
    n_rows, n_cols = m.shape
    if len(b) != n_rows:
        raise AlgebraError(f"right-hand side has length {len(b)}, expected {n_rows}")
    augmented = qzeros(n_rows, n_cols + 1)
    augmented[:, :n_cols] = m
    augmented[:, n_cols] = b
    reduced, pivots = rref(augmented)
    if n_cols in pivots:
        return None
    x = [Fraction(0)] * n_cols
    for r, p in enumerate(pivots):
        x[p] = reduced[r, n_cols]
    return tuple(x)


def det(matrix) -> Fraction:
    """
    Determinant by fraction-free (Bareiss) elimination.

    Rows are first scaled to integers; the scaling is divided out at the end.
    """
    m = qmatrix(matrix)
    n = m.shape[0]
    if m.shape != (n, n):
        raise AlgebraError(f"determinant of non-square {m.shape} matrix")
    if n == 0:
        return Fraction(1)

    scale = 1
    a: list[list[int]] = []
    for row in m:
        denominator = reduce(lcm, (x.denominator for x in row), 1)
        scale *= denominator
        a.append([int(x * denominator) for x in row])

    sign = 1
    previous = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], scale)


def inverse(matrix) -> np.ndarray:
    """Inverse by Gauss-Jordan elimination; raises SingularMatrix."""
    m = qmatrix(matrix)
    n = m.shape[0]
    if m.shape != (n, n):
        raise AlgebraError(f"inverse of non-square {m.shape} matrix")
    augmented = qzeros(n, 2 * n)
    augmented[:, :n] = m
    augmented[:, n:] = qidentity(n)
    reduced, pivots = rref(augmented)
    if n and pivots[:n] != tuple(range(n)):
        raise SingularMatrix(f"{n}x{n} matrix has rank {sum(p < n for p in pivots)}")
    return reduced[:, n:].copy()


def solve_mod2(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> tuple[int, ...] | None:
    """
    Solve a linear system over GF(2) with free variables set to zero.

    Returns:
        0/1 solution tuple, or None when inconsistent
    """
    rows = [[int(x) % 2 for x in row] + [int(b) % 2] for row, b in zip(matrix, rhs, strict=True)]
    n_cols = len(rows[0]) - 1 if rows else 0
    pivots: list[int] = []
    r = 0
    for col in range(n_cols):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                rows[i] = [x ^ y for x, y in zip(rows[i], rows[r], strict=True)]
        pivots.append(col)
        r += 1
    if any(row[n_cols] and not any(row[:n_cols]) for row in rows):
        return None
    x = [0] * n_cols
    for i, p in enumerate(pivots):
        x[p] = rows[i][n_cols]
    return tuple(x)


# ============================================================================
# CANONICAL BASES AND SUBSPACES
# ============================================================================


def primitive(vector: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to a primitive integer vector with the same direction."""
    values = qvector(vector)
    denominator = reduce(lcm, (x.denominator for x in values), 1)
    ints = [int(x * denominator) for x in values]
    divisor = reduce(gcd, ints, 0)
    if divisor == 0:
        return tuple(ints)
    return tuple(x // divisor for x in ints)


def canonical_subspace_basis(spanning_vectors: Iterable[Sequence], ambient_dim: int | None = None) -> np.ndarray:
    """
    Canonical basis of the span of some vectors.

    The reduced row echelon rows of the spanning set, each cleared of
    denominators to a primitive integer vector. Idempotent and independent of
    the order (and multiplicity) of the input vectors.

    Returns:
        Matrix whose rows are the basis vectors
    """
    vectors = [qvector(v) for v in spanning_vectors]
    if not vectors:
        return np.empty((0, ambient_dim or 0), dtype=object)
    reduced, pivots = rref(qmatrix(vectors))
    rows = [primitive(reduced[r]) for r in range(len(pivots))]
    return qmatrix(rows, cols=reduced.shape[1])


@dataclass(frozen=True)
class RationalSubspace:
    """Subspace of Q^n stored by its canonical basis."""

    ambient_dim: int
    basis: tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> RationalSubspace:
        rows = canonical_subspace_basis(vectors, ambient_dim)
        if rows.shape[0] and rows.shape[1] != ambient_dim:
            raise AlgebraError(f"vectors of length {rows.shape[1]} in ambient dimension {ambient_dim}")
        return cls(ambient_dim, tuple(tuple(row) for row in rows))

    @classmethod
    def zero(cls, ambient_dim: int) -> RationalSubspace:
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> RationalSubspace:
        return cls.span(qidentity(ambient_dim), ambient_dim)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> np.ndarray:
        """Basis vectors as matrix rows."""
        return qmatrix(self.basis, cols=self.ambient_dim)

    def contains(self, vector: Sequence) -> bool:
        if self.dim == 0:
            return all(Fraction(x) == 0 for x in vector)
        return solve(self.matrix.T, vector) is not None

    def is_subspace_of(self, other: RationalSubspace) -> bool:
        return all(other.contains(v) for v in self.basis)

    def coordinates(self, vectors: Iterable[Sequence]) -> np.ndarray:
        """
        Coordinates of vectors in this basis.

        Returns:
            Matrix with one row per input vector
        """
        rows = []
        transpose = self.matrix.T
        for v in vectors:
            x = solve(transpose, v) if self.dim else (() if all(Fraction(c) == 0 for c in v) else None)
            if x is None:
                raise AlgebraError("vector does not lie in the subspace")
            rows.append(x)
        return qmatrix(rows, cols=self.dim)

    def annihilator(self) -> RationalSubspace:
        """Annihilator in the dual space, using the standard pairing of coordinates."""
        if self.dim == 0:
            return RationalSubspace.full(self.ambient_dim)
        kernel = kernel_basis(self.matrix)
        return RationalSubspace.span(kernel.T, self.ambient_dim)

    def __add__(self, other: RationalSubspace) -> RationalSubspace:
        return RationalSubspace.span(self.basis + other.basis, self.ambient_dim)

    def intersect(self, other: RationalSubspace) -> RationalSubspace:
        """Intersection, computed as the annihilator of the sum of annihilators."""
        return (self.annihilator() + other.annihilator()).annihilator()

    def meets_trivially(self, other: RationalSubspace) -> bool:
        return (self + other).dim == self.dim + other.dim


def annihilator(vectors: Iterable[Sequence], ambient_dim: int) -> RationalSubspace:
    """Annihilator of a set of vectors under the standard pairing."""
    return RationalSubspace.span(vectors, ambient_dim).annihilator()


def compound_matrix(matrix: np.ndarray, order: int, row_sets: Sequence[tuple], col_sets: Sequence[tuple]) -> np.ndarray:
    """Minors of ``matrix`` indexed by the given row and column index sets of size ``order``."""
    out = qzeros(len(row_sets), len(col_sets))
    for a, rows in enumerate(row_sets):
        for b, cols in enumerate(col_sets):
            out[a, b] = det(matrix[np.ix_(rows, cols)]) if order else Fraction(1)
    return out
