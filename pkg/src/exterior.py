"""
Exterior algebras on canonical rational bases.

Monomials are sorted index tuples into the canonical basis of a
``RationalSubspace``. A morphism J_tau -> J_rho is an element of the graded
dual Λ(Φ^τ_ρ)*, stored as a dict from monomial to coefficient. Composition is
the inverse transpose of the wedge isomorphism

    Λ(outer) ⊗ Λ(inner) -> Λ(outer ⊕ inner),   b ⊗ a ↦ b ∧ a,

so that (g ∘ f)(b ∧ a) = g(b) · f(a) for g on the outer piece and f on the
inner piece.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from cache import MemoTable
from exactlin import RationalSubspace, det, inverse, qzeros
from exceptions import OverlappingSubspaces

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
DualEntry = dict[Monomial, Fraction]

_wedge_tables: MemoTable[dict] = MemoTable("wedge_tables")
_inverse_tables: MemoTable[dict] = MemoTable("inverse_wedge_tables")


def monomials(dim: int, degree: int | None = None) -> list[Monomial]:
    """Sorted index subsets of {0..dim-1}, all degrees in increasing order or one degree."""
    if degree is not None:
        if degree < 0 or degree > dim:
            return []
        return list(combinations(range(dim), degree))
    return [m for k in range(dim + 1) for m in combinations(range(dim), k)]


def permutation_sign(sequence: Iterable[int]) -> int:
    """Sign of the permutation sorting a sequence of distinct integers."""
    items = list(sequence)
    sign = 1
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def clean(entry: Mapping[Monomial, Fraction]) -> DualEntry:
    """Drop zero coefficients."""
    return {m: Fraction(c) for m, c in entry.items() if c != 0}


# ============================================================================
# ALGEBRAS AND ELEMENTS
# ============================================================================


@dataclass(frozen=True)
class ExtAlgebra:
    """Λ(W) for a rational subspace W, with Λ^1 in degree one."""

    space: RationalSubspace

    @property
    def dim(self) -> int:
        return self.space.dim

    def monomials(self, degree: int | None = None) -> list[Monomial]:
        return monomials(self.dim, degree)

    def graded_dims(self) -> list[int]:
        return [comb(self.dim, k) for k in range(self.dim + 1)]


@dataclass(frozen=True)
class ExtElement:
    """Element of Λ(W) in the canonical monomial basis."""

    algebra: ExtAlgebra
    coefficients: tuple[tuple[Monomial, Fraction], ...]

    @classmethod
    def from_dict(cls, algebra: ExtAlgebra, coefficients: Mapping[Monomial, Fraction]) -> ExtElement:
        return cls(algebra, tuple(sorted(clean(coefficients).items())))

    @classmethod
    def basis_vector(cls, algebra: ExtAlgebra, monomial: Monomial) -> ExtElement:
        return cls(algebra, ((tuple(monomial), Fraction(1)),))

    def as_dict(self) -> DualEntry:
        return dict(self.coefficients)

    @property
    def degrees(self) -> set[int]:
        return {len(m) for m, _ in self.coefficients}

    def __add__(self, other: ExtElement) -> ExtElement:
        total = defaultdict(Fraction, self.as_dict())
        for m, c in other.coefficients:
            total[m] += c
        return ExtElement.from_dict(self.algebra, total)

    def scaled(self, factor) -> ExtElement:
        return ExtElement.from_dict(self.algebra, {m: c * factor for m, c in self.coefficients})


@dataclass(frozen=True)
class ExtDualElement:
    """Element of the graded dual Λ(W)*, with Λ^p(W)* in degree -p."""

    algebra: ExtAlgebra
    coefficients: tuple[tuple[Monomial, Fraction], ...]

    @classmethod
    def from_dict(cls, algebra: ExtAlgebra, coefficients: Mapping[Monomial, Fraction]) -> ExtDualElement:
        return cls(algebra, tuple(sorted(clean(coefficients).items())))

    @classmethod
    def scalar(cls, algebra: ExtAlgebra, value=1) -> ExtDualElement:
        return cls.from_dict(algebra, {(): Fraction(value)})

    def as_dict(self) -> DualEntry:
        return dict(self.coefficients)

    @property
    def degrees(self) -> set[int]:
        return {-len(m) for m, _ in self.coefficients}

    def pair(self, element: ExtElement) -> Fraction:
        """Kronecker pairing of dual monomials with monomials."""
        mine = self.as_dict()
        return sum((mine.get(m, Fraction(0)) * c for m, c in element.coefficients), Fraction(0))


# ============================================================================
# WEDGE TABLES
# ============================================================================


def _compute_wedge_table(outer: RationalSubspace, inner: RationalSubspace) -> dict[tuple[Monomial, Monomial], DualEntry]:
    target = outer + inner
    if target.dim != outer.dim + inner.dim:
        raise OverlappingSubspaces(f"subspaces of dimensions {outer.dim} and {inner.dim} meet nontrivially")
    p, q = outer.dim, inner.dim
    coords = target.coordinates(outer.basis + inner.basis) if p + q else qzeros(0, 0)
    table: dict[tuple[Monomial, Monomial], DualEntry] = {}
    for b in monomials(p):
        for a in monomials(q):
            rows = list(b) + [p + i for i in a]
            expansion: DualEntry = {}
            for m in monomials(p + q, len(rows)):
                c = det(coords[np.ix_(rows, list(m))]) if rows else Fraction(1)
                if c:
                    expansion[m] = c
            table[(b, a)] = expansion
    return table


def wedge_table(outer: RationalSubspace, inner: RationalSubspace) -> dict[tuple[Monomial, Monomial], DualEntry]:
    """
    Expansion of b ∧ a in the canonical basis of outer ⊕ inner.

    Raises:
        OverlappingSubspaces: if outer and inner intersect
    """
    return _wedge_tables.get((outer, inner), lambda: _compute_wedge_table(outer, inner))


def _compute_inverse_table(outer: RationalSubspace, inner: RationalSubspace) -> dict[tuple[Monomial, Monomial], DualEntry]:
    table = wedge_table(outer, inner)
    p, q = outer.dim, inner.dim
    rows: dict[tuple[Monomial, Monomial], DualEntry] = {}
    for r in range(p + q + 1):
        pairs = [(b, a) for b in monomials(p) for a in monomials(q) if len(b) + len(a) == r]
        targets = monomials(p + q, r)
        position = {m: k for k, m in enumerate(targets)}
        w = qzeros(len(targets), len(pairs))
        for col, pair in enumerate(pairs):
            for m, c in table[pair].items():
                w[position[m], col] = c
        w_inv = inverse(w)
        for row, pair in enumerate(pairs):
            rows[pair] = {m: w_inv[row, position[m]] for m in targets if w_inv[row, position[m]] != 0}
    return rows


def inverse_wedge_table(outer: RationalSubspace, inner: RationalSubspace) -> dict[tuple[Monomial, Monomial], DualEntry]:
    """Rows of the inverse wedge matrix: (b, a) -> {m: coefficient}."""
    return _inverse_tables.get((outer, inner), lambda: _compute_inverse_table(outer, inner))


def wedge(x: ExtElement, y: ExtElement) -> ExtElement:
    """
    x ∧ y in Λ(W1 ⊕ W2), expanded in the canonical basis of the sum.

    Raises:
        OverlappingSubspaces: if W1 and W2 intersect
    """
    table = wedge_table(x.algebra.space, y.algebra.space)
    target = ExtAlgebra(x.algebra.space + y.algebra.space)
    total: dict[Monomial, Fraction] = defaultdict(Fraction)
    for b, cb in x.coefficients:
        for a, ca in y.coefficients:
            for m, c in table[(b, a)].items():
                total[m] += c * cb * ca
    return ExtElement.from_dict(target, total)


def compose_dual(outer_entry: Mapping, inner_entry: Mapping, outer: RationalSubspace, inner: RationalSubspace) -> DualEntry:
    """
    Composite of dual elements on outer and inner pieces, as a dual element on their sum.

    h(m) = Σ_{(b,a)} W^{-1}[(b,a), m] · g(b) · f(a) with g = outer_entry, f = inner_entry.
    """
    if not outer_entry or not inner_entry:
        return {}
    rows = inverse_wedge_table(outer, inner)
    total: dict[Monomial, Fraction] = defaultdict(Fraction)
    for b, gb in outer_entry.items():
        for a, fa in inner_entry.items():
            for m, c in rows[(b, a)].items():
                total[m] += c * gb * fa
    return clean(total)


# ============================================================================
# MORPHISMS BETWEEN INJECTIVES
# ============================================================================


@dataclass(frozen=True)
class HomSpace:
    """Graded basis of hom(J_tau, J_sigma) = Λ(Φ^τ_σ)* (empty unless tau is a face of sigma)."""

    algebra: ExtAlgebra | None
    basis: tuple[tuple[int, Monomial], ...]

    def dims(self) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for degree, _ in self.basis:
            out[degree] += 1
        return dict(out)

    @property
    def total_dim(self) -> int:
        return len(self.basis)


def hom_space(tau, sigma, completion) -> HomSpace:
    """Dual monomial basis of hom(J_tau, J_sigma), the Λ^p part in degree -p."""
    if not tau.is_face_of(sigma):
        return HomSpace(None, ())
    algebra = ExtAlgebra(completion.relative(tau, sigma))
    return HomSpace(algebra, tuple((-len(m), m) for m in algebra.monomials()))


def compose_hom(f: ExtDualElement, g: ExtDualElement) -> ExtDualElement:
    """
    Composite f ∘ g of g: J_rho -> J_tau and f: J_tau -> J_sigma.

    f lives on the outer piece Φ^τ_σ and g on the inner piece Φ^ρ_τ; the result
    lives on their sum Φ^ρ_σ.
    """
    outer, inner = f.algebra.space, g.algebra.space
    target = ExtAlgebra(outer + inner)
    return ExtDualElement.from_dict(target, compose_dual(f.as_dict(), g.as_dict(), outer, inner))
