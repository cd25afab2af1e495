"""
Tests for exterior algebras, wedge tables and composition of dual elements.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactlin import RationalSubspace
from exceptions import OverlappingSubspaces
from exterior import (
    ExtAlgebra,
    ExtDualElement,
    ExtElement,
    compose_dual,
    compose_hom,
    hom_space,
    monomials,
    permutation_sign,
    wedge,
    wedge_table,
)
from fan import orthogonal_completion, square_cone


def line(vector):
    return ExtAlgebra(RationalSubspace.span([vector], len(vector)))


def coefficient_dicts(dim: int):
    keys = monomials(dim)
    return st.lists(st.integers(min_value=-3, max_value=3), min_size=len(keys), max_size=len(keys)).map(
        lambda values: {m: Fraction(v) for m, v in zip(keys, values, strict=True) if v}
    )


class TestMonomials:
    """Test suite for monomial enumeration and signs."""

    def test_by_degree(self):
        """Test monomials of one degree."""
        assert monomials(3, 2) == [(0, 1), (0, 2), (1, 2)]
        assert monomials(2, 3) == []

    def test_all_degrees(self):
        """Test the full graded basis."""
        assert monomials(2) == [(), (0,), (1,), (0, 1)]
        assert ExtAlgebra(RationalSubspace.full(3)).graded_dims() == [1, 3, 3, 1]

    def test_permutation_sign(self):
        """Test signs of small permutations."""
        assert permutation_sign([0, 1, 2]) == 1
        assert permutation_sign([1, 0]) == -1
        assert permutation_sign([2, 0, 1]) == 1


class TestWedge:
    """Test suite for wedge products in canonical bases."""

    def test_anticommutes(self):
        """Test e1 ∧ e2 = -(e2 ∧ e1)."""
        a, b = line((1, 0)), line((0, 1))
        x = ExtElement.basis_vector(a, (0,))
        y = ExtElement.basis_vector(b, (0,))
        assert wedge(x, y).as_dict() == {(0, 1): 1}
        assert wedge(y, x).as_dict() == {(0, 1): -1}

    def test_overlap_rejected(self):
        """Test that overlapping pieces raise OverlappingSubspaces."""
        with pytest.raises(OverlappingSubspaces):
            wedge_table(RationalSubspace.span([[1, 1]], 2), RationalSubspace.span([[2, 2]], 2))

    def test_skew_basis_coefficient(self):
        """Test a wedge whose coefficient is a determinant in the sum's basis."""
        outer = RationalSubspace.span([[1, 1]], 2)
        inner = RationalSubspace.span([[0, 1]], 2)
        assert wedge_table(outer, inner)[((0,), (0,))] == {(0, 1): Fraction(1)}
        assert wedge_table(inner, outer)[((0,), (0,))] == {(0, 1): Fraction(-1)}

    def test_associative(self):
        """Test (x ∧ y) ∧ z = x ∧ (y ∧ z) across three lines."""
        x = ExtElement.basis_vector(line((1, 1, 0)), (0,))
        y = ExtElement.basis_vector(line((0, 1, 0)), (0,))
        z = ExtElement.basis_vector(line((0, 1, 1)), (0,))
        assert wedge(wedge(x, y), z).as_dict() == wedge(x, wedge(y, z)).as_dict()

    def test_element_arithmetic(self):
        """Test addition, scaling and degrees of elements."""
        a = ExtAlgebra(RationalSubspace.full(2))
        x = ExtElement.basis_vector(a, (0,)) + ExtElement.basis_vector(a, (0, 1)).scaled(3)
        assert x.degrees == {1, 2}
        assert x.as_dict() == {(0,): 1, (0, 1): 3}
        assert (x + x.scaled(-1)).as_dict() == {}


class TestComposition:
    """Test suite for composition of dual elements."""

    @given(coefficient_dicts(1), coefficient_dicts(2))
    @settings(max_examples=200, deadline=None)
    def test_wedge_pairing_identity(self, g, f):
        """Test that the composite evaluates b ∧ a to g(b) f(a)."""
        outer = RationalSubspace.span([[1, 1, 0]], 3)
        inner = RationalSubspace.span([[0, 1, 0], [1, 0, 2]], 3)
        h = compose_dual(g, f, outer, inner)
        table = wedge_table(outer, inner)
        for b in monomials(1):
            for a in monomials(2):
                value = sum((c * h.get(m, Fraction(0)) for m, c in table[(b, a)].items()), Fraction(0))
                assert value == g.get(b, 0) * f.get(a, 0)

    @given(coefficient_dicts(1), coefficient_dicts(1), coefficient_dicts(1))
    @settings(max_examples=100, deadline=None)
    def test_compose_hom_associative(self, c, b, a):
        """Test (c ∘ b) ∘ a = c ∘ (b ∘ a) along a maximal chain of the square cone."""
        fan = square_cone()
        completion = orthogonal_completion(fan)
        chain = [fan.cone("o"), fan.cone("0"), fan.cone("0-1"), fan.top]
        pieces = [ExtAlgebra(completion.relative(chain[k], chain[k + 1])) for k in range(3)]
        fa = ExtDualElement.from_dict(pieces[0], a)
        fb = ExtDualElement.from_dict(pieces[1], b)
        fc = ExtDualElement.from_dict(pieces[2], c)
        left = compose_hom(compose_hom(fc, fb), fa)
        right = compose_hom(fc, compose_hom(fb, fa))
        assert left.algebra.space == right.algebra.space
        assert left.as_dict() == right.as_dict()

    def test_compose_with_zero(self):
        """Test that composing with zero gives zero."""
        outer = RationalSubspace.span([[1, 0]], 2)
        inner = RationalSubspace.span([[0, 1]], 2)
        assert compose_dual({}, {(0,): Fraction(1)}, outer, inner) == {}

    def test_scalar_composition(self):
        """Test that scalars multiply."""
        outer = RationalSubspace.span([[1, 0]], 2)
        inner = RationalSubspace.span([[0, 1]], 2)
        assert compose_dual({(): Fraction(2)}, {(): Fraction(3)}, outer, inner) == {(): Fraction(6)}


class TestHomSpace:
    """Test suite for hom spaces between injectives."""

    def test_hom_from_origin_to_top(self, square):
        """Test the graded dimensions of Λ(V)* for the square cone."""
        fan, completion = square
        space = hom_space(fan.cone("o"), fan.top, completion)
        assert space.dims() == {0: 1, -1: 3, -2: 3, -3: 1}
        assert space.total_dim == 8

    def test_no_hom_against_the_order(self, square):
        """Test that hom(J_top, J_o) vanishes."""
        fan, completion = square
        assert hom_space(fan.top, fan.cone("o"), completion).total_dim == 0

    def test_pairing(self):
        """Test the Kronecker pairing."""
        a = ExtAlgebra(RationalSubspace.full(2))
        dual = ExtDualElement.from_dict(a, {(0,): Fraction(2), (0, 1): Fraction(5)})
        element = ExtElement.from_dict(a, {(0,): Fraction(3), (1,): Fraction(7)})
        assert dual.pair(element) == 6
        assert ExtDualElement.scalar(a, 4).degrees == {0}
