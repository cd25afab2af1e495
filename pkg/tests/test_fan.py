"""
Tests for cones, quasifans, completions and dual cones.
"""

import pytest

from exactlin import RationalSubspace
from exceptions import FanError, InvalidCompletion, NotAQuasiFan, NotASubset, NotFullDimensional, NotPointed
from fan import (
    Completion,
    QuasiFan,
    dual_completion,
    dual_cone,
    face_lattice,
    make_cone,
    orthogonal_completion,
    polygon_cone,
    quadrant,
    subfan_ops,
    supporting_functional,
)


class TestCones:
    """Test suite for cone construction and face enumeration."""

    def test_redundant_generator_dropped(self):
        """Test that an interior generator is not a ray."""
        cone = make_cone([(1, 0), (0, 1), (1, 1)], 2)
        assert cone.generators == ((0, 1), (1, 0))
        assert cone.dim == 2

    def test_generators_made_primitive(self):
        """Test that generators are scaled to primitive vectors."""
        assert make_cone([(2, 0), (0, 3)], 2).generators == ((0, 1), (1, 0))

    def test_line_is_not_pointed(self):
        """Test that a cone containing a line is rejected."""
        with pytest.raises(NotPointed):
            face_lattice([(1, 0), (-1, 0)], 2)

    def test_wrong_generator_length(self):
        """Test that generators must have the ambient length."""
        with pytest.raises(FanError):
            make_cone([(1, 0, 0)], 2)

    def test_supporting_functional(self, square):
        """Test that the supporting functional of a facet vanishes exactly on it."""
        fan, _ = square
        facet = fan.cone("0-1")
        xi = supporting_functional(fan.top, facet)
        values = [sum(a * b for a, b in zip(xi, g)) for g in fan.top.generators]
        assert all(v >= 0 for v in values)
        assert [g for g, v in zip(fan.top.generators, values) if v == 0] == list(facet.generators)


class TestQuasiFan:
    """Test suite for quasifans, labels and topology."""

    @pytest.mark.parametrize(
        "fixture, expected",
        [("ray", [1, 1]), ("quad", [1, 2, 1]), ("simplex3", [1, 3, 3, 1]), ("square", [1, 4, 4, 1]), ("pentagon", [1, 5, 5, 1])],
    )
    def test_f_vectors(self, fixture, expected, request):
        """Test face counts by dimension."""
        fan, _ = request.getfixturevalue(fixture)
        assert fan.f_vector() == expected

    def test_labels(self, ray):
        """Test zero-cone and ray labels."""
        fan, _ = ray
        assert [fan.label(c) for c in fan] == ["o", "0"]
        assert fan.cone("top") == fan.cone("0")

    def test_unknown_label(self, ray):
        """Test that an unknown label raises NotASubset."""
        fan, _ = ray
        with pytest.raises(NotASubset):
            fan.cone("7")

    def test_from_cones_union(self):
        """Test that two quadrants glue along a ray."""
        fan = QuasiFan.from_cones([[(1, 0), (0, 1)], [(0, 1), (-1, 0)]], 2, name="half")
        assert fan.f_vector() == [1, 3, 2]
        assert fan.top is None

    def test_diamonds(self, square, simplex3):
        """Test the number of length-two intervals."""
        assert len(square[0].diamonds()) == 8
        assert len(simplex3[0].diamonds()) == 6

    def test_sub_requires_interval_closure(self, square):
        """Test that skipping the middle of an interval is rejected."""
        fan, _ = square
        origin = fan.cone("o")
        with pytest.raises(NotAQuasiFan):
            fan.sub([origin, fan.top])

    def test_sub_keeps_labels(self, square):
        """Test that a sub-quasifan labels cones like its parent."""
        fan, _ = square
        facet = fan.cone("0-1")
        sub = fan.sub(fan.star(facet))
        assert sorted(sub.label(c) for c in sub) == ["0-1", "0-1-2-3"]

    def test_open_and_closed(self, square):
        """Test that stars are closed and face sets are open."""
        fan, _ = square
        ray = fan.cone("0")
        assert fan.is_closed(fan.star(ray))
        assert not fan.is_open(fan.star(ray))
        assert fan.is_open(fan.faces_of(ray))

    def test_subfan_ops(self, ray):
        """Test the summary of the zero cone in the ray fan."""
        fan, _ = ray
        summary = subfan_ops(fan, [fan.cone("o")])
        assert summary.is_open
        assert not summary.is_closed
        assert summary.closure == frozenset(fan.cones)

    def test_outside_cone(self, ray, quad):
        """Test that foreign cones are rejected."""
        with pytest.raises(NotASubset):
            ray[0].closure([quad[0].top])

    def test_polygon_needs_three_vertices(self):
        """Test polygon_cone argument checking."""
        with pytest.raises(FanError):
            polygon_cone(2)


class TestCompletion:
    """Test suite for completions."""

    def test_orthogonal_completion_validates(self, square):
        """Test that the orthogonal completion satisfies every invariant."""
        fan, completion = square
        completion.validate(fan)

    def test_relative_piece(self, ray):
        """Test Phi^o_sigma on the ray."""
        fan, completion = ray
        assert completion.relative(fan.cone("o"), fan.top).dim == 1

    def test_non_complement_rejected(self):
        """Test that a Phi meeting the annihilator is rejected."""
        fan = quadrant()
        phi = dict(orthogonal_completion(fan).phi)
        phi[fan.top] = RationalSubspace.span([[1, 0]], 2)
        with pytest.raises(InvalidCompletion):
            Completion(2, phi).validate(fan)

    def test_missing_cone(self, ray, quad):
        """Test lookup of a cone without a subspace."""
        _, completion = ray
        with pytest.raises(InvalidCompletion):
            completion[quad[0].top]

    def test_skew_completion_validates(self):
        """Test a non-orthogonal completion on the quadrant."""
        fan = quadrant()
        phi = dict(orthogonal_completion(fan).phi)
        phi[fan.cone("0")] = RationalSubspace.span([[1, 1]], 2)
        Completion(2, phi).validate(fan)


class TestDuality:
    """Test suite for dual cones and dual completions."""

    def test_square_dual(self, square):
        """Test that the dual of the square cone is again a square cone."""
        fan, _ = square
        duality = dual_cone(fan)
        assert duality.dual.f_vector() == [1, 4, 4, 1]
        for tau in duality.primal:
            perp = duality.perp(tau)
            assert perp.dim == 3 - tau.dim
            assert duality.inverse().perp(perp) == tau

    def test_quadrant_is_self_dual(self, quad):
        """Test the dual rays of the quadrant."""
        duality = dual_cone(quad[0])
        assert duality.dual.rays == ((0, 1), (1, 0))

    def test_needs_full_dimension(self):
        """Test that a ray in the plane has no dual in this sense."""
        with pytest.raises(NotFullDimensional):
            dual_cone(face_lattice([(1, 0)], 2))

    def test_dual_completion_validates(self, simplex3):
        """Test that the dual completion satisfies every invariant."""
        fan, completion = simplex3
        duality = dual_cone(fan)
        dual = dual_completion(completion, duality)
        dual.validate(duality.dual)
        assert dual[duality.perp(fan.cone("o"))].dim == 3
