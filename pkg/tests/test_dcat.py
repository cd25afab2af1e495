"""
Tests for complexes of injectives: typing, shifts, cones, functors, stalks,
hom spaces, minimal models, isomorphism and perversity.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcat import (
    ChainMap,
    InjComplex,
    compose_maps,
    corestrict_closed,
    direct_sum,
    extend_closed,
    extend_open,
    gamma_costalk,
    gamma_stalk,
    hom_candidates,
    hom_spaces,
    identity_map,
    is_chain_map,
    is_isomorphic,
    mapping_cone,
    minimize,
    perversity_check,
    restrict_open,
    shift,
    shift_doubled,
    stalk_unit,
    t_truncate_point,
    twist,
    validate,
)
from exceptions import (
    BadEntryDegree,
    ComplexError,
    DSquaredNonzero,
    FanMismatch,
    NotAChainMap,
    NotClosed,
    NotOpen,
    ParityViolation,
)
from fan import orthogonal_completion, quadrant, ray_fan
from models import BigradedDims, Summand


def hull(fan, completion):
    """J_o -> J_top with a scalar entry: the injective hull of the top simple on the ray."""
    origin, top = fan.cone("o"), fan.top
    return InjComplex(fan, completion, [Summand(origin, -2, 0), Summand(top, 0, 0)], {(0, 1): {(): 1}})


def simple_origin(fan, completion, scale=1):
    """J_o -> J_top through the dual of the ray generator, twisted once."""
    origin, top = fan.cone("o"), fan.top
    return InjComplex(fan, completion, [Summand(origin, -2, 0), Summand(top, 0, 2)], {(0, 1): {(0,): scale}})


class TestValidation:
    """Test suite for typing and d ∘ d = 0."""

    def test_well_typed(self, ray):
        """Test the certificate of a valid two-term complex."""
        certificate = validate(hull(*ray))
        assert certificate.summands == 2
        assert certificate.entries == 1

    def test_wrong_complex_degree(self, ray):
        """Test that an entry must raise complex degree by one."""
        fan, completion = ray
        with pytest.raises(BadEntryDegree):
            InjComplex(fan, completion, [Summand(fan.cone("o"), 0, 0), Summand(fan.top, 0, 0)], {(0, 1): {(): 1}})

    def test_wrong_direction(self, ray):
        """Test that entries only run from a face to a larger cone."""
        fan, completion = ray
        with pytest.raises(BadEntryDegree):
            InjComplex(fan, completion, [Summand(fan.top, -2, 0), Summand(fan.cone("o"), 0, 0)], {(0, 1): {(): 1}})

    def test_wrong_exterior_degree(self, ray):
        """Test that the monomial degree must match the grading jump."""
        fan, completion = ray
        with pytest.raises(BadEntryDegree):
            InjComplex(fan, completion, [Summand(fan.cone("o"), -2, 0), Summand(fan.top, 0, 0)], {(0, 1): {(0,): 1}})

    def test_foreign_cone(self, ray, quad):
        """Test that a summand must live on the quasifan."""
        fan, completion = ray
        with pytest.raises(FanMismatch):
            InjComplex(fan, completion, [Summand(quad[0].top, 0, 0)])

    def test_d_squared_nonzero(self):
        """Test that two scalar entries along a chain do not compose to zero."""
        fan = quadrant()
        completion = orthogonal_completion(fan)
        summands = [Summand(fan.cone("o"), -2, 0), Summand(fan.cone("0"), 0, 0), Summand(fan.top, 2, 0)]
        with pytest.raises(DSquaredNonzero):
            InjComplex(fan, completion, summands, {(0, 1): {(): 1}, (1, 2): {(): 1}})

    def test_zero_entries_dropped(self, ray):
        """Test that zero coefficients are cleaned away."""
        fan, completion = ray
        S = InjComplex(fan, completion, [Summand(fan.cone("o"), -2, 0), Summand(fan.top, 0, 0)], {(0, 1): {(): 0}})
        assert S.entries == {}


class TestShifts:
    """Test suite for shifts and twists."""

    def test_shift_moves_and_signs(self, ray):
        """Test that [1] moves summands down one step and negates the differential."""
        S = shift(hull(*ray), 1)
        assert [(s.u, s.v) for s in S.summands] == [(-4, 0), (-2, 0)]
        assert S.entries == {(0, 1): {(): -1}}

    def test_parity_violation(self, ray):
        """Test that a shift off the lattice is rejected."""
        with pytest.raises(ParityViolation):
            shift_doubled(hull(*ray), 1, 0)
        with pytest.raises(ParityViolation):
            shift(hull(*ray), Fraction(1, 3))

    def test_twist_inverse(self, ray):
        """Test that twisting by k and -k is the identity."""
        S = simple_origin(*ray)
        T = twist(twist(S, 3), -3)
        assert T.summands == S.summands
        assert T.entries == S.entries

    def test_twist_keeps_level(self, ray):
        """Test that a twist preserves i + j."""
        S = simple_origin(*ray)
        assert [s.u + s.v for s in twist(S, 5).summands] == [s.u + s.v for s in S.summands]

    @given(
        st.integers(min_value=-5, max_value=5),
        st.integers(min_value=-3, max_value=3),
        st.integers(min_value=-5, max_value=5),
        st.integers(min_value=-3, max_value=3),
    )
    @settings(max_examples=100, deadline=None)
    def test_shifts_compose(self, a, a_off, b, b_off):
        """Test that shifting twice equals shifting once by the sum, signs included."""
        fan = ray_fan()
        S = simple_origin(fan, orthogonal_completion(fan))
        first = shift_doubled(shift_doubled(S, a, a + 2 * a_off), b, b + 2 * b_off)
        once = shift_doubled(S, a + b, a + b + 2 * (a_off + b_off))
        assert first.summands == once.summands
        assert first.entries == once.entries


class TestSumsAndCones:
    """Test suite for direct sums, mapping cones and chain maps."""

    def test_direct_sum(self, ray):
        """Test that a direct sum concatenates summands and offsets entries."""
        S = direct_sum(hull(*ray), simple_origin(*ray))
        assert S.size == 4
        assert set(S.entries) == {(0, 1), (2, 3)}

    def test_direct_sum_of_nothing(self):
        """Test that an empty direct sum is an error."""
        with pytest.raises(ComplexError):
            direct_sum()

    def test_cone_of_identity_is_contractible(self, ray):
        """Test that Cone(id) minimizes to zero."""
        S = hull(*ray)
        cone = mapping_cone(identity_map(S))
        assert cone.size == 4
        assert minimize(cone).is_zero
        assert is_isomorphic(cone, InjComplex.zero(*ray))

    def test_not_a_chain_map(self, ray):
        """Test that a map ignoring the differential is rejected."""
        S = simple_origin(*ray)
        with pytest.raises(NotAChainMap):
            ChainMap(S, S, {(0, 0): {(): 1}})

    def test_scaled_identity_is_chain_map(self, ray):
        """Test that a uniform scalar commutes with the differential."""
        S = simple_origin(*ray)
        f = ChainMap(S, S, {(0, 0): {(): 2}, (1, 1): {(): 2}})
        assert is_chain_map(f)

    def test_compose_identity(self, ray):
        """Test id ∘ id = id."""
        S = hull(*ray)
        ident = identity_map(S)
        assert compose_maps(ident, ident).entries == ident.entries


class TestFunctors:
    """Test suite for restriction and extension along open and closed pieces."""

    def test_restrict_open(self, ray):
        """Test j^* to the zero cone keeps its summand only."""
        fan, _ = ray
        S = restrict_open(hull(*ray), [fan.cone("o")])
        assert [fan.label(s.cone) for s in S.summands] == ["o"]

    def test_restrict_to_non_open(self, ray):
        """Test that restricting to a set missing faces is rejected."""
        fan, _ = ray
        with pytest.raises(NotOpen):
            restrict_open(hull(*ray), [fan.top])

    def test_corestrict_to_non_closed(self, ray):
        """Test that corestricting to a set missing stars is rejected."""
        fan, _ = ray
        with pytest.raises(NotClosed):
            corestrict_closed(hull(*ray), [fan.cone("o")])

    def test_open_after_closed_vanishes(self, ray):
        """Test j^* i_* = 0."""
        fan, _ = ray
        T = corestrict_closed(hull(*ray), [fan.top])
        assert restrict_open(extend_closed(T, fan), [fan.cone("o")]).is_zero

    def test_corestrict_after_extend(self, ray):
        """Test i^! i_* = id on summands and entries."""
        fan, _ = ray
        T = corestrict_closed(simple_origin(*ray), [fan.top])
        back = corestrict_closed(extend_closed(T, fan), [fan.top])
        assert back.summands == T.summands
        assert back.entries == T.entries

    def test_open_round_trip(self, quad):
        """Test j^* j_* = id on summands and entries over the faces of a ray."""
        fan, completion = quad
        origin, ray0 = fan.cone("o"), fan.cone("0")
        U = fan.sub([origin, ray0])
        S = InjComplex(U, completion, [Summand(origin, -2, 0), Summand(ray0, 0, 0)], {(0, 1): {(): 1}})
        E = extend_open(S, fan)
        assert E.fan is fan
        back = restrict_open(E, [origin, ray0])
        assert back.summands == S.summands
        assert back.entries == S.entries
        assert is_isomorphic(back, S)

    def test_extension_has_no_costalk_off_open(self, quad):
        """Test that j_* S has zero costalks and zero i^! outside the open piece."""
        fan, completion = quad
        origin, ray0 = fan.cone("o"), fan.cone("0")
        S = InjComplex(fan.sub([origin, ray0]), completion, [Summand(origin, -2, 0), Summand(ray0, 0, 0)], {(0, 1): {(): 1}})
        E = extend_open(S, fan)
        for sigma in (fan.cone("1"), fan.top):
            assert gamma_costalk(E, sigma).is_zero
        assert corestrict_closed(E, [fan.cone("1"), fan.top]).is_zero

    def test_extend_from_non_open(self, ray):
        """Test that j_* needs an open source quasifan."""
        fan, completion = ray
        S = InjComplex(fan.sub([fan.top]), completion, [Summand(fan.top, 0, 0)])
        with pytest.raises(NotOpen):
            extend_open(S, fan)


class TestStalks:
    """Test suite for Γ stalks and costalks."""

    def test_costalks(self, ray):
        """Test costalks of the injective hull."""
        fan, _ = ray
        S = hull(*ray)
        assert gamma_costalk(S, fan.cone("o")) == BigradedDims.from_counts({(-2, 0): 1})
        assert gamma_costalk(S, fan.top) == BigradedDims.from_counts({(0, 0): 1})

    def test_stalk_at_origin(self, ray):
        """Test the stalk at the zero cone sees only its own summand."""
        fan, _ = ray
        assert gamma_stalk(simple_origin(*ray), fan.cone("o")) == BigradedDims.from_counts({(-2, 0): 1})

    def test_stalk_of_simple_at_top(self, ray):
        """Test that the differential cancels the degree-one generator."""
        fan, _ = ray
        assert gamma_stalk(simple_origin(*ray), fan.top) == BigradedDims.from_counts({(-2, 0): 1})

    def test_stalk_unit_is_chain_map(self, ray):
        """Test that the adjunction unit commutes with differentials."""
        fan, _ = ray
        assert is_chain_map(stalk_unit(simple_origin(*ray), fan.top))

    @pytest.mark.parametrize("k", [-2, -1, 1, 3])
    def test_stalks_follow_twist(self, ray, k):
        """Test Γ(σ, S⟨k⟩) = Γ(σ, S)⟨k⟩ at every cone."""
        fan, _ = ray
        S = simple_origin(*ray)
        for sigma in fan:
            assert gamma_stalk(twist(S, k), sigma) == gamma_stalk(S, sigma).shifted(k, -k)
            assert gamma_costalk(twist(S, k), sigma) == gamma_costalk(S, sigma).shifted(k, -k)


class TestHoms:
    """Test suite for bigraded hom spaces."""

    def test_candidates(self, ray):
        """Test the bidegrees where homs can live."""
        S = simple_origin(*ray)
        assert {(2, 2), (2, 0), (0, 0)} <= hom_candidates(S, S)

    def test_endomorphisms(self, ray):
        """Test Hom^0_0 and the degree-one extension class of the simple at the origin."""
        S = simple_origin(*ray)
        dims = hom_spaces(S, S).dims
        assert dims[(0, 0)] == 1
        assert dims[(2, 2)] == 1

    def test_representatives(self, ray):
        """Test that representatives are chain maps, one per dimension."""
        S = simple_origin(*ray)
        homs = hom_spaces(S, S, bidegrees=[(0, 0)], representatives=True)
        assert homs.dims.total == 1
        assert len(homs.representatives[(0, 0)]) == 1
        assert is_chain_map(homs.representatives[(0, 0)][0])

    @pytest.mark.parametrize("ku,kv", [(2, 0), (-2, 0), (1, 1), (0, 2)])
    def test_target_shift(self, ray, ku, kv):
        """Test Hom(S, T[i]{j}) is Hom(S, T) moved by (i, j), in particular Hom(S, T[1])."""
        S, T = simple_origin(*ray), hull(*ray)
        moved = hom_spaces(S, shift_doubled(T, ku, kv)).dims
        assert moved == hom_spaces(S, T).dims.shifted(ku, kv)


class TestMinimalModels:
    """Test suite for minimize and is_isomorphic."""

    def test_minimal_complex_untouched(self, ray):
        """Test that a complex without scalar pivots stays the same size."""
        assert minimize(simple_origin(*ray)).size == 2

    def test_rescaled_differential(self, ray):
        """Test that rescaling the differential gives an isomorphic complex."""
        result = is_isomorphic(simple_origin(*ray), simple_origin(*ray, scale=3))
        assert result
        assert result.witness is not None

    def test_different_multisets(self, ray):
        """Test the multiset shortcut."""
        result = is_isomorphic(simple_origin(*ray), twist(simple_origin(*ray), 2))
        assert not result
        assert "multisets" in result.reason

    def test_sum_commutes(self, ray):
        """Test S ⊕ T ≅ T ⊕ S."""
        S, T = simple_origin(*ray), hull(*ray)
        assert is_isomorphic(direct_sum(S, T), direct_sum(T, S))

    def test_contractible_summand_dropped(self, ray):
        """Test that the cone of an identity cancels completely."""
        S = direct_sum(simple_origin(*ray), mapping_cone(identity_map(hull(*ray))))
        assert minimize(S).size == 2
        assert is_isomorphic(minimize(S), simple_origin(*ray))

    @pytest.mark.parametrize("k", range(-2, 3))
    def test_minimize_keeps_homs(self, ray, k):
        """Test that homs both ways against twisted costandards and hulls survive minimization."""
        fan, completion = ray
        S = direct_sum(simple_origin(*ray), mapping_cone(identity_map(hull(*ray))))
        costandard_top = InjComplex(fan, completion, [Summand(fan.top, 0, 0)])
        for T in (twist(costandard_top, k), twist(hull(*ray), k)):
            assert hom_spaces(minimize(S), T).dims == hom_spaces(S, T).dims
            assert hom_spaces(T, minimize(S)).dims == hom_spaces(T, S).dims


class TestPerversity:
    """Test suite for the perverse t-structure."""

    def test_simple_is_perverse(self, ray):
        """Test that the simple at the origin is perverse."""
        assert perversity_check(simple_origin(*ray)).perverse

    def test_shifted_injective_not_perverse(self, ray):
        """Test that J_top placed one step too low fails the costalk condition."""
        fan, completion = ray
        S = InjComplex(fan, completion, [Summand(fan.top, -2, 0)])
        verdict = perversity_check(S)
        assert verdict.in_le0
        assert not verdict.in_ge0
        assert verdict.failures == ["costalk at 0 below the wall"]

    def test_point_truncation(self, ray):
        """Test that a split complex over one cone splits across the wall."""
        fan, completion = ray
        point = fan.sub([fan.top])
        S = InjComplex(point, completion, [Summand(fan.top, 0, 0), Summand(fan.top, 2, 0)])
        trunc = t_truncate_point(S)
        assert trunc.lower.size == 1
        assert trunc.upper.size == 1
        assert is_chain_map(trunc.inclusion)
        assert is_chain_map(trunc.projection)

    def test_point_truncation_needs_one_cone(self, ray):
        """Test that truncation over several cones is rejected."""
        with pytest.raises(ComplexError):
            t_truncate_point(hull(*ray))
