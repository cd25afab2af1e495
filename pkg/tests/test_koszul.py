"""
Tests for the Koszul duality functor and the duality, Koszulity and Ext/End checks.
"""

from fractions import Fraction

import pytest

from dcat import compose_maps, hom_spaces, identity_map, is_chain_map, is_isomorphic, shift, twist
from exceptions import FanMismatch, NotFullDimensional, PairingDegenerate
from fan import face_lattice, orthogonal_completion
from fan_io import load_complex
from koszul import DualityContext, kappa, kappa_inverse, kappa_map, koszulity_table, transport_entry, verify_duality, verify_face
from perverse import costandard, injective_hull, simple, standard


class TestContext:
    """Test suite for DualityContext."""

    def test_ray(self, ray):
        """Test the face bijection and the volume unit on the ray."""
        ctx = DualityContext.build(*ray)
        assert ctx.omega_unit == Fraction(1)
        assert ctx.perp(ray[0].cone("o")).dim == 1
        assert ctx.dual.f_vector() == [1, 1]

    def test_inverse_swaps_sides(self, quad):
        """Test that the inverse context exchanges primal and dual."""
        ctx = DualityContext.build(*quad)
        back = ctx.inverse()
        assert back.primal == ctx.dual
        assert back.dual_completion == ctx.completion

    def test_needs_full_dimension(self):
        """Test that a lower-dimensional cone has no duality context."""
        fan = face_lattice([(1, 0)], 2)
        with pytest.raises(NotFullDimensional):
            DualityContext.build(fan, orthogonal_completion(fan))


class TestKappa:
    """Test suite for κ on objects and maps."""

    def test_costandards_swap(self, square):
        """Test κ(N_τ) = N_τ⊥ on the nose for every face of the square cone."""
        fan, completion = square
        ctx = DualityContext.build(fan, completion)
        for tau in fan:
            image = kappa(costandard(fan, completion, tau), ctx)
            assert image.summands == costandard(ctx.dual, ctx.dual_completion, ctx.perp(tau)).summands

    def test_simple_origin_to_hull(self, ray, golden_dir):
        """Test that κ(L_o) on the ray is the injective hull of the dual top."""
        fan, completion = ray
        ctx = DualityContext.build(fan, completion)
        L, _ = simple(fan, completion, fan.cone("o"))
        image = kappa(L, ctx)
        assert sorted((ctx.dual.label(s.cone), s.u, s.v) for s in image.summands) == [("0", 0, 0), ("o", -2, 0)]
        expected = load_complex(golden_dir / "table1" / "injective_top.json", ctx.dual, ctx.dual_completion)
        assert is_isomorphic(image, expected)

    def test_round_trip(self, quad):
        """Test κ^{-1} κ(L) ≅ L."""
        fan, completion = quad
        ctx = DualityContext.build(fan, completion)
        L, _ = simple(fan, completion, fan.cone("o"))
        back = kappa_inverse(kappa(L, ctx), ctx)
        assert sorted((s.u, s.v) for s in back.summands) == sorted((s.u, s.v) for s in L.summands)
        assert is_isomorphic(back, L)

    def test_identity_goes_to_identity(self, quad):
        """Test that κ sends the identity to the identity."""
        fan, completion = quad
        ctx = DualityContext.build(fan, completion)
        I, _ = injective_hull(fan, completion, fan.top)
        image = kappa_map(identity_map(I), ctx)
        assert is_chain_map(image)
        assert image.entries == identity_map(kappa(I, ctx)).entries

    def test_foreign_complex(self, ray, quad):
        """Test that κ refuses summands outside the primal cone."""
        ctx = DualityContext.build(*ray)
        fan, completion = quad
        with pytest.raises(FanMismatch):
            kappa(costandard(fan, completion, fan.top), ctx)

    def test_inhomogeneous_entry(self, ray):
        """Test that transport needs a homogeneous entry."""
        fan, completion = ray
        ctx = DualityContext.build(fan, completion)
        with pytest.raises(PairingDegenerate):
            transport_entry(ctx, fan.cone("o"), fan.top, {(): Fraction(1), (0,): Fraction(1)})

    def test_scalar_transport(self, ray):
        """Test that a degree-one entry on a ray becomes a scalar."""
        fan, completion = ray
        ctx = DualityContext.build(fan, completion)
        image = transport_entry(ctx, fan.cone("o"), fan.top, {(0,): Fraction(2)})
        assert list(image) == [()]
        assert image[()] != 0

    def test_composites(self, quad):
        """Test κ(g ∘ f) = κ(f) ∘ κ(g) for M_τ -> N_τ -> I_τ on a ray of the quadrant."""
        fan, completion = quad
        ctx = DualityContext.build(fan, completion)
        tau = fan.cone("0")
        M = standard(fan, completion, tau)
        N = costandard(fan, completion, tau)
        I, _ = injective_hull(fan, completion, tau)
        f = hom_spaces(M, N, bidegrees=[(0, 0)], representatives=True).representatives[(0, 0)][0]
        g = hom_spaces(N, I, bidegrees=[(0, 0)], representatives=True).representatives[(0, 0)][0]
        composite = compose_maps(g, f)
        assert not composite.is_zero
        image = kappa_map(composite, ctx)
        assert is_chain_map(image)
        assert image.entries == compose_maps(kappa_map(f, ctx), kappa_map(g, ctx)).entries

    @pytest.mark.parametrize("k", [-1, 1, 2])
    @pytest.mark.parametrize("fixture", ["ray", "quad"])
    def test_twist_becomes_shift(self, fixture, k, request):
        """Test κ(S⟨k⟩) ≅ κ(S)[-k]⟨k⟩."""
        fan, completion = request.getfixturevalue(fixture)
        ctx = DualityContext.build(fan, completion)
        L, _ = simple(fan, completion, fan.cone("o"))
        assert is_isomorphic(kappa(twist(L, k), ctx), twist(shift(kappa(L, ctx), -k, 0), k))


class TestVerification:
    """Test suite for the per-face and whole-cone checks."""

    def test_verify_face(self, ray):
        """Test the three duality items for each face of the ray."""
        fan, completion = ray
        ctx = DualityContext.build(fan, completion)
        for tau in fan:
            items = verify_face(ctx, tau)
            assert len(items) == 3
            assert all(item.passed for item in items), [item.detail for item in items]

    def test_koszulity_is_diagonal(self, quad):
        """Test that homs between simples live on the diagonal."""
        fan, completion = quad
        table = koszulity_table(fan, completion)
        assert len(table) == 16
        assert all(dims.is_diagonal for dims in table.values())

    def test_self_ext_of_origin(self, ray):
        """Test Hom(L_o, L_o) on the ray: the identity and one degree-one class."""
        fan, completion = ray
        table = koszulity_table(fan, completion)
        assert table[("o", "o")].to_rows() == [[0, 0, 1], [2, 2, 1]]

    @pytest.mark.parametrize("fixture", ["ray", "quad", pytest.param("simplex3", marks=pytest.mark.slow)])
    def test_verify_duality(self, fixture, request):
        """Test that every duality, Koszulity and Ext/End item passes."""
        fan, completion = request.getfixturevalue(fixture)
        report = verify_duality(fan, completion)
        failed = [(item.check, item.subject, item.detail) for item in report.items if not item.passed]
        assert report.passed, failed
        assert {item.check for item in report.items} == {"duality", "koszulity", "ext_end"}
        assert len(report.koszulity) == len(fan) ** 2

    @pytest.mark.slow
    def test_square_duality(self, square):
        """Test the full duality check on the non-simplicial square cone."""
        fan, completion = square
        assert verify_duality(fan, completion).passed

    @pytest.mark.parametrize("fixture", ["ray", "quad", pytest.param("simplex3", marks=pytest.mark.slow)])
    def test_dual_side(self, fixture, request):
        """Test the same checks starting from the dual cone with the dual completion."""
        ctx = DualityContext.build(*request.getfixturevalue(fixture))
        report = verify_duality(ctx.dual, ctx.dual_completion)
        assert report.passed, [(item.check, item.subject, item.detail) for item in report.items if not item.passed]
        for tau in ctx.dual:
            image = kappa(costandard(ctx.dual, ctx.dual_completion, tau), ctx.inverse())
            assert image.summands == costandard(ctx.primal, ctx.completion, ctx.inverse().perp(tau)).summands

    def test_twist_range_passed_through(self, ray):
        """Test that a zero twist range turns the hull of the top cone into a failed item."""
        fan, completion = ray
        ctx = DualityContext.build(fan, completion)
        items = verify_face(ctx, fan.top, twist_range_factor=0)
        assert [item.passed for item in items] == [True, True, False]
        assert "NonterminatingTwistRange" in items[2].detail
        assert all(item.passed for item in verify_face(ctx, fan.top, twist_range_factor=3))
