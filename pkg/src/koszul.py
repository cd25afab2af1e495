"""
The Koszul duality functor κ between a full-dimensional cone and its dual.

κ sends the summand J_τ at doubled (u, v) to J_τ⊥ at (-u - n, v - 2 dim τ + n)
and reverses every entry. An entry of exterior degree p on Φ^τ_ρ becomes an
entry of degree D - p on Ψ = (Φ∨)^ρ⊥_τ⊥, D = dim ρ - dim τ: the dual element
is first identified with Λ^p(Ψ) through the perfect pairing Ψ × Φ^τ_ρ -> Q,
then wedged against Λ^(D-p)(Ψ) and read off against the top form of Ψ that
is compatible with the canonical top forms of the dual completion.

A per-entry sign (-1)^(⌊v_t/2⌋ (dim τ_s + dim τ_t)) makes the result square
to zero and the functor strictly contravariant.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from cache import MemoTable
from config import DEFAULT_SIMPLE_VARIANT
from dcat import ChainMap, InjComplex, hom_spaces, is_isomorphic
from exactlin import RationalSubspace, compound_matrix, det, inverse, qmatrix, qzeros
from exceptions import FanMismatch, KoszulFanError, PairingDegenerate
from exterior import DualEntry, clean, monomials, permutation_sign
from fan import Completion, Cone, ConeDuality, QuasiFan, dual_completion, dual_cone
from models import BigradedDims, CheckItem, Summand
from perverse import costandard, injective_hull, simple

logger = logging.getLogger(__name__)

_transport_tables: MemoTable[np.ndarray] = MemoTable("kappa_transport")


# ============================================================================
# DUALITY CONTEXT
# ============================================================================


def _pairing(psi: RationalSubspace, phi: RationalSubspace) -> np.ndarray:
    return qmatrix([[sum((a * b for a, b in zip(p, x, strict=True)), Fraction(0)) for x in phi.basis] for p in psi.basis], cols=phi.dim)


@dataclass
class DualityContext:
    """
    A cone with completion, its dual cone with the dual completion, and the face bijection.

    ``omega_unit`` is the determinant of the pairing between the canonical
    bases of V* and V; it is the scalar relating the two chosen volume forms.
    """

    duality: ConeDuality
    completion: Completion
    dual_completion: Completion
    omega_unit: Fraction = Fraction(1)

    @classmethod
    def build(cls, fan: QuasiFan, completion: Completion) -> DualityContext:
        """
        Raises:
            NotFullDimensional: if the fan has no full-dimensional top cone
            InvalidCompletion: if the dual completion is invalid
        """
        duality = dual_cone(fan)
        primal_completion = completion.restricted(duality.primal.cones)
        dual = dual_completion(primal_completion, duality)
        n = fan.ambient_dim
        full = RationalSubspace.full(n)
        unit = det(_pairing(full, full)) if n else Fraction(1)
        return cls(duality, primal_completion, dual, unit)

    @property
    def ambient_dim(self) -> int:
        return self.duality.primal.ambient_dim

    @property
    def primal(self) -> QuasiFan:
        return self.duality.primal

    @property
    def dual(self) -> QuasiFan:
        return self.duality.dual

    def perp(self, cone: Cone) -> Cone:
        return self.duality.perp(cone)

    def inverse(self) -> DualityContext:
        return DualityContext(self.duality.inverse(), self.dual_completion, self.completion, self.omega_unit)

    def pairing_matrix(self, tau: Cone, rho: Cone) -> np.ndarray:
        """Pairing between (Φ∨)^ρ⊥_τ⊥ (rows) and Φ^τ_ρ (columns)."""
        psi = self.dual_completion.relative(self.perp(rho), self.perp(tau))
        return _pairing(psi, self.completion.relative(tau, rho))


def _transport_matrix(ctx: DualityContext, tau: Cone, rho: Cone, p: int) -> np.ndarray:
    """Matrix taking Λ^p(Φ^τ_ρ)* coefficients to Λ^(D-p)(Ψ)* coefficients."""
    phi = ctx.completion.relative(tau, rho)
    small, big = ctx.dual_completion[ctx.perp(rho)], ctx.dual_completion[ctx.perp(tau)]
    psi = ctx.dual_completion.relative(ctx.perp(rho), ctx.perp(tau))

    def compute() -> np.ndarray:
        D = phi.dim
        if psi.dim != D:
            raise PairingDegenerate(f"pairing between spaces of dimensions {psi.dim} and {D}")
        P = _pairing(psi, phi)
        if D and det(P) == 0:
            raise PairingDegenerate("pairing matrix is singular")
        rows = monomials(D, p)
        cols = monomials(D, D - p)
        compound_inv = inverse(compound_matrix(P, p, rows, rows))
        orientation = det(big.coordinates(psi.basis + small.basis)) if big.dim else Fraction(1)
        position = {m: k for k, m in enumerate(rows)}
        wedge = qzeros(len(rows), len(cols))
        for k, y in enumerate(cols):
            complement = tuple(i for i in range(D) if i not in y)
            wedge[position[complement], k] = Fraction(permutation_sign(complement + y)) * orientation
        return compound_inv.dot(wedge)

    return _transport_tables.get((phi, psi, small, big, p), compute)


def transport_entry(ctx: DualityContext, tau: Cone, rho: Cone, entry: DualEntry) -> DualEntry:
    """Image of a homogeneous dual element on Φ^τ_ρ as a dual element on (Φ∨)^ρ⊥_τ⊥."""
    if not entry:
        return {}
    degrees = {len(m) for m in entry}
    if len(degrees) != 1:
        raise PairingDegenerate("entry is not homogeneous")
    p = degrees.pop()
    D = rho.dim - tau.dim
    matrix = _transport_matrix(ctx, tau, rho, p)
    rows = monomials(D, p)
    cols = monomials(D, D - p)
    vector = [Fraction(entry.get(m, 0)) for m in rows]
    out = {}
    for k, y in enumerate(cols):
        value = sum((vector[r] * matrix[r, k] for r in range(len(rows))), Fraction(0))
        if value:
            out[y] = value
    return clean(out)


def _gauge(source: Summand, target: Summand) -> int:
    exponent = (target.v // 2) * (source.cone.dim + target.cone.dim)
    return -1 if exponent % 2 else 1


def _dual_summand(ctx: DualityContext, s: Summand) -> Summand:
    n = ctx.ambient_dim
    return Summand(ctx.perp(s.cone), -s.u - n, s.v - 2 * s.cone.dim + n)


def _check_primal(ctx: DualityContext, S: InjComplex) -> None:
    outside = [s.cone for s in S.summands if s.cone not in ctx.primal]
    if outside:
        raise FanMismatch(f"{len(outside)} summand(s) lie outside the primal cone")


# ============================================================================
# THE FUNCTOR
# ============================================================================


def kappa(S: InjComplex, ctx: DualityContext) -> InjComplex:
    """
    κ(S) over the dual cone with the dual completion.

    Raises:
        FanMismatch: if S has summands outside the primal cone
        PairingDegenerate: if a pairing between relative pieces is singular
        DSquaredNonzero: if the transported differential does not square to zero.
    """
    _check_primal(ctx, S)
    summands = [_dual_summand(ctx, s) for s in S.summands]
    entries = {}
    for (a, b), entry in S.entries.items():
        source, target = S.summands[a], S.summands[b]
        image = transport_entry(ctx, source.cone, target.cone, entry)
        sign = _gauge(source, target)
        entries[(b, a)] = {m: c * sign for m, c in image.items()}
    return InjComplex(ctx.dual, ctx.dual_completion, summands, entries)


def kappa_map(F: ChainMap, ctx: DualityContext) -> ChainMap:
    """κ(F): κ(target) -> κ(source) for a chain map F."""
    source, target = kappa(F.source, ctx), kappa(F.target, ctx)
    entries = {}
    for (a, b), entry in F.entries.items():
        s, t = F.source.summands[a], F.target.summands[b]
        image = transport_entry(ctx, s.cone, t.cone, entry)
        sign = _gauge(s, t)
        entries[(b, a)] = {m: c * sign for m, c in image.items()}
    return ChainMap(target, source, entries)


def kappa_inverse(T: InjComplex, ctx: DualityContext) -> InjComplex:
    """The quasi-inverse: κ for the dual context; the volume-form unit acts trivially on matrices."""
    return kappa(T, ctx.inverse())


# ============================================================================
# VERIFICATION
# ============================================================================


@dataclass
class DualityReport:
    """Per-face results of the duality, Koszulity and Ext/End comparisons."""

    fan: str
    items: list[CheckItem] = field(default_factory=list)
    koszulity: dict[str, BigradedDims] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)


def guarded_check(check: str, subject: str, fn: Callable[[], tuple[bool, str, dict]]) -> CheckItem:
    """Run one check; a KoszulFanError becomes a failed item instead of ending the run."""
    try:
        passed, detail, data = fn()
    except KoszulFanError as exc:
        logger.warning("%s check on %s raised %s", check, subject, exc)
        return CheckItem(check=check, subject=subject, passed=False, detail=f"{type(exc).__name__}: {exc}")
    return CheckItem(check=check, subject=subject, passed=passed, detail=detail, data=data)


def verify_face(
    ctx: DualityContext,
    tau: Cone,
    variant: str = DEFAULT_SIMPLE_VARIANT,
    twist_range_factor: int | None = None,
) -> list[CheckItem]:
    """κ(N_τ) ≅ N_τ⊥, κ(L_τ) ≅ I_τ⊥ and κ(I_τ) ≅ L_τ⊥ for one face, each side built by its own algorithm."""
    label = ctx.primal.label(tau)
    perp = ctx.perp(tau)

    def costandard_side():
        N = costandard(ctx.primal, ctx.completion, tau)
        result = is_isomorphic(kappa(N, ctx), costandard(ctx.dual, ctx.dual_completion, perp))
        return result.isomorphic, result.reason, {}

    def simple_side():
        L, _ = simple(ctx.primal, ctx.completion, tau, variant)
        I, _ = injective_hull(ctx.dual, ctx.dual_completion, perp, twist_range_factor=twist_range_factor)
        result = is_isomorphic(kappa(L, ctx), I)
        return result.isomorphic, result.reason, {"summands": I.size}

    def hull_side():
        I, _ = injective_hull(ctx.primal, ctx.completion, tau, twist_range_factor=twist_range_factor)
        L, _ = simple(ctx.dual, ctx.dual_completion, perp, variant)
        result = is_isomorphic(kappa(I, ctx), L)
        return result.isomorphic, result.reason, {"summands": L.size}

    return [
        guarded_check("duality", f"kappa(N_{label}) ~ N_perp", costandard_side),
        guarded_check("duality", f"kappa(L_{label}) ~ I_perp", simple_side),
        guarded_check("duality", f"kappa(I_{label}) ~ L_perp", hull_side),
    ]


def koszulity_table(fan: QuasiFan, completion: Completion, variant: str = DEFAULT_SIMPLE_VARIANT) -> dict[tuple[str, str], BigradedDims]:
    """dim Hom^i_j(L_τ, L_ρ) for every ordered pair of cones."""
    simples = {tau: simple(fan, completion, tau, variant)[0] for tau in fan}
    return {
        (fan.label(tau), fan.label(rho)): hom_spaces(simples[tau], simples[rho]).dims
        for tau in fan
        for rho in fan
    }


def verify_duality(
    fan: QuasiFan,
    completion: Completion,
    variant: str = DEFAULT_SIMPLE_VARIANT,
    jobs: int = 1,
    twist_range_factor: int | None = None,
) -> DualityReport:
    """
    Run the duality, Koszulity and Ext/End checks for every face of a cone.

    Failures are recorded per item; the run never aborts on a single face.

    Raises:
        NotFullDimensional: if the fan has no full-dimensional top cone
    """
    ctx = DualityContext.build(fan, completion)
    report = DualityReport(fan=fan.name)
    faces = list(ctx.primal.cones)
    count = len(faces)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for items in pool.map(verify_face, [ctx] * count, faces, [variant] * count, [twist_range_factor] * count):
                report.items.extend(items)
    else:
        for tau in faces:
            report.items.extend(verify_face(ctx, tau, variant, twist_range_factor))

    try:
        table = koszulity_table(ctx.primal, ctx.completion, variant)
    except KoszulFanError as exc:
        logger.warning("Koszulity table on %r raised %s", fan.name, exc)
        report.items.append(CheckItem(check="koszulity", subject=fan.name, passed=False, detail=f"{type(exc).__name__}: {exc}"))
        return report

    hulls: dict[Cone, InjComplex] = {}

    def hull(rho: Cone) -> InjComplex:
        if rho not in hulls:
            hulls[rho] = injective_hull(ctx.dual, ctx.dual_completion, rho, twist_range_factor=twist_range_factor)[0]
        return hulls[rho]

    for tau in faces:
        for rho in faces:
            key = (ctx.primal.label(tau), ctx.primal.label(rho))
            dims = table[key]
            report.koszulity["->".join(key)] = dims
            report.items.append(
                CheckItem(
                    check="koszulity",
                    subject=f"Hom(L_{key[0]}, L_{key[1]})",
                    passed=dims.is_diagonal,
                    data={"dims": dims.to_rows()},
                )
            )

            def compare(tau=tau, rho=rho, dims=dims):
                expected = BigradedDims.from_counts({(u, -v): d for (u, v), d in dims if u == v})
                homs = hom_spaces(hull(ctx.perp(rho)), hull(ctx.perp(tau))).dims
                found = homs.restricted(lambda u, v: u == -v)
                return found == expected, "", {"ext": expected.to_rows(), "end": found.to_rows()}

            report.items.append(guarded_check("ext_end", f"Ext(L_{key[0]}, L_{key[1]}) vs End of injectives", compare))

    logger.info("duality report for %r: %d/%d items passed", fan.name, sum(i.passed for i in report.items), len(report.items))
    return report
