"""
Perverse objects: costandard, standard, simple and injective hulls.

Every object lives over the full quasifan it is built on. Simple objects are
grown from a costandard by extending across the star of their cone one cone
at a time; injective hulls are grown from a costandard by killing Ext^1
classes from costandards on the faces, in decreasing dimension.
"""

import logging
from collections.abc import Sequence

import numpy as np

from config import DEFAULT_SIMPLE_VARIANT, SIMPLE_VARIANTS
from dcat import (
    ChainMap,
    InjComplex,
    compose_maps,
    direct_sum,
    extend_open,
    gamma_stalk,
    hom_spaces,
    mapping_cone,
    minimize,
    relabel,
    shift_doubled,
    stalk_restrict,
    stalk_unit,
    t_truncate_point,
    twist,
    validate,
)
from exactlin import solve_mod2
from exceptions import ConstructionError, DSquaredNonzero, InconsistentDifferential, NonterminatingTwistRange
from exterior import monomials, wedge_table
from fan import Completion, Cone, QuasiFan
from models import BigradedDims, ConstructionTrace, Summand
from settings import settings

logger = logging.getLogger(__name__)


# ============================================================================
# COSTANDARD AND STANDARD OBJECTS
# ============================================================================


def costandard(fan: QuasiFan, completion: Completion, tau: Cone, k: int = 0) -> InjComplex:
    """N_τ⟨k⟩: the injective J_τ placed at (-codim τ/2, -codim τ/2), twisted by k."""
    c = tau.codim
    base = InjComplex(fan, completion, [Summand(tau, -c, -c)])
    return twist(base, k) if k else base


def _incidence_signs(fan: QuasiFan, tau: Cone) -> dict[tuple[Cone, Cone], int]:
    """
    Signs on the covering relations of star(τ) making every diamond anticommute.

    Solved over GF(2): for each length-two interval the four edge bits sum to one.
    """
    star = set(fan.star(tau))
    edges = [(rho, sigma) for rho in fan.cones if rho in star for sigma in fan.covers(rho) if sigma in star]
    index = {edge: k for k, edge in enumerate(edges)}
    diamonds = [d for d in fan.diamonds() if d[0] in star]
    rows = []
    for rho, a, b, sigma in diamonds:
        row = [0] * len(edges)
        for edge in ((rho, a), (a, sigma), (rho, b), (b, sigma)):
            row[index[edge]] = 1
        rows.append(row)
    if not rows:
        return {edge: 1 for edge in edges}
    bits = solve_mod2(rows, [1] * len(rows))
    if bits is None:
        raise InconsistentDifferential(f"no incidence signs on the star of {fan.label(tau)}")
    return {edge: -1 if bit else 1 for edge, bit in zip(edges, bits, strict=True)}


def standard(fan: QuasiFan, completion: Completion, tau: Cone) -> InjComplex:
    """
    M_τ as an explicit minimal complex.

    For every ρ ⪰ τ and monomial m of Λ(Φ^τ_ρ) there is one J_ρ at
    (codim τ/2 - codim ρ, |m| - codim τ/2). The entry from (ρ, m) to (ρ', m')
    for a cover ρ' of ρ sends b ∈ Λ(Φ^ρ_ρ') to the coefficient of m' in b ∧ m.

    Raises:
        InconsistentDifferential: if the differential does not square to zero
            or the stalk is nonzero away from τ
    """
    c = tau.codim
    star = fan.star(tau)
    signs = _incidence_signs(fan, tau)
    summands: list[Summand] = []
    position: dict[tuple[Cone, tuple[int, ...]], int] = {}
    for rho in star:
        width = rho.dim - tau.dim
        for m in monomials(width):
            position[(rho, m)] = len(summands)
            summands.append(Summand(rho, c - 2 * rho.codim, 2 * len(m) - c))

    entries: dict[tuple[int, int], dict] = {}
    for rho in star:
        inner = completion.relative(tau, rho)
        for cover in fan.covers(rho):
            outer = completion.relative(rho, cover)
            table = wedge_table(outer, inner)
            sign = signs[(rho, cover)]
            for m in monomials(inner.dim):
                for m_prime in monomials(cover.dim - tau.dim):
                    entry = {}
                    for b in monomials(outer.dim):
                        coefficient = table[(b, m)].get(m_prime)
                        if coefficient:
                            entry[b] = sign * coefficient
                    if entry:
                        entries[(position[(rho, m)], position[(cover, m_prime)])] = entry

    try:
        result = InjComplex(fan, completion, summands, entries)
    except DSquaredNonzero as exc:
        raise InconsistentDifferential(f"standard object on {fan.label(tau)}: {exc}") from exc
    for rho in star:
        if rho != tau and not gamma_stalk(result, rho).is_zero:
            raise InconsistentDifferential(f"standard object on {fan.label(tau)} has a stalk at {fan.label(rho)}")
    logger.debug("standard object on %s has %d summands", fan.label(tau), result.size)
    return result


# ============================================================================
# LINEAR EXTENSIONS
# ============================================================================


def default_order(fan: QuasiFan, tau: Cone) -> list[Cone]:
    """Cones of star(τ) other than τ by (dimension, rays)."""
    return sorted((rho for rho in fan.star(tau) if rho != tau), key=lambda c: c.sort_key)


def default_hull_order(fan: QuasiFan, tau: Cone) -> list[Cone]:
    """Proper faces of τ by decreasing dimension, then rays."""
    faces = [rho for rho in fan.faces_of(tau) if rho != tau]
    return sorted(faces, key=lambda c: (-c.dim, c.generators))


def linear_extensions(cones: Sequence[Cone], count: int, seed: int = 0, descending: bool = False) -> list[list[Cone]]:
    """
    Random linear extensions of the face order on a set of cones.

    Args:
        cones: The cones to order
        count: Number of orders to draw
        seed: Seed of the numpy generator
        descending: Order larger cones first (for injective hulls)

    Returns:
        List of orders, each a permutation of ``cones`` compatible with the face order
    """
    rng = np.random.default_rng(seed)
    pool = sorted(cones, key=lambda c: c.sort_key)
    orders = []
    for _ in range(count):
        remaining = list(pool)
        order: list[Cone] = []
        while remaining:
            if descending:
                ready = [c for c in remaining if not any(c != d and c.is_face_of(d) for d in remaining)]
            else:
                ready = [c for c in remaining if not any(c != d and d.is_face_of(c) for d in remaining)]
            pick = ready[int(rng.integers(len(ready)))]
            order.append(pick)
            remaining.remove(pick)
        orders.append(order)
    return orders


def _check_order(fan: QuasiFan, order: Sequence[Cone], expected: Sequence[Cone], descending: bool) -> list[Cone]:
    order = list(order)
    if sorted(order, key=lambda c: c.sort_key) != sorted(expected, key=lambda c: c.sort_key):
        raise ConstructionError("cone order does not list exactly the cones to process")
    for k, rho in enumerate(order):
        for later in order[k + 1 :]:
            misplaced = rho.is_face_of(later) if descending else later.is_face_of(rho)
            if misplaced and later != rho:
                raise ConstructionError(f"cone {fan.label(later)} must come before {fan.label(rho)}")
    return order


# ============================================================================
# SIMPLE OBJECTS
# ============================================================================


def _keeps(variant: str, ku: int, kv: int) -> bool:
    if variant == "tau":
        return ku + kv <= 0
    return kv == ku - 2


def _evaluation_map(L: InjComplex, N: InjComplex, kept: BigradedDims) -> ChainMap | None:
    """L -> ⊕ N[U]{V}, one copy per representative class of each kept bidegree."""
    homs = hom_spaces(L, N, bidegrees=[key for key, _ in kept], representatives=True)
    targets: list[InjComplex] = []
    entries: dict[tuple[int, int], dict] = {}
    for key, maps in sorted(homs.representatives.items()):
        for f in maps:
            offset = sum(t.size for t in targets)
            targets.append(f.target)
            for (s, t), entry in f.entries.items():
                entries[(s, t + offset)] = entry
    if not targets:
        return None
    return ChainMap(L, direct_sum(*targets), entries, check=False)


def _truncation_map(L: InjComplex, rho: Cone) -> ChainMap | None:
    """L -> i_ρ* τ_{≥0} i_ρ^* L, the unit followed by the truncation projection."""
    unit = stalk_unit(L, rho)
    point = stalk_restrict(L, rho)
    cut = t_truncate_point(shift_doubled(point, -2, 0))
    if cut.upper.is_zero:
        return None
    upper = relabel(shift_doubled(cut.upper, 2, 0), L.fan)
    projection = ChainMap(unit.target, upper, cut.projection.entries, check=False)
    return compose_maps(projection, unit)


def simple(
    fan: QuasiFan,
    completion: Completion,
    tau: Cone,
    variant: str = DEFAULT_SIMPLE_VARIANT,
    order: Sequence[Cone] | None = None,
) -> tuple[InjComplex, ConstructionTrace]:
    """
    L_τ = j_!* of the costandard on τ, by extension across star(τ) one cone at a time.

    Args:
        fan: Quasifan containing star(τ)
        completion: Completion on the fan
        tau: The cone
        variant: ``tau`` (weight), ``tau_prime`` (degree) or ``middle_extension``
        order: Linear extension of star(τ) minus τ (default: by dimension, then rays)

    Returns:
        (minimal complex, construction trace)
    """
    if variant not in SIMPLE_VARIANTS:
        raise ConstructionError(f"unknown simple variant {variant!r}")
    expected = default_order(fan, tau)
    cones = _check_order(fan, order, expected, descending=False) if order is not None else expected
    trace = ConstructionTrace(kind=f"simple:{variant}")
    L = costandard(fan, completion, tau)
    trace.record(fan.label(tau), BigradedDims(), L.size)

    for rho in cones:
        if variant == "middle_extension":
            ev = _truncation_map(L, rho)
            kept = gamma_stalk(L, rho).restricted(lambda u, v, w=-2 * rho.codim: u + v >= w)
        else:
            N = costandard(fan, completion, rho)
            candidates = hom_spaces(L, N).dims
            kept = candidates.restricted(lambda u, v: _keeps(variant, u, v))
            ev = _evaluation_map(L, N, kept) if not kept.is_zero else None
        if ev is not None:
            L = minimize(shift_doubled(mapping_cone(ev), -2, 0))
        trace.record(fan.label(rho), kept, L.size)
        logger.debug("simple %s: step %s kept %d classes, %d summands", fan.label(tau), fan.label(rho), kept.total, L.size)

    validate(L)
    logger.info("built simple object on %s (%s) with %d summands", fan.label(tau), variant, L.size)
    return L, trace


# ============================================================================
# INJECTIVE HULLS
# ============================================================================


def injective_hull(
    fan: QuasiFan,
    completion: Completion,
    tau: Cone,
    order: Sequence[Cone] | None = None,
    twist_range_factor: int | None = None,
) -> tuple[InjComplex, ConstructionTrace]:
    """
    I_τ: the costandard on τ with every Ext^1 from costandards on faces of τ killed.

    Each step collects the classes of Hom^i_j(N_ρ, I) with i + j = 1 and
    replaces I by the cone of the evaluation map from the matching shifted
    costandards. The construction runs over the open sub-quasifan of faces
    of τ and the result is extended to the whole fan by j_*.

    A class with doubled twist |v| above 2 * twist_range_factor * (n + size
    of I) stops the construction; the factor defaults to
    ``settings.twist_range_factor``.

    Raises:
        NonterminatingTwistRange: if a class appears beyond the twist bound
    """
    expected = default_hull_order(fan, tau)
    cones = _check_order(fan, order, expected, descending=True) if order is not None else expected
    trace = ConstructionTrace(kind="injective")
    local = fan.sub(fan.faces_of(tau))
    I = costandard(local, completion, tau)
    trace.record(fan.label(tau), BigradedDims(), I.size)
    trace.costandard_layers.append((fan.label(tau), 0, 1))
    n = fan.ambient_dim
    factor = settings.twist_range_factor if twist_range_factor is None else twist_range_factor

    for rho in cones:
        N = costandard(local, completion, rho)
        homs = hom_spaces(N, I, representatives=True)
        kept = homs.dims.restricted(lambda u, v: u + v == 2)
        bound = 2 * factor * (n + I.size)
        sources: list[InjComplex] = []
        entries: dict[tuple[int, int], dict] = {}
        for (ku, kv), dim in kept:
            if abs(kv) > bound:
                raise NonterminatingTwistRange(f"Ext^1 class from {fan.label(rho)} at twist {kv} beyond bound {bound}")
            for f in homs.representatives[(ku, kv)]:
                sources.append(shift_doubled(N, -ku, -kv))
                row = len(sources) - 1
                for (_, t), entry in f.entries.items():
                    entries[(row, t)] = entry
            trace.costandard_layers.append((fan.label(rho), kv, dim))
        if sources:
            ev = ChainMap(direct_sum(*sources), I, entries, check=False)
            I = minimize(mapping_cone(ev))
        trace.record(fan.label(rho), kept, I.size)
        logger.debug("injective hull %s: step %s killed %d classes", fan.label(tau), fan.label(rho), kept.total)

    I = extend_open(I, fan)
    validate(I)
    logger.info("built injective hull of %s with %d summands", fan.label(tau), I.size)
    return I, trace


def costandard_multiset(trace: ConstructionTrace) -> dict[tuple[str, int], int]:
    """Costandard subquotients (cone label, twist) -> multiplicity, read from a hull trace."""
    counts: dict[tuple[str, int], int] = {}
    for label, k, dim in trace.costandard_layers:
        counts[(label, k)] = counts.get((label, k), 0) + dim
    return counts
