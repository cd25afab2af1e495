"""
Bounded complexes of injective Φ-stable sheaves on a quasifan.

A complex is a list of summands J_τ placed at doubled bidegrees (u, v) and a
sparse differential: the entry from summand s to summand t is a dual element
of Λ^p(Φ^{τ_s}_{τ_t})* with u_t = u_s + 2 and v_t = v_s + 2p. Everything the
construction algorithms need is built on top: shifts and twists, mapping
cones, the four restriction/extension functors, Γ stalks and costalks,
bigraded hom spaces in the homotopy category, minimal models by Gaussian
elimination, isomorphism tests, perversity tests and the point truncation.

Shift convention: shifting by k in complex degree multiplies the entries
leaving a summand at complex degree a by (-1)^(⌊a⌋ - ⌊a - k⌋). This is the
usual (-1)^k for integral k and composes exactly for half-integral k.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from exactlin import det, inverse, kernel_basis, qmatrix, qzeros, rank, rref
from exceptions import (
    BadEntryDegree,
    ComplexError,
    DSquaredNonzero,
    FanMismatch,
    MissingFaces,
    NotAChainMap,
    NotClosed,
    NotOpen,
    ParityViolation,
)
from exterior import DualEntry, clean, compose_dual, inverse_wedge_table, monomials
from fan import Completion, Cone, QuasiFan
from models import BigradedDims, Summand, format_half
from settings import settings

logger = logging.getLogger(__name__)

EntryMap = dict[tuple[int, int], DualEntry]


# ============================================================================
# COMPLEXES AND CHAIN MAPS
# ============================================================================


def _entry_degree(source: Summand, target: Summand, same_u: bool) -> int:
    """Exterior degree forced by the gradings; raises BadEntryDegree on mismatch."""
    expected_u = source.u if same_u else source.u + 2
    if target.u != expected_u:
        raise BadEntryDegree(f"entry from complex degree {format_half(source.u)} to {format_half(target.u)}")
    if not source.cone.is_face_of(target.cone):
        raise BadEntryDegree(f"entry from {source.cone!r} to {target.cone!r}, which is not a face relation")
    p, odd = divmod(target.v - source.v, 2)
    if odd or not 0 <= p <= target.cone.dim - source.cone.dim:
        raise BadEntryDegree(
            f"grading jump {format_half(target.v - source.v)} is not an exterior degree between "
            f"cones of dimension {source.cone.dim} and {target.cone.dim}"
        )
    return p


def _check_entry(entry: Mapping, p: int, width: int, where: str) -> None:
    for monomial in entry:
        if len(monomial) != p or any(not 0 <= k < width for k in monomial) or list(monomial) != sorted(set(monomial)):
            raise BadEntryDegree(f"{where}: monomial {monomial} is not in Λ^{p} of a {width}-dimensional space")


class InjComplex:
    """
    Complex of injectives J_τ over a quasifan with completion.

    Immutable by convention: every operation returns a new complex.
    """

    def __init__(
        self,
        fan: QuasiFan,
        completion: Completion,
        summands: Sequence[Summand],
        entries: Mapping[tuple[int, int], Mapping] | None = None,
        *,
        check: bool = True,
    ):
        self.fan = fan
        self.completion = completion
        self.summands: tuple[Summand, ...] = tuple(summands)
        cleaned = {}
        for key, entry in (entries or {}).items():
            entry = clean(entry)
            if entry:
                cleaned[(int(key[0]), int(key[1]))] = entry
        self.entries: EntryMap = cleaned
        if check:
            validate(self)

    @classmethod
    def zero(cls, fan: QuasiFan, completion: Completion) -> InjComplex:
        return cls(fan, completion, (), {}, check=False)

    @property
    def size(self) -> int:
        return len(self.summands)

    @property
    def is_zero(self) -> bool:
        return not self.summands

    @cached_property
    def outgoing(self) -> dict[int, list[tuple[int, DualEntry]]]:
        out: dict[int, list[tuple[int, DualEntry]]] = defaultdict(list)
        for (s, t), entry in sorted(self.entries.items()):
            out[s].append((t, entry))
        return out

    @cached_property
    def incoming(self) -> dict[int, list[tuple[int, DualEntry]]]:
        inc: dict[int, list[tuple[int, DualEntry]]] = defaultdict(list)
        for (s, t), entry in sorted(self.entries.items()):
            inc[t].append((s, entry))
        return inc

    def summand_counter(self) -> Counter:
        return Counter((s.cone, s.u, s.v) for s in self.summands)

    def cones(self) -> set[Cone]:
        return {s.cone for s in self.summands}

    def describe(self) -> str:
        parts = [f"{self.fan.label(s.cone)}{s.bidegree}" for s in self.summands]
        return f"InjComplex[{', '.join(parts)}; {len(self.entries)} entries]"

    def __repr__(self) -> str:
        return self.describe()


class ChainMap:
    """Degree-(0,0) map of complexes; entries are dual elements between summands of equal complex degree."""

    def __init__(self, source: InjComplex, target: InjComplex, entries: Mapping[tuple[int, int], Mapping], *, check: bool = True):
        _common_completion(source, target)
        self.source = source
        self.target = target
        cleaned = {}
        for (s, t), entry in entries.items():
            entry = clean(entry)
            if not entry:
                continue
            p = _entry_degree(source.summands[s], target.summands[t], same_u=True)
            width = target.summands[t].cone.dim - source.summands[s].cone.dim
            _check_entry(entry, p, width, "chain map")
            cleaned[(s, t)] = entry
        self.entries: EntryMap = cleaned
        if check and not is_chain_map(self):
            raise NotAChainMap(f"map {source.describe()} -> {target.describe()} does not commute with differentials")

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def scalar(self, s: int, t: int) -> Fraction:
        return self.entries.get((s, t), {}).get((), Fraction(0))


def _common_completion(first: InjComplex, second: InjComplex) -> None:
    if first.fan.ambient_dim != second.fan.ambient_dim:
        raise FanMismatch("complexes live in different ambient dimensions")
    if first.completion is not second.completion and first.completion != second.completion:
        raise FanMismatch("complexes carry different completions")


def _common_fan(first: QuasiFan, second: QuasiFan) -> QuasiFan:
    if first == second or all(c in first for c in second):
        return first
    if all(c in second for c in first):
        return second
    raise FanMismatch(f"fans {first.name!r} and {second.name!r} are not nested")


def _compose(completion: Completion, first: Cone, middle: Cone, last: Cone, outer: Mapping, inner: Mapping) -> DualEntry:
    """Composite of inner: J_first -> J_middle and outer: J_middle -> J_last."""
    return compose_dual(outer, inner, completion.relative(middle, last), completion.relative(first, middle))


def _accumulate(total: dict, key, entry: Mapping, factor=1) -> None:
    bucket = total.setdefault(key, defaultdict(Fraction))
    for m, c in entry.items():
        bucket[m] += c * factor


@dataclass(frozen=True)
class ValidityCertificate:
    """Evidence that a complex is well typed and squares to zero."""

    summands: int
    entries: int
    compositions_checked: int


def validate(S: InjComplex) -> ValidityCertificate:
    """
    Check summand cones, entry typing and gradings, and d ∘ d = 0.

    Raises:
        FanMismatch: a summand cone is not in the quasifan
        BadEntryDegree: an entry disagrees with the bidegrees it connects
        DSquaredNonzero: some length-two composite does not cancel
    """
    for s in S.summands:
        if s.cone not in S.fan:
            raise FanMismatch(f"summand cone {s.cone!r} is not in fan {S.fan.name!r}")
    for (a, b), entry in S.entries.items():
        if not (0 <= a < S.size and 0 <= b < S.size):
            raise ComplexError(f"entry ({a}, {b}) refers to a missing summand")
        source, target = S.summands[a], S.summands[b]
        p = _entry_degree(source, target, same_u=False)
        _check_entry(entry, p, target.cone.dim - source.cone.dim, f"entry {a}->{b}")

    squares: dict = {}
    checked = 0
    for s, out in S.outgoing.items():
        for t, first in out:
            for x, second in S.outgoing.get(t, []):
                cones = S.summands[s].cone, S.summands[t].cone, S.summands[x].cone
                _accumulate(squares, (s, x), _compose(S.completion, *cones, second, first))
                checked += 1
    for (s, x), total in sorted(squares.items()):
        if any(total.values()):
            raise DSquaredNonzero(
                f"d∘d is nonzero from {S.fan.label(S.summands[s].cone)}{S.summands[s].bidegree} "
                f"to {S.fan.label(S.summands[x].cone)}{S.summands[x].bidegree}"
            )
    return ValidityCertificate(S.size, len(S.entries), checked)


def is_chain_map(f: ChainMap) -> bool:
    """Check d_T ∘ f = f ∘ d_S."""
    S, T = f.source, f.target
    by_source: dict[int, list[tuple[int, DualEntry]]] = defaultdict(list)
    by_target: dict[int, list[tuple[int, DualEntry]]] = defaultdict(list)
    for (s, t), entry in f.entries.items():
        by_source[s].append((t, entry))
        by_target[t].append((s, entry))

    defect: dict = {}
    for s, maps in by_source.items():
        for t, entry in maps:
            for x, d in T.outgoing.get(t, []):
                cones = S.summands[s].cone, T.summands[t].cone, T.summands[x].cone
                _accumulate(defect, (s, x), _compose(S.completion, *cones, d, entry))
    for x, maps in by_target.items():
        for s_prime, entry in maps:
            for s, d in S.incoming.get(s_prime, []):
                cones = S.summands[s].cone, S.summands[s_prime].cone, T.summands[x].cone
                _accumulate(defect, (s, x), _compose(S.completion, *cones, entry, d), factor=-1)
    return not any(any(total.values()) for total in defect.values())


# ============================================================================
# SHIFTS, SUMS, CONES
# ============================================================================


def shift_sign(u: int, ku: int) -> int:
    """Sign picked up by entries leaving a summand at doubled degree u under a doubled shift ku."""
    return -1 if (u // 2 - (u - ku) // 2) % 2 else 1


def shift_doubled(S: InjComplex, ku: int, kv: int) -> InjComplex:
    """
    Shift by [ku/2]{kv/2}: a summand at (u, v) moves to (u - ku, v - kv).

    Raises:
        ParityViolation: if ku and kv have different parity
    """
    if (ku - kv) % 2:
        raise ParityViolation(f"shift ({format_half(ku)}, {format_half(kv)}) leaves the lattice")
    summands = [s.shifted(ku, kv) for s in S.summands]
    entries = {}
    for (a, b), entry in S.entries.items():
        sign = shift_sign(S.summands[a].u, ku)
        entries[(a, b)] = {m: c * sign for m, c in entry.items()}
    return InjComplex(S.fan, S.completion, summands, entries, check=False)


def shift(S: InjComplex, i=0, j=0) -> InjComplex:
    """S[i]{j} for half-integers i, j."""
    ku, kv = Fraction(i) * 2, Fraction(j) * 2
    if ku.denominator != 1 or kv.denominator != 1:
        raise ParityViolation(f"shift ({i}, {j}) is not half-integral")
    return shift_doubled(S, int(ku), int(kv))


def twist(S: InjComplex, k: int) -> InjComplex:
    """S⟨k⟩ = S[k/2]{-k/2}."""
    return shift_doubled(S, k, -k)


def direct_sum(*complexes: InjComplex) -> InjComplex:
    if not complexes:
        raise ComplexError("direct sum of no complexes")
    fan = complexes[0].fan
    for other in complexes[1:]:
        _common_completion(complexes[0], other)
        fan = _common_fan(fan, other.fan)
    summands: list[Summand] = []
    entries: EntryMap = {}
    for S in complexes:
        offset = len(summands)
        summands.extend(S.summands)
        for (a, b), entry in S.entries.items():
            entries[(a + offset, b + offset)] = entry
    return InjComplex(fan, complexes[0].completion, summands, entries, check=False)


def mapping_cone(f: ChainMap) -> InjComplex:
    """
    Cone(f) = T ⊕ S[1], with differential (d_T, -d_S) and f from S[1] to T.

    Raises:
        DSquaredNonzero: if f is not a chain map
    """
    S, T = f.source, f.target
    fan = _common_fan(T.fan, S.fan)
    shifted = shift_doubled(S, 2, 0)
    offset = T.size
    entries: EntryMap = dict(T.entries)
    for (a, b), entry in shifted.entries.items():
        entries[(a + offset, b + offset)] = entry
    for (s, t), entry in f.entries.items():
        entries[(s + offset, t)] = entry
    return InjComplex(fan, T.completion, T.summands + shifted.summands, entries)


def identity_map(S: InjComplex) -> ChainMap:
    return ChainMap(S, S, {(k, k): {(): Fraction(1)} for k in range(S.size)}, check=False)


def zero_map(S: InjComplex, T: InjComplex) -> ChainMap:
    return ChainMap(S, T, {}, check=False)


def compose_maps(g: ChainMap, f: ChainMap) -> ChainMap:
    """g ∘ f for f: A -> B and g: B -> C."""
    if f.target.summands != g.source.summands:
        raise FanMismatch("chain maps are not composable")
    A, B, C = f.source, f.target, g.target
    by_middle: dict[int, list[tuple[int, DualEntry]]] = defaultdict(list)
    for (b, c), entry in g.entries.items():
        by_middle[b].append((c, entry))
    total: dict = {}
    for (a, b), inner in f.entries.items():
        for c, outer in by_middle.get(b, []):
            cones = A.summands[a].cone, B.summands[b].cone, C.summands[c].cone
            _accumulate(total, (a, c), _compose(A.completion, *cones, outer, inner))
    return ChainMap(A, C, total, check=False)


def combine_maps(maps: Sequence[ChainMap], coefficients: Sequence) -> ChainMap:
    """Linear combination of parallel chain maps."""
    if not maps:
        raise ComplexError("empty linear combination")
    total: dict = {}
    for f, c in zip(maps, coefficients, strict=True):
        for key, entry in f.entries.items():
            _accumulate(total, key, entry, factor=Fraction(c))
    return ChainMap(maps[0].source, maps[0].target, total, check=False)


# ============================================================================
# RESTRICTION AND EXTENSION FUNCTORS
# ============================================================================


def _keep(S: InjComplex, keep: set[Cone], fan: QuasiFan) -> InjComplex:
    kept = [k for k, s in enumerate(S.summands) if s.cone in keep]
    position = {k: n for n, k in enumerate(kept)}
    entries = {(position[a], position[b]): e for (a, b), e in S.entries.items() if a in position and b in position}
    return InjComplex(fan, S.completion, [S.summands[k] for k in kept], entries, check=False)


def relabel(S: InjComplex, fan: QuasiFan) -> InjComplex:
    """The same summands and entries viewed over another quasifan containing their cones."""
    missing = [c for c in S.cones() if c not in fan]
    if missing:
        raise FanMismatch(f"{len(missing)} summand cone(s) are missing from fan {fan.name!r}")
    return InjComplex(fan, S.completion, S.summands, S.entries, check=False)


def _cone_set(subset: Iterable[Cone] | QuasiFan) -> set[Cone]:
    return set(subset.cones) if isinstance(subset, QuasiFan) else set(subset)


def restrict_open(S: InjComplex, subset: Iterable[Cone] | QuasiFan) -> InjComplex:
    """
    j^* to an open sub-quasifan: drop summands outside it.

    Raises:
        NotOpen: if the subset is not closed under faces
    """
    cones = _cone_set(subset)
    if not S.fan.is_open(cones):
        raise NotOpen("restriction target is not open")
    return _keep(S, cones, S.fan.sub(cones))


def extend_open(S: InjComplex, fan: QuasiFan) -> InjComplex:
    """j_* from an open sub-quasifan; injectives extend to injectives, so this relabels."""
    if not fan.is_open(S.fan.cones):
        raise NotOpen(f"fan {S.fan.name!r} is not open in {fan.name!r}")
    return relabel(S, fan)


def extend_closed(S: InjComplex, fan: QuasiFan) -> InjComplex:
    """i_* from a closed sub-quasifan; a relabeling."""
    if not fan.is_closed(S.fan.cones):
        raise NotClosed(f"fan {S.fan.name!r} is not closed in {fan.name!r}")
    return relabel(S, fan)


def corestrict_closed(S: InjComplex, subset: Iterable[Cone] | QuasiFan) -> InjComplex:
    """
    i^! to a closed sub-quasifan: keep exactly the summands on it.

    Raises:
        NotClosed: if the subset is not closed under stars
    """
    cones = _cone_set(subset)
    if not S.fan.is_closed(cones):
        raise NotClosed("corestriction target is not closed")
    return _keep(S, cones, S.fan.sub(cones))


@dataclass
class _ScalarComplex:
    """A complex of free modules with scalar differential: basis degrees and a sparse matrix."""

    degrees: list[tuple[int, int]]
    labels: list[tuple[int, tuple[int, ...]]]
    matrix: dict[tuple[int, int], Fraction] = field(default_factory=dict)


def _stalk_complex(S: InjComplex, sigma: Cone) -> _ScalarComplex:
    """Generators of i_σ^* S: one per summand (τ, u, v) with τ ≼ σ and monomial m of Λ(Φ^τ_σ)."""
    completion = S.completion
    index: dict[tuple[int, tuple[int, ...]], int] = {}
    degrees: list[tuple[int, int]] = []
    labels: list[tuple[int, tuple[int, ...]]] = []
    for k, s in enumerate(S.summands):
        if not s.cone.is_face_of(sigma):
            continue
        for m in monomials(sigma.dim - s.cone.dim):
            index[(k, m)] = len(labels)
            labels.append((k, m))
            degrees.append((s.u, s.v + 2 * len(m)))

    matrix: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    for (a, b), entry in S.entries.items():
        source, target = S.summands[a].cone, S.summands[b].cone
        if not (source.is_face_of(sigma) and target.is_face_of(sigma)):
            continue
        rows = inverse_wedge_table(completion.relative(target, sigma), completion.relative(source, target))
        for (outer_m, inner_m), expansion in rows.items():
            value = entry.get(inner_m)
            if not value:
                continue
            for m, c in expansion.items():
                matrix[(index[(a, m)], index[(b, outer_m)])] += c * value
    return _ScalarComplex(degrees, labels, {k: v for k, v in matrix.items() if v})


def _cohomology(cx: _ScalarComplex) -> BigradedDims:
    groups: dict[tuple[int, int], list[int]] = defaultdict(list)
    for k, key in enumerate(cx.degrees):
        groups[key].append(k)
    position = {k: n for members in groups.values() for n, k in enumerate(members)}

    def block_rank(src: tuple[int, int], dst: tuple[int, int]) -> int:
        if src not in groups or dst not in groups:
            return 0
        block = qzeros(len(groups[dst]), len(groups[src]))
        nonzero = False
        for k in groups[src]:
            for l in groups[dst]:
                c = cx.matrix.get((k, l))
                if c:
                    block[position[l], position[k]] = c
                    nonzero = True
        return rank(block) if nonzero else 0

    counts = {}
    for (u, v), members in groups.items():
        counts[(u, v)] = len(members) - block_rank((u, v), (u + 2, v)) - block_rank((u - 2, v), (u, v))
    return BigradedDims.from_counts(counts)


def _require_faces(S: InjComplex, sigma: Cone) -> None:
    if sigma not in S.fan or not S.fan.has_all_faces(sigma):
        raise MissingFaces(f"stalk at {sigma!r} needs the cone and all its faces in fan {S.fan.name!r}")


def stalk_restrict(S: InjComplex, sigma: Cone) -> InjComplex:
    """
    i_σ^* S over the one-cone quasifan {σ}: summands (σ, u, v + 2|m|) with scalar entries.

    Raises:
        MissingFaces: if σ or one of its faces is not in the quasifan
    """
    _require_faces(S, sigma)
    cx = _stalk_complex(S, sigma)
    summands = [Summand(sigma, u, v) for u, v in cx.degrees]
    entries = {key: {(): c} for key, c in cx.matrix.items()}
    point = S.fan.sub([sigma], name=f"{S.fan.name}:{S.fan.label(sigma)}")
    return InjComplex(point, S.completion, summands, entries, check=False)


def stalk_unit(S: InjComplex, sigma: Cone) -> ChainMap:
    """Adjunction unit S -> i_σ* i_σ^* S; the component to generator m is the dual monomial m*."""
    stalk = relabel(stalk_restrict(S, sigma), S.fan)
    cx_labels = _stalk_complex(S, sigma).labels
    entries = {(k, n): {m: Fraction(1)} for n, (k, m) in enumerate(cx_labels)}
    return ChainMap(S, stalk, entries, check=False)


def gamma_stalk(S: InjComplex, sigma: Cone) -> BigradedDims:
    """Bigraded cohomology dimensions of i_σ^* S ⊗ ℝ."""
    _require_faces(S, sigma)
    return _cohomology(_stalk_complex(S, sigma))


def gamma_costalk(S: InjComplex, sigma: Cone) -> BigradedDims:
    """Bigraded cohomology dimensions of the σ-summand subcomplex."""
    if sigma not in S.fan:
        raise MissingFaces(f"costalk at {sigma!r} outside fan {S.fan.name!r}")
    kept = [k for k, s in enumerate(S.summands) if s.cone == sigma]
    position = {k: n for n, k in enumerate(kept)}
    matrix = {
        (position[a], position[b]): e.get((), Fraction(0))
        for (a, b), e in S.entries.items()
        if a in position and b in position
    }
    degrees = [(S.summands[k].u, S.summands[k].v) for k in kept]
    return _cohomology(_ScalarComplex(degrees, [(k, ()) for k in kept], {k: v for k, v in matrix.items() if v}))


# ============================================================================
# HOM SPACES
# ============================================================================


@dataclass
class HomSpaces:
    """Dimensions of Hom^i_j(S, T) by doubled bidegree, with optional representative chain maps S -> T[i]{j}."""

    dims: BigradedDims
    representatives: dict[tuple[int, int], list[ChainMap]] = field(default_factory=dict)


def _hom_basis(S: InjComplex, T: InjComplex, degree: int) -> list[tuple[int, int, tuple[int, ...]]]:
    basis = []
    for a, s in enumerate(S.summands):
        for b, t in enumerate(T.summands):
            if t.u != s.u + 2 * degree or not s.cone.is_face_of(t.cone):
                continue
            p, odd = divmod(t.v - s.v, 2)
            width = t.cone.dim - s.cone.dim
            if odd or not 0 <= p <= width:
                continue
            for m in monomials(width, p):
                basis.append((a, b, m))
    return basis


def _hom_differential(S: InjComplex, T: InjComplex, degree: int, source_basis, target_basis) -> np.ndarray:
    """Matrix of g ↦ d_T ∘ g - (-1)^degree g ∘ d_S."""
    row = {key: n for n, key in enumerate(target_basis)}
    out = qzeros(len(target_basis), len(source_basis))
    sign = -1 if degree % 2 == 0 else 1
    for col, (a, b, m) in enumerate(source_basis):
        g = {m: Fraction(1)}
        s_cone, t_cone = S.summands[a].cone, T.summands[b].cone
        for x, d in T.outgoing.get(b, []):
            for mono, c in _compose(S.completion, s_cone, t_cone, T.summands[x].cone, d, g).items():
                out[row[(a, x, mono)], col] += c
        for y, d in S.incoming.get(a, []):
            for mono, c in _compose(S.completion, S.summands[y].cone, s_cone, t_cone, g, d).items():
                out[row[(y, b, mono)], col] += sign * c
    return out


def _chain_map_from_vector(S: InjComplex, T: InjComplex, basis, vector) -> ChainMap:
    entries: dict = {}
    for (a, b, m), c in zip(basis, vector, strict=True):
        if c:
            entries.setdefault((a, b), {})[m] = Fraction(c)
    return ChainMap(S, T, entries, check=False)


def _degree_zero_homs(S: InjComplex, T: InjComplex, representatives: bool) -> tuple[int, list[ChainMap], np.ndarray, list]:
    c_minus, c_zero, c_plus = (_hom_basis(S, T, k) for k in (-1, 0, 1))
    if not c_zero:
        return 0, [], qzeros(0, 0), c_zero
    d_zero = _hom_differential(S, T, 0, c_zero, c_plus)
    d_minus = _hom_differential(S, T, -1, c_minus, c_zero)
    rank_zero = rank(d_zero) if c_plus else 0
    rank_minus = rank(d_minus) if c_minus else 0
    dim = len(c_zero) - rank_zero - rank_minus
    cocycles = kernel_basis(d_zero) if c_plus else kernel_basis(qzeros(0, len(c_zero)))
    if not representatives or dim == 0:
        return dim, [], cocycles, c_zero

    stacked = qzeros(len(c_zero), len(c_minus) + cocycles.shape[1])
    if c_minus:
        stacked[:, : len(c_minus)] = d_minus
    stacked[:, len(c_minus) :] = cocycles
    _, pivots = rref(stacked)
    chosen = [p - len(c_minus) for p in pivots if p >= len(c_minus)]
    maps = [_chain_map_from_vector(S, T, c_zero, cocycles[:, k]) for k in chosen]
    return dim, maps, cocycles, c_zero


def hom_candidates(S: InjComplex, T: InjComplex) -> set[tuple[int, int]]:
    """Doubled bidegrees (U, V) at which Hom^{U/2}_{V/2}(S, T) can be nonzero."""
    out = set()
    for s in S.summands:
        for t in T.summands:
            if s.cone.is_face_of(t.cone):
                for p in range(t.cone.dim - s.cone.dim + 1):
                    out.add((t.u - s.u, t.v - s.v - 2 * p))
    return out


def hom_spaces(
    S: InjComplex,
    T: InjComplex,
    bidegrees: Iterable[tuple[int, int]] | None = None,
    representatives: bool = False,
) -> HomSpaces:
    """
    Bigraded homs in the homotopy category: dim Hom(S, T[i]{j}) for doubled (2i, 2j).

    Args:
        S: Source complex
        T: Target complex
        bidegrees: Restrict to these doubled bidegrees (default: every candidate)
        representatives: Also return cocycle chain maps S -> T[i]{j} spanning the classes
    """
    _common_completion(S, T)
    wanted = hom_candidates(S, T)
    if bidegrees is not None:
        wanted &= {tuple(b) for b in bidegrees}
    counts: dict[tuple[int, int], int] = {}
    reps: dict[tuple[int, int], list[ChainMap]] = {}
    for ku, kv in sorted(wanted):
        target = shift_doubled(T, ku, kv)
        dim, maps, _, _ = _degree_zero_homs(S, target, representatives)
        if dim:
            counts[(ku, kv)] = dim
            if representatives:
                reps[(ku, kv)] = maps
    return HomSpaces(BigradedDims.from_counts(counts), reps)


# ============================================================================
# MINIMAL MODELS AND ISOMORPHISM
# ============================================================================


def minimize(S: InjComplex) -> InjComplex:
    """
    Cancel invertible scalar entries by Gaussian elimination.

    For a nonzero scalar λ from s to t (same cone, same grading) every
    composite x -> t, s -> y is corrected by d_sy ∘ λ^{-1} ∘ d_xt and s, t are
    removed. The result has no scalar entry between summands of equal cone and
    grading.
    """
    summands = list(S.summands)
    entries: dict[tuple[int, int], dict] = {k: dict(v) for k, v in S.entries.items()}
    out: dict[int, set[int]] = defaultdict(set)
    inc: dict[int, set[int]] = defaultdict(set)
    for a, b in entries:
        out[a].add(b)
        inc[b].add(a)
    alive = set(range(len(summands)))
    eliminated = 0

    def drop(a: int, b: int) -> None:
        entries.pop((a, b), None)
        out[a].discard(b)
        inc[b].discard(a)

    while True:
        pivot = None
        for s in sorted(alive):
            for t in sorted(out[s]):
                if summands[s].cone == summands[t].cone and summands[s].v == summands[t].v:
                    lam = entries[(s, t)].get((), Fraction(0))
                    if lam:
                        pivot = (s, t, lam)
                        break
            if pivot:
                break
        if pivot is None:
            break
        s, t, lam = pivot
        for x in sorted(inc[t] - {s}):
            inner = entries[(x, t)]
            for y in sorted(out[s] - {t}):
                outer = entries[(s, y)]
                cones = summands[x].cone, summands[s].cone, summands[y].cone
                correction = _compose(S.completion, *cones, outer, inner)
                if not correction:
                    continue
                bucket = entries.setdefault((x, y), {})
                for m, c in correction.items():
                    bucket[m] = bucket.get(m, Fraction(0)) - c / lam
                if any(bucket.values()):
                    entries[(x, y)] = clean(bucket)
                    out[x].add(y)
                    inc[y].add(x)
                else:
                    drop(x, y)
        for k in (s, t):
            for b in list(out[k]):
                drop(k, b)
            for a in list(inc[k]):
                drop(a, k)
        alive -= {s, t}
        eliminated += 1

    kept = sorted(alive)
    position = {k: n for n, k in enumerate(kept)}
    new_entries = {(position[a], position[b]): e for (a, b), e in entries.items() if e}
    if eliminated:
        logger.debug("minimize cancelled %d pair(s), %d summands remain", eliminated, len(kept))
    return InjComplex(S.fan, S.completion, [summands[k] for k in kept], new_entries, check=False)


@dataclass
class IsomorphismResult:
    """Outcome of an isomorphism test with a witness chain map between the minimal models."""

    isomorphic: bool
    witness: ChainMap | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.isomorphic


def _scalar_blocks_invertible(f: ChainMap) -> bool:
    groups: dict[tuple, tuple[list[int], list[int]]] = defaultdict(lambda: ([], []))
    for k, s in enumerate(f.source.summands):
        groups[(s.cone, s.u, s.v)][0].append(k)
    for k, t in enumerate(f.target.summands):
        groups[(t.cone, t.u, t.v)][1].append(k)
    for sources, targets in groups.values():
        block = qmatrix([[f.scalar(a, b) for b in targets] for a in sources], cols=len(targets))
        if det(block) == 0:
            return False
    return True


def is_isomorphic(S: InjComplex, T: InjComplex) -> IsomorphismResult:
    """
    Decide S ≅ T.

    Both sides are minimized; the summand multisets must agree, and a random
    integral combination of degree-zero cocycles must have invertible scalar
    blocks on every (cone, bidegree) group.
    """
    A, B = minimize(S), minimize(T)
    if A.summand_counter() != B.summand_counter():
        return IsomorphismResult(False, None, "summand multisets differ")
    if A.is_zero:
        return IsomorphismResult(True, zero_map(A, B))
    B = relabel(B, _common_fan(A.fan, B.fan))
    _, _, cocycles, basis = _degree_zero_homs(A, B, representatives=False)
    if cocycles.shape[1] == 0:
        return IsomorphismResult(False, None, "no degree-zero chain maps")
    maps = [_chain_map_from_vector(A, B, basis, cocycles[:, k]) for k in range(cocycles.shape[1])]
    rng = np.random.default_rng(settings.isomorphism_seed)
    bound = settings.isomorphism_coefficient_bound
    for attempt in range(max(1, settings.isomorphism_attempts)):
        if attempt == 0:
            coefficients = [1] * len(maps)
        else:
            coefficients = [int(c) for c in rng.integers(-bound, bound + 1, size=len(maps))]
        candidate = combine_maps(maps, coefficients)
        if _scalar_blocks_invertible(candidate):
            return IsomorphismResult(True, candidate)
    return IsomorphismResult(False, None, f"no invertible chain map found in {settings.isomorphism_attempts} attempts")


# ============================================================================
# PERVERSITY AND POINT TRUNCATION
# ============================================================================


@dataclass
class PerversityVerdict:
    """Membership in the two halves of the perverse t-structure, with failing cones."""

    in_le0: bool
    in_ge0: bool
    failures: list[str] = field(default_factory=list)

    @property
    def perverse(self) -> bool:
        return self.in_le0 and self.in_ge0


def perversity_check(S: InjComplex) -> PerversityVerdict:
    """
    Stalks must vanish where i + j > -codim σ and costalks where i + j < -codim σ.
    """
    le0 = ge0 = True
    failures = []
    for sigma in S.fan:
        wall = -2 * sigma.codim
        stalk = gamma_stalk(S, sigma)
        if any(u + v > wall for (u, v), _ in stalk):
            le0 = False
            failures.append(f"stalk at {S.fan.label(sigma)} above the wall")
        costalk = gamma_costalk(S, sigma)
        if any(u + v < wall for (u, v), _ in costalk):
            ge0 = False
            failures.append(f"costalk at {S.fan.label(sigma)} below the wall")
    return PerversityVerdict(le0, ge0, failures)


@dataclass
class Truncation:
    """The triangle lower -> S -> upper of the perverse truncation at one cone."""

    lower: InjComplex
    upper: InjComplex
    inclusion: ChainMap
    projection: ChainMap


def t_truncate_point(S: InjComplex) -> Truncation:
    """
    Perverse truncation over a single cone σ.

    The lower part is generated by the summands with i + j <= -codim σ together
    with the image of d one level up; the upper part is the quotient. The
    level above the wall is rebased so that the image is spanned by the first
    new generators.
    """
    cones = S.cones()
    if len(cones) > 1:
        raise ComplexError("point truncation needs a complex over a single cone")
    if S.is_zero:
        zero = InjComplex.zero(S.fan, S.completion)
        return Truncation(zero, zero, zero_map(zero, S), zero_map(S, zero))
    sigma = next(iter(cones))
    wall = -2 * sigma.codim
    levels = [s.u + s.v for s in S.summands]
    low = [k for k, lv in enumerate(levels) if lv <= wall]
    high = [k for k, lv in enumerate(levels) if lv > wall + 2]
    middle_groups: dict[tuple[int, int], list[int]] = defaultdict(list)
    for k, lv in enumerate(levels):
        if lv == wall + 2:
            middle_groups[(S.summands[k].u, S.summands[k].v)].append(k)

    def scalar(a: int, b: int) -> Fraction:
        return S.entries.get((a, b), {}).get((), Fraction(0))

    lower_summands = [S.summands[k] for k in low]
    lower_index = {k: n for n, k in enumerate(low)}
    lower_entries: dict = {(lower_index[a], lower_index[b]): e for (a, b), e in S.entries.items() if a in lower_index and b in lower_index}
    upper_summands: list[Summand] = []
    upper_entries: dict = {}
    inclusion: dict = {(lower_index[k], k): {(): Fraction(1)} for k in low}
    projection: dict = {}
    high_position: dict[int, int] = {}
    rebased: list[tuple[list[int], np.ndarray, int]] = []

    for (u, v), members in sorted(middle_groups.items()):
        sources = [k for k in low if S.summands[k].u == u - 2 and S.summands[k].v == v]
        d = qmatrix([[scalar(a, b) for a in sources] for b in members], cols=len(sources))
        image_rows = rref(d.T)[0][: rank(d.T)] if sources else qzeros(0, len(members))
        r = image_rows.shape[0]
        pivots = rref(image_rows)[1] if r else ()
        complement = [i for i in range(len(members)) if i not in pivots]
        basis = qzeros(len(members), len(members))
        for k in range(r):
            basis[:, k] = image_rows[k]
        for n, i in enumerate(complement):
            basis[i, r + n] = Fraction(1)
        basis_inv = inverse(basis)
        new_incoming = basis_inv.dot(d) if sources else qzeros(len(members), 0)

        for k in range(r):
            idx = len(lower_summands)
            lower_summands.append(Summand(sigma, u, v))
            for j, a in enumerate(sources):
                if new_incoming[k, j]:
                    lower_entries[(lower_index[a], idx)] = {(): new_incoming[k, j]}
            for i, b in enumerate(members):
                if basis[i, k]:
                    inclusion[(idx, b)] = {(): basis[i, k]}
        for k in range(r, len(members)):
            idx = len(upper_summands)
            upper_summands.append(Summand(sigma, u, v))
            for i, b in enumerate(members):
                if basis_inv[k, i]:
                    projection[(b, idx)] = {(): basis_inv[k, i]}
        rebased.append((members, basis, r))

    offset_high = len(upper_summands)
    for n, k in enumerate(high):
        high_position[k] = offset_high + n
        upper_summands.append(S.summands[k])
        projection[(k, offset_high + n)] = {(): Fraction(1)}
    for (a, b), e in S.entries.items():
        if a in high_position and b in high_position:
            upper_entries[(high_position[a], high_position[b])] = e

    upper_start = 0
    for members, basis, r in rebased:
        for k in range(r, len(members)):
            targets: dict[int, Fraction] = defaultdict(Fraction)
            for i, b in enumerate(members):
                if basis[i, k]:
                    for y, e in S.outgoing.get(b, []):
                        targets[y] += basis[i, k] * e.get((), Fraction(0))
            for y, c in targets.items():
                if c and y in high_position:
                    upper_entries[(upper_start + k - r, high_position[y])] = {(): c}
        upper_start += len(members) - r

    lower = InjComplex(S.fan, S.completion, lower_summands, lower_entries, check=False)
    upper = InjComplex(S.fan, S.completion, upper_summands, upper_entries, check=False)
    return Truncation(
        lower,
        upper,
        ChainMap(lower, S, inclusion, check=False),
        ChainMap(S, upper, projection, check=False),
    )
