"""
Cones, face lattices, quasifans, dual cones and combinatorial completions.

Faces are found by double description: the facets of a cone are read off the
(d-1)-subsets of its generators that span a supporting hyperplane inside the
span of the cone, and every other face is an intersection of facets. A cone
is identified by its extremal primitive integer rays, so cones compare by
value across sub-quasifans.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from cache import MemoTable
from config import RAY_LABEL_SEPARATOR, ZERO_CONE_LABEL
from exactlin import RationalSubspace, kernel_basis, primitive, qmatrix, qvector, rank, solve
from exceptions import (
    FanError,
    InvalidCompletion,
    NotAQuasiFan,
    NotASubset,
    NotFullDimensional,
    NotPointed,
)

logger = logging.getLogger(__name__)

IntVector = tuple[int, ...]

_lattices: MemoTable[tuple] = MemoTable("face_lattices")


def _dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b, strict=True)), Fraction(0))


# ============================================================================
# CONES
# ============================================================================


@dataclass(frozen=True)
class Cone:
    """Pointed rational polyhedral cone, stored by its sorted extremal primitive rays."""

    ambient_dim: int
    generators: tuple[IntVector, ...]

    @cached_property
    def span(self) -> RationalSubspace:
        """V_sigma, the linear span."""
        return RationalSubspace.span(self.generators, self.ambient_dim)

    @cached_property
    def annihilator(self) -> RationalSubspace:
        """V_sigma^perp inside V*."""
        return self.span.annihilator()

    @property
    def dim(self) -> int:
        return self.span.dim

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim

    @property
    def is_zero(self) -> bool:
        return not self.generators

    @property
    def sort_key(self) -> tuple:
        return (self.dim, self.generators)

    def is_face_of(self, other: Cone) -> bool:
        """Face relation for cones of one quasifan: the rays of self are rays of other."""
        return set(self.generators) <= set(other.generators)

    def __repr__(self) -> str:
        return f"Cone(dim={self.dim}, rays={list(self.generators)})"


def _facets(points: list[tuple[Fraction, ...]], d: int) -> dict[frozenset[int], tuple[int, ...]]:
    """Facets of a full-dimensional cone in Q^d: zero set of generator indices -> inward normal."""
    facets: dict[frozenset[int], tuple[int, ...]] = {}
    if d == 0:
        return facets
    for subset in combinations(range(len(points)), d - 1):
        rows = [points[i] for i in subset]
        if rank(qmatrix(rows, cols=d)) != d - 1:
            continue
        normal = tuple(kernel_basis(qmatrix(rows, cols=d))[:, 0])
        values = [_dot(normal, p) for p in points]
        if all(v >= 0 for v in values):
            pass
        elif all(v <= 0 for v in values):
            normal = tuple(-x for x in normal)
            values = [-v for v in values]
        else:
            continue
        zero_set = frozenset(i for i, v in enumerate(values) if v == 0)
        facets.setdefault(zero_set, primitive(normal))
    return facets


@dataclass(frozen=True)
class _Lattice:
    """Face data of one cone."""

    top: Cone
    faces: tuple[Cone, ...]
    supporting: dict[Cone, tuple[Fraction, ...]] = field(hash=False, compare=False)
    facet_normals: tuple[tuple[Fraction, ...], ...] = ()


def _compute_lattice(generators: tuple[IntVector, ...], ambient_dim: int) -> _Lattice:
    span = RationalSubspace.span(generators, ambient_dim)
    d = span.dim
    points = [tuple(row) for row in span.coordinates(generators)] if generators else []
    facets = _facets(points, d)

    if d > 0:
        normals = list(facets.values())
        if not normals or rank(qmatrix(normals, cols=d)) != d:
            raise NotPointed(f"generators {list(generators)} span a cone containing a line")

    # extremal rays lie on facets whose normals have rank d - 1
    extremal = []
    for i in range(len(points)):
        on = [facets[z] for z in facets if i in z]
        if (rank(qmatrix(on, cols=d)) if on else 0) == d - 1:
            extremal.append(i)
    rays = sorted({generators[i] for i in extremal})
    index_of = {generators[i]: rays.index(generators[i]) for i in extremal}

    lifted: dict[frozenset[int], tuple[Fraction, ...]] = {}
    for zero_set, normal in facets.items():
        ray_set = frozenset(index_of[generators[i]] for i in zero_set if i in extremal)
        xi = solve(span.matrix, normal) if d else ()
        lifted[ray_set] = qvector(xi)

    face_sets: set[frozenset[int]] = {frozenset(range(len(rays)))} | set(lifted)
    changed = True
    while changed:
        changed = False
        for a, b in combinations(list(face_sets), 2):
            meet = a & b
            if meet not in face_sets:
                face_sets.add(meet)
                changed = True

    faces = []
    supporting: dict[Cone, tuple[Fraction, ...]] = {}
    for ray_set in face_sets:
        face = Cone(ambient_dim, tuple(rays[i] for i in sorted(ray_set)))
        xi = [Fraction(0)] * ambient_dim
        for facet_set, normal in lifted.items():
            if ray_set <= facet_set:
                xi = [x + y for x, y in zip(xi, normal, strict=True)]
        faces.append(face)
        supporting[face] = tuple(xi)
    faces.sort(key=lambda c: c.sort_key)
    top = Cone(ambient_dim, tuple(rays))
    logger.debug("cone with %d rays in dimension %d has %d faces", len(rays), d, len(faces))
    return _Lattice(top, tuple(faces), supporting, tuple(lifted.values()))


def _lattice(generators: Iterable[Sequence[int]], ambient_dim: int) -> _Lattice:
    prepared = []
    for g in generators:
        if len(g) != ambient_dim:
            raise FanError(f"generator {list(g)} does not have length {ambient_dim}")
        p = primitive(g)
        if any(p):
            prepared.append(p)
    key = (ambient_dim, tuple(sorted(set(prepared))))
    return _lattices.get(key, lambda: _compute_lattice(key[1], ambient_dim))


def make_cone(generators: Iterable[Sequence[int]], ambient_dim: int) -> Cone:
    """Cone generated by some vectors, reduced to its extremal primitive rays."""
    return _lattice(generators, ambient_dim).top


def supporting_functional(cone: Cone, face: Cone) -> tuple[Fraction, ...]:
    """A xi in V* with xi >= 0 on the cone and cone ∩ ker(xi) = face."""
    data = _lattice(cone.generators, cone.ambient_dim)
    if face not in data.supporting:
        raise NotASubset(f"{face!r} is not a face of {cone!r}")
    return data.supporting[face]


def cone_faces(cone: Cone) -> tuple[Cone, ...]:
    return _lattice(cone.generators, cone.ambient_dim).faces


# ============================================================================
# QUASIFANS
# ============================================================================


@dataclass(frozen=True)
class SubfanSummary:
    """Topological data of a set of cones inside a quasifan."""

    is_open: bool
    is_closed: bool
    closure: frozenset[Cone]
    star: frozenset[Cone]
    open_hull: frozenset[Cone]
    boundary: frozenset[Cone]


@dataclass(frozen=True)
class QuasiFan:
    """
    Interval-closed finite collection of cones.

    The ray list fixes cone labels; sub-quasifans inherit it so a cone keeps
    its label everywhere.
    """

    ambient_dim: int
    cones: tuple[Cone, ...]
    rays: tuple[IntVector, ...]
    name: str = ""

    # -- construction -------------------------------------------------------

    @classmethod
    def from_cones(cls, cone_generators: Sequence[Sequence[Sequence[int]]], ambient_dim: int, name: str = "") -> QuasiFan:
        """Fan given by top cones: the union of their face lattices."""
        if ambient_dim < 0:
            raise FanError("ambient dimension must be non-negative")
        lattices = [_lattice(gens, ambient_dim) for gens in cone_generators] or [_lattice([], ambient_dim)]
        for a, b in combinations(lattices, 2):
            common = tuple(sorted(set(a.top.generators) & set(b.top.generators)))
            meet = Cone(ambient_dim, common)
            if meet not in a.supporting or meet not in b.supporting:
                raise FanError(f"cones {list(a.top.generators)} and {list(b.top.generators)} do not meet in a common face")
        cones = sorted({face for lat in lattices for face in lat.faces}, key=lambda c: c.sort_key)
        rays = tuple(sorted({g for c in cones for g in c.generators}))
        fan = cls(ambient_dim, tuple(cones), rays, name)
        logger.info("built fan %r with f-vector %s", name, fan.f_vector())
        return fan

    def sub(self, subset: Iterable[Cone], name: str = "") -> QuasiFan:
        """Sub-quasifan on a subset of cones; must be interval-closed."""
        chosen = self._check_subset(subset)
        for tau, sigma in combinations(sorted(chosen, key=lambda c: c.sort_key), 2):
            if not tau.is_face_of(sigma):
                continue
            for rho in self.cones:
                if rho not in chosen and tau.is_face_of(rho) and rho.is_face_of(sigma):
                    raise NotAQuasiFan(f"{self.label(rho)} lies between {self.label(tau)} and {self.label(sigma)}")
        cones = tuple(c for c in self.cones if c in chosen)
        return QuasiFan(self.ambient_dim, cones, self.rays, name or self.name)

    # -- container protocol -------------------------------------------------

    @cached_property
    def _members(self) -> frozenset[Cone]:
        return frozenset(self.cones)

    def __contains__(self, cone: object) -> bool:
        return cone in self._members

    def __iter__(self) -> Iterator[Cone]:
        return iter(self.cones)

    def __len__(self) -> int:
        return len(self.cones)

    # -- labels -------------------------------------------------------------

    def label(self, cone: Cone) -> str:
        if cone.is_zero:
            return ZERO_CONE_LABEL
        try:
            indices = sorted(self.rays.index(g) for g in cone.generators)
        except ValueError:
            return repr(cone)
        return RAY_LABEL_SEPARATOR.join(str(i) for i in indices)

    def cone(self, label: str) -> Cone:
        """Look up a cone by label; ``top`` names the unique maximal cone."""
        if label == "top" and self.top is not None:
            return self.top
        for c in self.cones:
            if self.label(c) == label:
                return c
        raise NotASubset(f"no cone labelled {label!r} in fan {self.name!r}")

    # -- order --------------------------------------------------------------

    @staticmethod
    def leq(tau: Cone, sigma: Cone) -> bool:
        return tau.is_face_of(sigma)

    def faces_of(self, sigma: Cone) -> list[Cone]:
        return [tau for tau in self.cones if tau.is_face_of(sigma)]

    def star(self, tau: Cone) -> list[Cone]:
        return [rho for rho in self.cones if tau.is_face_of(rho)]

    def covers(self, tau: Cone) -> list[Cone]:
        return [rho for rho in self.star(tau) if rho.dim == tau.dim + 1]

    def boundary(self, sigma: Cone) -> list[Cone]:
        """The proper faces of sigma present in the quasifan."""
        return [tau for tau in self.faces_of(sigma) if tau != sigma]

    def has_all_faces(self, sigma: Cone) -> bool:
        return all(face in self for face in cone_faces(sigma))

    @cached_property
    def top(self) -> Cone | None:
        maximal = [c for c in self.cones if not any(c != d and c.is_face_of(d) for d in self.cones)]
        return maximal[0] if len(maximal) == 1 else None

    def f_vector(self) -> list[int]:
        counts = [0] * (self.ambient_dim + 1)
        for c in self.cones:
            counts[c.dim] += 1
        while len(counts) > 1 and counts[-1] == 0:
            counts.pop()
        return counts

    def diamonds(self) -> list[tuple[Cone, Cone, Cone, Cone]]:
        """Intervals [rho, sigma] of length two with their two middle cones."""
        out = []
        for rho in self.cones:
            for sigma in self.star(rho):
                if sigma.dim != rho.dim + 2:
                    continue
                middle = [c for c in self.covers(rho) if c.is_face_of(sigma)]
                if len(middle) == 2:
                    out.append((rho, middle[0], middle[1], sigma))
        return out

    # -- topology -----------------------------------------------------------

    def _check_subset(self, subset: Iterable[Cone]) -> frozenset[Cone]:
        chosen = frozenset(subset)
        outside = [c for c in chosen if c not in self]
        if outside:
            raise NotASubset(f"{len(outside)} cone(s) are not in fan {self.name!r}: {outside[0]!r}")
        return chosen

    def closure(self, subset: Iterable[Cone]) -> frozenset[Cone]:
        chosen = self._check_subset(subset)
        return frozenset(rho for rho in self.cones if any(s.is_face_of(rho) for s in chosen))

    def open_hull(self, subset: Iterable[Cone]) -> frozenset[Cone]:
        chosen = self._check_subset(subset)
        return frozenset(tau for tau in self.cones if any(tau.is_face_of(s) for s in chosen))

    def is_open(self, subset: Iterable[Cone]) -> bool:
        chosen = self._check_subset(subset)
        return self.open_hull(chosen) == chosen

    def is_closed(self, subset: Iterable[Cone]) -> bool:
        chosen = self._check_subset(subset)
        return self.closure(chosen) == chosen


def subfan_ops(fan: QuasiFan, subset: Iterable[Cone]) -> SubfanSummary:
    """Open/closed tests, closure, star and boundary of a set of cones."""
    chosen = fan._check_subset(subset)
    closure = fan.closure(chosen)
    open_hull = fan.open_hull(chosen)
    return SubfanSummary(
        is_open=open_hull == chosen,
        is_closed=closure == chosen,
        closure=closure,
        star=closure,
        open_hull=open_hull,
        boundary=open_hull - chosen,
    )


def face_lattice(generators: Iterable[Sequence[int]], ambient_dim: int, name: str = "") -> QuasiFan:
    """
    The closed quasifan [sigma] of all faces of one cone.

    Raises:
        NotPointed: if the generators span a cone containing a line
    """
    data = _lattice(generators, ambient_dim)
    return QuasiFan(ambient_dim, data.faces, data.top.generators, name)


# ============================================================================
# COMPLETIONS
# ============================================================================


class Completion:
    """
    Combinatorial completion: a complement Phi_sigma of V_sigma^perp in V* for each cone.

    Relative pieces Phi^tau_sigma = V_tau^perp ∩ Phi_sigma are memoized per instance.
    """

    def __init__(self, ambient_dim: int, phi: dict[Cone, RationalSubspace]):
        self.ambient_dim = ambient_dim
        self.phi = dict(phi)
        self._relative: dict[tuple[Cone, Cone], RationalSubspace] = {}

    def __getitem__(self, cone: Cone) -> RationalSubspace:
        try:
            return self.phi[cone]
        except KeyError:
            raise InvalidCompletion(f"completion has no subspace for {cone!r}") from None

    def __contains__(self, cone: object) -> bool:
        return cone in self.phi

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Completion) and self.phi == other.phi

    __hash__ = None  # type: ignore[assignment]

    def relative(self, tau: Cone, sigma: Cone) -> RationalSubspace:
        """Phi^tau_sigma for tau a face of sigma."""
        key = (tau, sigma)
        if key not in self._relative:
            self._relative[key] = tau.annihilator.intersect(self[sigma])
        return self._relative[key]

    def restricted(self, cones: Iterable[Cone]) -> Completion:
        return Completion(self.ambient_dim, {c: self[c] for c in cones})

    def validate(self, fan: QuasiFan) -> None:
        """
        Check containment, complementarity and the direct-sum rule on a fan.

        Raises:
            InvalidCompletion: naming the first offending cone(s)
        """
        n = fan.ambient_dim
        for sigma in fan:
            phi = self[sigma]
            if phi.dim + sigma.annihilator.dim != n or not phi.meets_trivially(sigma.annihilator):
                raise InvalidCompletion(f"Phi of {fan.label(sigma)} is not a complement of its annihilator")
        for tau, sigma in combinations(fan.cones, 2):
            if tau.is_face_of(sigma) and not self[tau].is_subspace_of(self[sigma]):
                raise InvalidCompletion(f"Phi of {fan.label(tau)} is not contained in Phi of {fan.label(sigma)}")
        for rho in fan:
            for tau in fan.star(rho):
                for sigma in fan.star(tau):
                    if len({rho, tau, sigma}) < 3:
                        continue
                    outer, inner, whole = self.relative(tau, sigma), self.relative(rho, tau), self.relative(rho, sigma)
                    if not outer.meets_trivially(inner) or (outer + inner) != whole:
                        raise InvalidCompletion(
                            f"relative pieces along {fan.label(rho)} < {fan.label(tau)} < {fan.label(sigma)} do not sum directly"
                        )


def orthogonal_completion(fan: QuasiFan) -> Completion:
    """Phi_sigma = dot-product orthogonal complement of V_sigma^perp, i.e. V_sigma read in V*."""
    return Completion(fan.ambient_dim, {sigma: sigma.span for sigma in fan})


# ============================================================================
# DUALITY
# ============================================================================


@dataclass(frozen=True)
class ConeDuality:
    """A full-dimensional cone, its dual cone, and the order-reversing face bijection."""

    primal: QuasiFan
    dual: QuasiFan
    pairs: tuple[tuple[Cone, Cone], ...]

    @cached_property
    def _forward(self) -> dict[Cone, Cone]:
        return dict(self.pairs)

    @cached_property
    def _backward(self) -> dict[Cone, Cone]:
        return {b: a for a, b in self.pairs}

    def perp(self, cone: Cone) -> Cone:
        """tau -> tau^perp for primal faces, and back for dual faces."""
        if cone in self._forward:
            return self._forward[cone]
        if cone in self._backward:
            return self._backward[cone]
        raise NotASubset(f"{cone!r} is a face of neither cone")

    def inverse(self) -> ConeDuality:
        return ConeDuality(self.dual, self.primal, tuple((b, a) for a, b in self.pairs))


def dual_cone(sigma: Cone | QuasiFan) -> ConeDuality:
    """
    Dual cone with the bijection tau -> tau^perp = sigma^vee ∩ V_tau^perp.

    Raises:
        NotFullDimensional: if sigma does not span the ambient space
    """
    if isinstance(sigma, QuasiFan):
        if sigma.top is None:
            raise NotFullDimensional("dual cones need a fan with a unique maximal cone")
        sigma = sigma.top
    if sigma.dim != sigma.ambient_dim:
        raise NotFullDimensional(f"{sigma!r} is not full-dimensional")
    n = sigma.ambient_dim
    data = _lattice(sigma.generators, n)
    normals = [primitive(xi) for xi in data.facet_normals]
    primal = face_lattice(sigma.generators, n)
    dual = face_lattice(normals, n)
    dual_rays = dual.rays
    pairs = []
    for tau in primal:
        vanishing = tuple(sorted(r for r in dual_rays if all(_dot(r, g) == 0 for g in tau.generators)))
        pairs.append((tau, Cone(n, vanishing)))
    for tau, image in pairs:
        if image not in dual or image.dim != n - tau.dim:
            raise FanError(f"face {primal.label(tau)} has no dual face of dimension {n - tau.dim}")
    logger.debug("dual cone has %d rays", len(dual_rays))
    return ConeDuality(primal, dual, tuple(pairs))


def dual_completion(completion: Completion, duality: ConeDuality) -> Completion:
    """
    Phi^vee_{tau^perp} = annihilator of Phi_tau in V.

    Raises:
        InvalidCompletion: if the result violates a completion invariant
    """
    phi = {duality.perp(tau): completion[tau].annihilator() for tau in duality.primal}
    dual = Completion(duality.dual.ambient_dim, phi)
    try:
        dual.validate(duality.dual)
    except InvalidCompletion as exc:
        raise InvalidCompletion(f"dual completion is invalid: {exc}") from exc
    return dual


# ============================================================================
# CONE FAMILIES
# ============================================================================


def ray_fan() -> QuasiFan:
    """The ray R>=0 in R: faces o and sigma."""
    return face_lattice([(1,)], 1, name="ray")


def quadrant() -> QuasiFan:
    return face_lattice([(1, 0), (0, 1)], 2, name="quadrant")


def simplex_cone(n: int) -> QuasiFan:
    """Cone over an (n-1)-simplex: the positive orthant of R^n."""
    basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return face_lattice(basis, n, name=f"simplex{n}")


def square_cone() -> QuasiFan:
    """Cone over the unit square at height one."""
    return face_lattice([(1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1)], 3, name="square_cone")


def polygon_cone(m: int) -> QuasiFan:
    """Cone over an m-gon with vertices (k, k^2) on a parabola."""
    if m < 3:
        raise FanError("a polygon needs at least three vertices")
    return face_lattice([(k, k * k, 1) for k in range(m)], 3, name=f"polygon{m}_cone")
