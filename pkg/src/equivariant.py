"""
Equivariant side: minimal extension sheaves over piecewise polynomial rings.

For a cone τ the minimal extension sheaf ℒ lives on star(τ). Its stalk at σ
is a free module over A_σ = Sym(V_σ*) (linear forms in degree two, written in
the coordinates of the canonical span basis of σ). Stalks are built by
increasing dimension: the boundary sections ℒ(∂σ) are computed degreewise as
compatible families over the proper faces, and ℒ_σ is free on lifts of their
minimal generators. Graded pieces are only materialized inside the window
[-codim τ, -codim σ + 2n + extra].

The g-polynomial recursion on face lattices is an independent oracle for the
top stalk.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np
import sympy
from sympy import Poly

from config import DEFAULT_SIMPLE_VARIANT, ZERO_CONE_LABEL
from dcat import gamma_costalk, gamma_stalk
from exactlin import kernel_basis, qzeros, rank, rref
from exceptions import DegreeWindowViolation
from fan import Completion, Cone, QuasiFan
from models import BigradedDims, CheckItem, GradedDims
from perverse import simple
from settings import settings

logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]


def _exponents(n: int, nvars: int, degree: int) -> list[Exponent]:
    """Exponent vectors (padded to length n) of the degree-``degree`` monomials in the first nvars variables."""
    if degree < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * n
        for k in combo:
            e[k] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def _rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


# ============================================================================
# SHEAF DATA
# ============================================================================


@dataclass
class ASheaf:
    """
    Free graded stalks with polynomial restriction matrices along covers.

    ``generators[σ]`` lists generator degrees; ``restrictions[(σ, ρ)][i][j]``
    is the coefficient of the j-th generator of ℒ_ρ in the restriction of the
    i-th generator of ℒ_σ, a polynomial in the coordinates of ρ.
    """

    fan: QuasiFan
    tau: Cone
    symbols: tuple[sympy.Symbol, ...]
    generators: dict[Cone, list[int]] = field(default_factory=dict)
    restrictions: dict[tuple[Cone, Cone], list[list[Poly]]] = field(default_factory=dict)
    _linear: dict = field(default_factory=dict, repr=False)

    @property
    def ambient_dim(self) -> int:
        return self.fan.ambient_dim

    def window(self, sigma: Cone) -> range:
        top = -sigma.codim + 2 * self.ambient_dim + settings.koszul_degree_window
        return range(-self.tau.codim, top + 1, 2)

    def poly(self, expr) -> Poly:
        return Poly(expr, *self.symbols, domain="QQ")

    # -- graded pieces ------------------------------------------------------

    def basis(self, rho: Cone, degree: int) -> list[tuple[int, Exponent]]:
        """Monomial basis of (ℒ_ρ)_degree: (generator index, exponent)."""
        out = []
        for j, e in enumerate(self.generators.get(rho, [])):
            gap = degree - e
            if gap >= 0 and gap % 2 == 0:
                out.extend((j, m) for m in _exponents(self.ambient_dim, rho.dim, gap // 2))
        return out

    def to_polys(self, rho: Cone, degree: int, vector) -> dict[int, Poly]:
        polys: dict[int, Poly] = {}
        for (j, m), c in zip(self.basis(rho, degree), vector, strict=True):
            if c:
                term = self.poly(_rational(Fraction(c)) * sympy.prod(s**k for s, k in zip(self.symbols, m, strict=True)))
                polys[j] = polys[j] + term if j in polys else term
        return polys

    def from_polys(self, rho: Cone, degree: int, polys: dict[int, Poly]) -> np.ndarray:
        basis = self.basis(rho, degree)
        index = {key: k for k, key in enumerate(basis)}
        out = qzeros(len(basis), 1)
        for j, p in polys.items():
            for m, c in p.terms():
                if c:
                    out[index[(j, tuple(m))], 0] += _fraction(c)
        return out[:, 0]

    # -- restriction of polynomials ----------------------------------------

    def linear_form(self, sigma: Cone, rho: Cone, k: int) -> Poly:
        """The k-th coordinate function of V_σ restricted to V_ρ, in ρ-coordinates."""
        key = (sigma, rho, k)
        if key not in self._linear:
            coords = sigma.span.coordinates(rho.span.basis) if rho.dim else qzeros(0, sigma.dim)
            expr = sum((_rational(coords[l, k]) * self.symbols[l] for l in range(rho.dim)), sympy.Integer(0))
            self._linear[key] = self.poly(expr)
        return self._linear[key]

    def restrict_poly(self, p: Poly, sigma: Cone, rho: Cone) -> Poly:
        if sigma == rho:
            return p
        mapping = {self.symbols[k]: self.linear_form(sigma, rho, k).as_expr() for k in range(sigma.dim)}
        return self.poly(p.as_expr().xreplace(mapping))

    def restriction_matrix(self, sigma: Cone, rho: Cone, degree: int) -> np.ndarray:
        """Matrix of (ℒ_σ)_d -> (ℒ_ρ)_d along a stored cover restriction."""
        source = self.basis(sigma, degree)
        target = self.basis(rho, degree)
        out = qzeros(len(target), len(source))
        table = self.restrictions[(sigma, rho)]
        for col, (i, m) in enumerate(source):
            monomial = self.poly(sympy.prod(s**k for s, k in zip(self.symbols, m, strict=True)))
            restricted = self.restrict_poly(monomial, sigma, rho)
            image = {j: restricted * table[i][j] for j in range(len(self.generators[rho])) if not table[i][j].is_zero}
            out[:, col] = self.from_polys(rho, degree, image)
        return out

    def multiplication_matrix(self, rho: Cone, form: Poly, degree: int) -> np.ndarray:
        """Matrix of multiplication by a linear form, (ℒ_ρ)_(d-2) -> (ℒ_ρ)_d."""
        source = self.basis(rho, degree - 2)
        out = qzeros(len(self.basis(rho, degree)), len(source))
        for col in range(len(source)):
            unit = qzeros(len(source), 1)[:, 0]
            unit[col] = Fraction(1)
            polys = {j: p * form for j, p in self.to_polys(rho, degree - 2, unit).items()}
            out[:, col] = self.from_polys(rho, degree, polys)
        return out


# ============================================================================
# CONSTRUCTION
# ============================================================================


def _proper_interval(sheaf: ASheaf, sigma: Cone) -> list[Cone]:
    return [rho for rho in sheaf.generators if rho != sigma and rho.is_face_of(sigma)]


def _boundary_sections(sheaf: ASheaf, faces: list[Cone], degree: int) -> tuple[np.ndarray, list[int]]:
    """Compatible families over ``faces`` in one degree: kernel basis columns and block offsets."""
    sizes = [len(sheaf.basis(rho, degree)) for rho in faces]
    offsets = [sum(sizes[:k]) for k in range(len(faces) + 1)]
    position = {rho: k for k, rho in enumerate(faces)}
    blocks = []
    for rho in faces:
        for lower in faces:
            if (rho, lower) not in sheaf.restrictions:
                continue
            block = qzeros(sizes[position[lower]], offsets[-1])
            a, b = offsets[position[rho]], offsets[position[rho] + 1]
            block[:, a:b] = sheaf.restriction_matrix(rho, lower, degree)
            c, d = offsets[position[lower]], offsets[position[lower] + 1]
            for k in range(d - c):
                block[k, c + k] -= 1
            blocks.append(block)
    if not blocks:
        return kernel_basis(qzeros(0, offsets[-1])), offsets
    return kernel_basis(np.vstack(blocks)), offsets


def _boundary_products(
    sheaf: ASheaf, sigma: Cone, faces: list[Cone], sections: np.ndarray, degree: int, offsets, previous_offsets
) -> np.ndarray:
    """A_σ+ times the sections of degree d-2, as vectors in degree d."""
    columns = []
    for k in range(sigma.dim):
        blocks = [sheaf.multiplication_matrix(rho, sheaf.linear_form(sigma, rho, k), degree) for rho in faces]
        for col in range(sections.shape[1]):
            pieces = []
            for n_rho, block in enumerate(blocks):
                a, b = previous_offsets[n_rho], previous_offsets[n_rho + 1]
                pieces.append(block.dot(sections[a:b, col]) if b > a else qzeros(block.shape[0], 1)[:, 0])
            columns.append(np.concatenate(pieces))
    if not columns:
        return qzeros(offsets[-1], 0)
    return np.column_stack(columns)


def minimal_extension_sheaf(fan: QuasiFan, tau: Cone) -> ASheaf:
    """
    ℒ^τ on star(τ), normalized by ℒ_τ ≅ A_τ{codim τ}.

    Raises:
        DegreeWindowViolation: if a generator of ℒ_σ appears in degree >= -codim σ
    """
    if settings.degree_window_widened:
        logger.info("degree window widened by %d above -codim + 2n", settings.koszul_degree_window)
    symbols = sympy.symbols(f"x0:{fan.ambient_dim}")
    sheaf = ASheaf(fan, tau, tuple(symbols))
    sheaf.generators[tau] = [-tau.codim]
    for sigma in sorted((c for c in fan.star(tau) if c != tau), key=lambda c: c.sort_key):
        faces = _proper_interval(sheaf, sigma)
        covers = [rho for rho in faces if rho.dim == sigma.dim - 1]
        degrees: list[int] = []
        lifts: list[tuple[int, np.ndarray]] = []
        previous: np.ndarray | None = None
        offsets_by_degree: dict[int, list[int]] = {}
        for degree in sheaf.window(sigma):
            sections, offsets = _boundary_sections(sheaf, faces, degree)
            offsets_by_degree[degree] = offsets
            if previous is not None and previous.shape[1]:
                products = _boundary_products(sheaf, sigma, faces, previous, degree, offsets, offsets_by_degree[degree - 2])
            else:
                products = qzeros(offsets[-1], 0)
            stacked = np.column_stack([products, sections]) if offsets[-1] else qzeros(0, products.shape[1] + sections.shape[1])
            _, pivots = rref(stacked) if stacked.size else (None, ())
            new = [p - products.shape[1] for p in pivots if p >= products.shape[1]]
            if new and degree >= -sigma.codim:
                raise DegreeWindowViolation(f"generator of the stalk at {fan.label(sigma)} in degree {degree}")
            for k in new:
                degrees.append(degree)
                lifts.append((degree, sections[:, k]))
            previous = sections
        sheaf.generators[sigma] = degrees
        for rho in covers:
            n_rho = faces.index(rho)
            table = []
            for degree, vector in lifts:
                offsets = offsets_by_degree[degree]
                component = vector[offsets[n_rho] : offsets[n_rho + 1]]
                polys = sheaf.to_polys(rho, degree, component)
                table.append([polys.get(j, sheaf.poly(0)) for j in range(len(sheaf.generators[rho]))])
            sheaf.restrictions[(sigma, rho)] = table
        logger.debug("minimal extension of %s: stalk at %s has generators %s", fan.label(tau), fan.label(sigma), degrees)
    return sheaf


# ============================================================================
# LOCAL DATA
# ============================================================================


@dataclass
class LocalDims:
    """Reduced stalk and costalk dimensions of ℒ at one cone."""

    stalk: GradedDims
    costalk: GradedDims
    costalk_free: bool


def local_ic_dims(sheaf: ASheaf, sigma: Cone) -> LocalDims:
    """
    Reduced stalk (generator degrees) and reduced costalk (minimal generators of ker ℒ_σ -> ℒ(∂σ)).

    The costalk is flagged free when its Hilbert function agrees with a free
    module on its minimal generators throughout the window.
    """
    if sigma not in sheaf.generators:
        return LocalDims(GradedDims(), GradedDims(), True)
    stalk = GradedDims.from_degrees(sheaf.generators[sigma])
    covers = [rho for rho in _proper_interval(sheaf, sigma) if rho.dim == sigma.dim - 1]
    forms = [sheaf.poly(s) for s in sheaf.symbols[: sigma.dim]]
    kernel_dims: dict[int, int] = {}
    generator_degrees: list[int] = []
    previous: np.ndarray | None = None
    for degree in sheaf.window(sigma):
        size = len(sheaf.basis(sigma, degree))
        if covers and size:
            kernel = kernel_basis(np.vstack([sheaf.restriction_matrix(sigma, rho, degree) for rho in covers]))
        else:
            kernel = kernel_basis(qzeros(0, size))
        kernel_dims[degree] = kernel.shape[1]
        products = [sheaf.multiplication_matrix(sigma, form, degree).dot(previous) for form in forms] if previous is not None and previous.shape[1] else []
        produced = rank(np.column_stack(products)) if products and size else 0
        generator_degrees.extend([degree] * (kernel.shape[1] - produced))
        previous = kernel
    free = all(
        kernel_dims[d] == sum(len(_exponents(sheaf.ambient_dim, sigma.dim, (d - e) // 2)) for e in generator_degrees if d >= e)
        for d in kernel_dims
    )
    return LocalDims(stalk, GradedDims.from_degrees(generator_degrees), free)


def h_transfer(sheaf: ASheaf) -> dict[Cone, tuple[BigradedDims, BigradedDims]]:
    """Predicted Γ stalk and costalk of the simple object: degree j goes to the diagonal bidegree (j/2, j/2)."""
    out = {}
    for sigma in sheaf.fan:
        local = local_ic_dims(sheaf, sigma)
        out[sigma] = (
            BigradedDims.from_counts({(j, j): d for j, d in local.stalk.entries}),
            BigradedDims.from_counts({(j, j): d for j, d in local.costalk.entries}),
        )
    return out


# ============================================================================
# G-POLYNOMIAL ORACLE
# ============================================================================


def _h_and_g(fan: QuasiFan, cone: Cone, memo: dict) -> tuple[Poly, Poly]:
    t = sympy.Symbol("t")
    if cone in memo:
        return memo[cone]
    if cone.dim == 0:
        one = Poly(1, t)
        memo[cone] = (one, one)
        return memo[cone]
    h = Poly(0, t)
    for face in fan.faces_of(cone):
        if face == cone:
            continue
        _, g_face = _h_and_g(fan, face, memo)
        h += g_face * Poly((t - 1) ** (cone.dim - 1 - face.dim), t)
    coeffs = [int(c) for c in reversed(h.all_coeffs())]
    half = (cone.dim - 1) // 2
    g_coeffs = [coeffs[0]] + [coeffs[i] - coeffs[i - 1] for i in range(1, half + 1) if i < len(coeffs)]
    g = Poly(sum(c * t**i for i, c in enumerate(g_coeffs)), t)
    memo[cone] = (h, g)
    return memo[cone]


def h_polynomial(fan: QuasiFan, cone: Cone | None = None) -> list[int]:
    """Toric h-vector of the polytope cut out of a cone (default: the top cone)."""
    cone = cone or fan.top
    h, _ = _h_and_g(fan, cone, {})
    return [int(c) for c in reversed(h.all_coeffs())]


def g_oracle(fan: QuasiFan, cone: Cone | None = None) -> list[int]:
    """
    g-vector of the cross-section polytope of a cone by the Stanley recursion.

    h(P) = Σ over proper faces G (with the empty face) of g(G)·(t-1)^(dim P - 1 - dim G),
    and g collects h_0 and the successive differences up to half the dimension.
    """
    cone = cone or fan.top
    _, g = _h_and_g(fan, cone, {})
    return [int(c) for c in reversed(g.all_coeffs())]


# ============================================================================
# CROSS-CHECK
# ============================================================================


def crosscheck_purity(fan: QuasiFan, completion: Completion, tau: Cone, variant: str = DEFAULT_SIMPLE_VARIANT) -> list[CheckItem]:
    """Compare Γ data of the simple object on τ with the minimal extension sheaf predictions, cone by cone."""
    L, _ = simple(fan, completion, tau, variant)
    sheaf = minimal_extension_sheaf(fan, tau)
    predictions = h_transfer(sheaf)
    label = fan.label(tau)
    items = []
    for sigma in fan:
        stalk, costalk = gamma_stalk(L, sigma), gamma_costalk(L, sigma)
        expected_stalk, expected_costalk = predictions[sigma]
        local = local_ic_dims(sheaf, sigma)
        walls = sigma == tau or (
            all(j < -sigma.codim for j in local.stalk.degrees) and all(j > -sigma.codim for j in local.costalk.degrees)
        )
        passed = stalk == expected_stalk and costalk == expected_costalk and stalk.is_diagonal and costalk.is_diagonal
        items.append(
            CheckItem(
                check="bbfk",
                subject=f"L_{label} at {fan.label(sigma)}",
                passed=passed and walls and local.costalk_free,
                detail="" if passed else "Γ data differ from the minimal extension sheaf",
                data={
                    "stalk": stalk.to_rows(),
                    "costalk": costalk.to_rows(),
                    "expected_stalk": expected_stalk.to_rows(),
                    "expected_costalk": expected_costalk.to_rows(),
                },
            )
        )
    return items


def crosscheck_g(fan: QuasiFan) -> list[CheckItem]:
    """
    Stalks of ℒ^o against g-vectors: the stalk at σ has g_k(σ) generators in degree 2k - n.

    Raises:
        NotASubset: if the fan has no zero cone
    """
    origin = fan.cone(ZERO_CONE_LABEL)
    sheaf = minimal_extension_sheaf(fan, origin)
    n = fan.ambient_dim
    items = []
    for sigma in fan:
        g = g_oracle(fan, sigma)
        expected = GradedDims.from_counts({2 * k - n: c for k, c in enumerate(g)})
        stalk = local_ic_dims(sheaf, sigma).stalk
        items.append(
            CheckItem(
                check="g_vector",
                subject=f"stalk at {fan.label(sigma)}",
                passed=stalk == expected,
                detail="" if stalk == expected else f"g = {g}",
                data={"g": g, "stalk": [list(e) for e in stalk.entries]},
            )
        )
    return items
