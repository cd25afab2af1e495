"""
Custom exception classes for the Koszul fan engine.
Provides structured error handling across modules.
"""


class KoszulFanError(Exception):
    """Base exception for all engine errors."""

    pass


# ============================================================================
# FANS AND COMPLETIONS
# ============================================================================


class FanError(KoszulFanError):
    """Raised when cone, fan or completion data is invalid."""

    pass


class NotPointed(FanError):
    """Raised when the generators of a cone span a line."""

    pass


class NotFullDimensional(FanError):
    """Raised when an operation needs a cone spanning the ambient space."""

    pass


class InvalidCompletion(FanError):
    """Raised when a completion violates containment or complementarity."""

    pass


class NotASubset(FanError):
    """Raised when a set of cones is not contained in the quasifan."""

    pass


class NotOpen(FanError):
    """Raised when a subset is not closed under taking faces."""

    pass


class NotClosed(FanError):
    """Raised when a subset is not closed under taking stars."""

    pass


class NotAQuasiFan(FanError):
    """Raised when a set of cones is not interval-closed."""

    pass


# ============================================================================
# LINEAR AND EXTERIOR ALGEBRA
# ============================================================================


class AlgebraError(KoszulFanError):
    """Raised when exact linear or exterior algebra fails."""

    pass


class OverlappingSubspaces(AlgebraError):
    """Raised when a wedge is taken over subspaces that intersect."""

    pass


class SingularMatrix(AlgebraError):
    """Raised when a matrix that must be invertible is singular."""

    pass


# ============================================================================
# COMPLEXES
# ============================================================================


class ComplexError(KoszulFanError):
    """Raised when a complex of injectives is malformed."""

    pass


class BadEntryDegree(ComplexError):
    """Raised when an entry's exterior degree disagrees with the gradings it connects."""

    pass


class DSquaredNonzero(ComplexError):
    """Raised when a differential does not square to zero."""

    pass


class ParityViolation(ComplexError):
    """Raised when a bidegree leaves the half-integer lattice."""

    pass


class MissingFaces(ComplexError):
    """Raised when a stalk is requested at a cone whose faces are absent."""

    pass


class FanMismatch(ComplexError):
    """Raised when complexes or maps live over different fans."""

    pass


class NotAChainMap(ComplexError):
    """Raised when a map does not commute with the differentials."""

    pass


# ============================================================================
# CONSTRUCTIONS
# ============================================================================


class ConstructionError(KoszulFanError):
    """Raised when a construction algorithm hits an internal inconsistency."""

    pass


class InconsistentDifferential(ConstructionError):
    """Raised when no differential with the prescribed shape squares to zero."""

    pass


class NonterminatingTwistRange(ConstructionError):
    """Raised when an extension class appears outside the twist bound."""

    pass


class PairingDegenerate(ConstructionError):
    """Raised when a duality pairing matrix is singular."""

    pass


class DegreeWindowViolation(ConstructionError):
    """Raised when a minimal extension generator leaves the certified degree window."""

    pass


# ============================================================================
# INPUT FILES
# ============================================================================


class FanFileError(KoszulFanError):
    """Raised when a fan or complex file cannot be parsed or validated."""

    pass
