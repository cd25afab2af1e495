"""
Configuration and constants for the Koszul fan engine.
Centralizes fixed values to avoid duplication across modules.
"""

# ============================================================================
# FORMAT CONFIGURATION
# ============================================================================

FORMAT_VERSION = 1
ENGINE_VERSION = "0.3.0"

# Label of the zero cone; other cones are labelled by their ray indices joined by "-"
ZERO_CONE_LABEL = "o"
RAY_LABEL_SEPARATOR = "-"

# ============================================================================
# EXIT CODES
# ============================================================================

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

# ============================================================================
# OBJECT FAMILIES
# ============================================================================

OBJECT_KINDS = ["costandard", "standard", "simple", "injective"]

SIMPLE_VARIANTS = {
    "tau": "weight truncation: keep classes with u + v <= 0",
    "tau_prime": "degree truncation: keep classes with q = p + 1",
    "middle_extension": "cone over the point truncation of the stalk restriction",
}
DEFAULT_SIMPLE_VARIANT = "tau"

CHECK_KINDS = ["purity", "koszulity", "duality", "bbfk"]

# ============================================================================
# CONSTRUCTION LIMITS
# ============================================================================

# Twist search range for Ext^1 killing: |v| <= TWIST_RANGE_FACTOR * (n + #summands)
TWIST_RANGE_FACTOR = 2

