"""Numerical laboratory for elliptic stable envelopes and vertex functions of T*Gr(k, n)."""
from .errors import (ConvergenceWarning, DomainError, NearDiagonal, NonConvergent, NonSimplePole,
                     PoleHit, Resonance, ResonantParams, Singular, VertexLabError)
from .model import Chamber, FixedPoint, Params, fixed_points, validate_params

__version__ = "0.1.0"

__all__ = [
    "Chamber", "ConvergenceWarning", "DomainError", "FixedPoint", "NearDiagonal", "NonConvergent",
    "NonSimplePole", "Params", "PoleHit", "Resonance", "ResonantParams", "Singular", "VertexLabError", "fixed_points",
    "validate_params",
]
