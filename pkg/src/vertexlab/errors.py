"""Exception and warning types shared across vertexlab."""


class VertexLabError(Exception):
    """Base class for all vertexlab failures."""


class DomainError(VertexLabError, ValueError):
    """Parameters fall outside the convergence or genericity region."""


class NonConvergent(VertexLabError, ArithmeticError):
    """An infinite product did not reach its truncation floor within max_terms."""


class Resonance(VertexLabError, ArithmeticError):
    """A theta-function denominator vanishes: the parameter point is resonant."""


class PoleHit(Resonance):
    """A phi-factor in a denominator vanishes at the evaluation point."""

    def __init__(self, message, monomial=None):
        super().__init__(message)
        self.monomial = monomial


class NearDiagonal(Resonance):
    """An evaluation point sits within tolerance of x_i/x_j in q^Z."""


class NonSimplePole(Resonance):
    """Two pole coordinates of a residue assignment collide."""


class Singular(Resonance):
    """A restriction matrix is numerically singular."""


class ConvergenceWarning(UserWarning):
    """The degree ledger is not decaying, or |z| lies outside the trusted disc."""


class ResonantParams(DomainError, Resonance):
    """The parameter point sits on a resonance locus (z in c_m q^Z or a non-generic a-ratio)."""
