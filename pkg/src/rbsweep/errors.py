"""Exception types shared across the sweep engine."""


class RBSweepError(Exception):
    """Base class for all engine errors."""


class SingularAtResonance(RBSweepError):
    """Direct solve requested where the squared frequency hits a pencil eigenvalue."""


class EigensolverFailure(RBSweepError):
    """Generalized eigensolver returned a pair whose residual exceeds tolerance."""


class AtResonance(RBSweepError):
    """Modal expansion requested exactly at a retained resonant frequency."""


class ReducedSingular(RBSweepError):
    """Reduced pencil is singular at the requested frequency."""


class ZeroVector(RBSweepError):
    """Operation requires a nonzero vector."""


class ResonantBound(RBSweepError):
    """Inf-sup constant is numerically zero; the classical bound is undefined here."""


class DivisionByZeroTrueError(RBSweepError):
    """Effectivity undefined: the true-error indicator is zero."""


class InvalidPort(RBSweepError):
    """Excitation node lies outside the interior node range."""


class ParseError(RBSweepError):
    """Model or data file could not be parsed."""


class DimensionMismatch(RBSweepError):
    """Matrix and vector dimensions are inconsistent."""


class NotSymmetric(RBSweepError):
    """Imported stiffness or mass matrix fails the symmetry check."""


class MassNotPositiveDefinite(RBSweepError):
    """Imported mass matrix has a non-positive eigenvalue."""
