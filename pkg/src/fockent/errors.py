"""Exception hierarchy. Everything raised on bad physics input derives from ``FockentError``."""


class FockentError(ValueError):
    """Base class for domain errors (bad modes, invalid states, broken preconditions)."""


class ModeError(FockentError):
    """Unknown, duplicate or malformed mode label."""


class ZeroNormError(FockentError):
    """A construction produced the zero vector (e.g. a Pauli-violating product)."""


class NormalizationError(FockentError):
    """An operation that needs a normalized state received an unnormalized one."""


class SystemMismatchError(FockentError):
    """Two states or operators live on different Fock spaces."""


class InvalidDensityMatrix(FockentError):
    """Non-Hermitian, non-unit-trace or significantly negative density matrix."""


class SectorError(FockentError):
    """State not confined to the particle-number sector an operation requires."""


class SymmetryError(FockentError):
    """Coefficient matrix with the wrong exchange symmetry for its statistics."""


class DestroyedStateError(FockentError):
    """Constructed state has (numerically) vanishing norm before normalization."""
