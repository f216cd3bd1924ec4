"""Exception types raised across the package."""


class InvalidStateError(ValueError):
    """A state or density matrix violates normalization, Hermiticity or positivity."""


class DegenerateStateError(InvalidStateError):
    """A superposition or projection has (numerically) zero norm."""


class TruncationError(RuntimeError):
    """The Fock cutoff is too small for the requested accuracy."""


class FilterAnnihilationError(DegenerateStateError):
    """The orthogonality filter rejects every component of the state."""


class OracleMismatchError(RuntimeError):
    """An internal cross-check between two independent computations failed."""
