"""Exception hierarchy shared by all modules."""


class HermPowerError(Exception):
    """Base class for all library errors."""


class StructuralError(HermPowerError, ValueError):
    """Malformed sparse storage (unsorted or duplicate indices, bad shapes)."""


class HermiticityError(HermPowerError, ValueError):
    """A matrix expected to be Hermitian has an unmatched conjugate pair."""


class PreconditionError(HermPowerError, ValueError):
    """An operation was called outside its documented domain."""


class NonHermitianMethodError(PreconditionError):
    """A quantum-walk or Hamiltonian-simulation method received a non-Hermitian matrix.

    Powering general sparse matrices cannot be fast-forwarded: a matrix-powering
    instance built from an N-bit parity chain would otherwise compute parity in
    fewer than N/2 oracle queries. Such matrices are served only by the classical
    baselines (``dense`` and ``montecarlo``).
    """


class ParseError(HermPowerError, ValueError):
    """An input file could not be parsed."""
