"""Exception hierarchy shared by the library and the CLI."""


class ChebyError(Exception):
    """Base class for all errors raised by :mod:`cheby`."""


class InstanceError(ChebyError, ValueError):
    """Malformed input: dimension mismatch, invalid parameters, empty sets."""


class PreconditionError(InstanceError):
    """An operation was called outside the region where its guarantee holds."""


class CapabilityError(ChebyError):
    """The request exceeds a desk-scale guard (dimension, grid size)."""


class SolverError(ChebyError, RuntimeError):
    """A numerical sub-solve failed in a way that violates a type invariant."""
