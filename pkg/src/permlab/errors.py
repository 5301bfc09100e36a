"""Exception hierarchy shared by all permlab modules.

Every error carries a short machine-readable code (the class name) that the
CLI maps onto its JSON error envelope and exit status.
"""


class PermlabError(Exception):
    """Base class for all permlab-specific errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InputFormat(PermlabError):
    """Malformed or inconsistent input data (matrix JSON, scalar strings, ...)."""


class EmptySupport(PermlabError):
    """No permutation has positive weight; the standing positivity assumption fails."""


class SizeGuard(PermlabError):
    """Requested computation exceeds the guarded problem-size envelope."""


class SizeMismatch(PermlabError):
    """Row and column index sets of a sub-matrix have different cardinality."""


class InvalidPeel(PermlabError):
    """The permutation cannot be peeled off: some selected cell is zero, or M < 2."""


class DimensionMismatch(PermlabError):
    """Operands have incompatible dimensions."""


class SupportViolation(PermlabError):
    """A doubly stochastic point puts mass where the weight matrix is zero."""


class NonIntegral(PermlabError):
    """A value that must be an integer (e.g. fraction*M) is not."""


class NoConvergence(PermlabError):
    """An iterative solver did not reach its tolerance within max_iter."""
