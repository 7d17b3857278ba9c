"""Exception types shared across the library.

Every error raised on purpose derives from DilatiaError so the CLI can map
the whole family onto its "spec/domain error" exit code.
"""


class DilatiaError(Exception):
    """Base class for all library errors."""


class SpecError(DilatiaError):
    """Malformed or unresolvable space / family / action specification."""


class DomainError(DilatiaError):
    """A point lies outside the universe an oracle is defined on."""


class PreconditionError(DilatiaError):
    """An operation's stated precondition does not hold."""


class NonConvergenceError(DilatiaError):
    """An iterative limit witness failed to stabilize within its budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class HypothesisViolationError(DilatiaError):
    """A hypothesis a construction relies on fails on the sample."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DecompositionError(DilatiaError):
    """Radial decomposition could not be carried out."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
