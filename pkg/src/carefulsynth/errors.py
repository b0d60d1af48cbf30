"""Exception hierarchy shared by all modules."""


class CarefulSynthError(Exception):
    """Base class for all errors raised by this package."""


class DocumentSyntaxError(CarefulSynthError):
    """Malformed input document (JSON or LTL), with position information."""


class DocumentSemanticError(CarefulSynthError):
    """Well-formed document violating a model invariant (dangling state,
    missing successor, dimension mismatch, unknown atom, ...)."""


class LtlSyntaxError(DocumentSyntaxError):
    def __init__(self, message, position):
        super().__init__(f"at position {position}: {message}")
        self.position = position


class UnknownAtomError(CarefulSynthError):
    """A formula references an atom outside the declared alphabet."""


class CostOverflowError(CarefulSynthError):
    """A cumulative cost left the signed 64-bit range."""


class BudgetExceededError(CarefulSynthError):
    """A configurable size budget (state count, product size, BFS
    configurations) was exhausted before an answer was found."""


class UnderflowError(CarefulSynthError):
    """Lifting a history drove some resource component below zero."""

    def __init__(self, message, prefix):
        super().__init__(message)
        self.prefix = prefix


class UnsupportedObjectiveError(CarefulSynthError):
    """The objective is outside the solvable fragments and no deterministic
    parity automaton was supplied for it."""


class MalformedProfileError(CarefulSynthError):
    """A strategy-profile certificate is structurally broken."""
