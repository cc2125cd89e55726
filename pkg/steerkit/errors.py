from __future__ import annotations


class SteerkitError(RuntimeError):
    """Base error for steerkit; `exit_code` is what the CLI returns for it."""

    exit_code: int = 1


class InputParseError(SteerkitError):
    """Raised when a state document cannot be parsed."""

    exit_code = 2


class InvariantViolationError(SteerkitError):
    """Raised when an input breaks a type invariant (norm, ordering, shape)."""

    exit_code = 3


class DimensionMismatchError(InvariantViolationError):
    pass


class NormalizationError(InvariantViolationError):
    pass


class EmptyInputError(InvariantViolationError):
    pass


class ZeroProbabilityError(SteerkitError):
    """Raised when a requested outcome has zero probability on the state."""

    exit_code = 4


class NoMaxClassWeightError(ZeroProbabilityError):
    """Raised when a ket has no weight on the largest Schmidt class."""


class OffSupportError(SteerkitError):
    """Raised when steering is requested for a ket with weight off the Schmidt support."""

    exit_code = 5
