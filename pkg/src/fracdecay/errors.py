from __future__ import annotations


class FracDecayError(Exception):
    """Base class for all errors raised by :mod:`fracdecay`."""


class DomainError(FracDecayError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class AccuracyError(FracDecayError, ArithmeticError):
    """A numerical method could not reach the requested accuracy.

    The best error bound that was achieved is stored in :attr:`bound`.
    """

    def __init__(self, message: str, bound: float = float("inf")) -> None:
        super().__init__(message)
        self.bound = bound


class UnboundedSupremumError(FracDecayError, ArithmeticError):
    """An envelope supremum is still increasing at the end of the search range."""


class InvariantError(FracDecayError, AssertionError):
    """A checked mathematical invariant was violated.

    ``witness`` holds a machine-readable description of the violation.
    """

    def __init__(self, message: str, witness: dict | None = None) -> None:
        super().__init__(message)
        self.witness = dict(witness or {})
