"""Exception hierarchy shared by all mmsim modules."""

from __future__ import annotations


class MMSError(ValueError):
    """Base class for every error raised by mmsim."""


class LabelCollisionError(MMSError):
    """Two registers that must be disjoint share a qubit label."""


class DimensionError(MMSError):
    """Operator side or amplitude count does not match the register."""


class ValidationError(MMSError):
    """A value violates a numeric invariant (normalisation, hermiticity, ...)."""


class RegisterSizeError(MMSError):
    """The dense register would exceed the configured qubit cap."""


class AncillaNotFreshError(MMSError):
    """An ancilla expected in |0> is not."""


class DegenerateInputError(MMSError):
    """The input carries no information to extract (S_0 == 0)."""


class InsufficientDataError(MMSError):
    """Too few usable points to fit a characteristic number."""


class ZeroProbabilityError(MMSError):
    """Conditioning on a branch that never occurs."""


class SpecError(MMSError):
    """Problem in a history-spec document, located by line and column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SpecSyntaxError(SpecError):
    """Malformed directive: unknown keyword, bad arity, bad literal."""


class SpecSemanticError(SpecError):
    """Well-formed directive that refers to something invalid."""
