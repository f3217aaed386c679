"""
Exception types raised by rulegate.

Each concrete error also derives from the built-in exception callers would
expect for the same condition, so ``except ValueError`` keeps working.
"""


class RuleGateError(Exception):
    """Base class for all rulegate errors."""


class FormulaSyntaxError(RuleGateError, ValueError):
    """
    Raised when rule text does not match the DSL grammar.

    Attributes:
        offset: Byte offset (UTF-8) into the source text where parsing failed.
    """

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at byte {offset}")
        self.message = message
        self.offset = offset


class UnknownConceptError(RuleGateError, KeyError):
    """Raised when a rule mentions a concept that is not in the vocabulary."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ArityError(RuleGateError, ValueError):
    """Raised when an operator node has the wrong number of children."""


class CycleError(RuleGateError, ValueError):
    """Raised when a graph or concept hierarchy contains a cycle."""


class MissingGateError(RuleGateError, KeyError):
    """Raised when an internal node has no trained gate."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class CacheIntegrityError(RuleGateError, ValueError):
    """Raised when a stored blob fails its checksum or has a bad header."""


class InfeasibleSpecError(RuleGateError, ValueError):
    """Raised when a synthetic spec rejects almost every sampled row."""


class DimensionError(RuleGateError, ValueError):
    """Raised when array shapes do not match the model dimensions."""
