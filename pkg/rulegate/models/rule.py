"""
Mined rule model.
"""

from dataclasses import dataclass

from rulegate.models.formula import Formula
from rulegate.utils.enums import Provenance


@dataclass(frozen=True)
class RuleStats:
    """
    Support statistics of a rule over a label matrix.

    Attributes:
        support: Number of rows where the antecedent holds.
        confidence: Fraction of those rows where the consequent holds.
        lift: confidence divided by the consequent's base rate.
    """

    support: int
    confidence: float
    lift: float

    def __post_init__(self) -> None:
        if self.support < 0:
            raise ValueError(f"support must be non-negative, got {self.support}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class MinedRule:
    """A rule together with its mining statistics and origin."""

    formula: Formula
    stats: RuleStats
    provenance: Provenance

    @property
    def text(self) -> str:
        return str(self.formula)

    def comment(self) -> str:
        """Stats comment written next to the rule in rules files."""
        return (
            f"sup={self.stats.support}, conf={self.stats.confidence:.3f}, "
            f"lift={self.stats.lift:.2f}, src={self.provenance.value}"
        )
