"""
This module provides enumerations for operators, training modes and rule provenance.
"""

from enum import Enum, IntEnum


class OpCode(IntEnum):
    """
    Operator codes stored on internal rule-graph nodes.

    IFF: all children equal
    IMPLIES: ordered, antecedent first
    AND: conjunction
    OR: disjunction
    """

    IFF = 1
    IMPLIES = 2
    AND = 3
    OR = 4

    @property
    def symbol(self) -> str:
        """Infix symbol used by the rule DSL."""
        return _SYMBOLS[self]

    @property
    def is_commutative(self) -> bool:
        return self is not OpCode.IMPLIES

    @classmethod
    def from_symbol(cls, symbol: str) -> "OpCode":
        for op, sym in _SYMBOLS.items():
            if sym == symbol:
                return op
        raise ValueError(f"Unknown operator symbol '{symbol}'")


_SYMBOLS = {
    OpCode.IFF: "<->",
    OpCode.IMPLIES: "->",
    OpCode.AND: "&",
    OpCode.OR: "|",
}


class NodeKind(str, Enum):
    """Kind of a formula node."""

    Leaf = "leaf"
    Op = "op"


class TrainMode(str, Enum):
    """
    Which operand pairs a gate is trained on.

    SEM: same-image pairs only
    ChimerasOnly: cross-sample (chimera) pairs only
    Mixed: same-image and chimera pairs, 1:1
    AdStrictMixed: same-image pairs whose full rule holds, plus chimera pairs
    """

    SEM = "sem"
    ChimerasOnly = "chimeras_only"
    Mixed = "mixed"
    AdStrictMixed = "ad_strict_mixed"

    @property
    def uses_same_image(self) -> bool:
        return self is not TrainMode.ChimerasOnly

    @property
    def uses_chimeras(self) -> bool:
        return self is not TrainMode.SEM


class Aggregation(str, Enum):
    """Rule aggregation statistics for the overall anomaly score."""

    Max = "max"
    Mean = "mean"
    Geo = "geo"
    Min = "min"


class Provenance(str, Enum):
    """Where a rule came from."""

    PairwisePos = "pairwise-pos"
    PairwiseNeg = "pairwise-neg"
    Compound = "compound"
    Handwritten = "handwritten"


class Split(str, Enum):
    """Synthetic dataset split."""

    Train = "train"
    Eval = "eval"


class Method(str, Enum):
    """Rule evaluators compared by the experiment harness."""

    IndepProb = "indep"
    SEM = "sem"
    MonoN = "mono_n"
    MonoC = "mono_c"
    Neural = "neural"

    @property
    def column(self) -> str:
        """Report column header."""
        return _COLUMNS[self]


_COLUMNS = {
    Method.IndepProb: "Indep.",
    Method.SEM: "SEM",
    Method.MonoN: "Mono-N",
    Method.MonoC: "Mono-C",
    Method.Neural: "Neur. Eval.",
}
