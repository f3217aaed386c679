"""
Formula model: the symbolic expression tree of a rule.

A Formula is either a leaf naming a concept or an operator node whose children
are (Formula, negated) pairs. All negation lives on child edges; a rule that is
negated as a whole is an AND node with a single negated child.
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from rulegate.errors import ArityError
from rulegate.utils.enums import NodeKind, OpCode

Child = Tuple["Formula", bool]


@dataclass(frozen=True)
class Formula:
    """
    Immutable Boolean expression tree over named concepts.

    Equality is structural: two formulas are equal when their kinds, names,
    operators, child order and edge negations all match.

    Attributes:
        kind: NodeKind.Leaf or NodeKind.Op.
        name: Concept name for leaves, None for operators.
        op: Operator code for operator nodes, None for leaves.
        children: Ordered (child, negated) pairs.
    """

    kind: NodeKind
    name: Optional[str] = None
    op: Optional[OpCode] = None
    children: Tuple[Child, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind is NodeKind.Leaf:
            if not self.name:
                raise ValueError("Leaf formula requires a non-empty concept name")
            if self.op is not None or self.children:
                raise ValueError("Leaf formula cannot carry an operator or children")
            return

        if self.op is None:
            raise ValueError("Operator formula requires an op code")
        object.__setattr__(self, "op", OpCode(self.op))
        object.__setattr__(
            self, "children", tuple((child, bool(neg)) for child, neg in self.children)
        )
        if self.op is OpCode.IMPLIES and len(self.children) != 2:
            raise ArityError(
                f"IMPLIES requires exactly 2 children, got {len(self.children)}"
            )
        if not self.children:
            raise ArityError(f"{self.op.name} requires at least one child")

    @classmethod
    def leaf(cls, name: str) -> "Formula":
        """Create a leaf formula for a concept name."""
        return cls(kind=NodeKind.Leaf, name=name)

    @classmethod
    def node(cls, op: OpCode, *children: "Formula | Child") -> "Formula":
        """
        Create an operator formula.

        Children may be given as bare formulas (positive edges) or as
        (formula, negated) pairs.
        """
        pairs = [c if isinstance(c, tuple) else (c, False) for c in children]
        return cls(kind=NodeKind.Op, op=op, children=tuple(pairs))

    @property
    def is_leaf(self) -> bool:
        return self.kind is NodeKind.Leaf

    def concepts(self) -> List[str]:
        """Concept names in first-occurrence order, without duplicates."""
        seen: dict = {}
        for leaf in self.leaves():
            seen.setdefault(leaf.name, None)
        return list(seen)

    def leaves(self) -> Iterator["Formula"]:
        """Yield leaf nodes left to right."""
        if self.is_leaf:
            yield self
            return
        for child, _ in self.children:
            yield from child.leaves()

    def depth(self) -> int:
        """Height of the tree; a leaf has depth 0."""
        if self.is_leaf:
            return 0
        return 1 + max(child.depth() for child, _ in self.children)

    def __str__(self) -> str:
        from rulegate.writers.rule_writer import format_formula

        return format_formula(self)
