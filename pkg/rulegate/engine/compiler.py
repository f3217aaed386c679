"""
Compile formulas into binary rule graphs.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

from rulegate.errors import ArityError
from rulegate.models.formula import Formula
from rulegate.models.rule_graph import ConceptVocab, GraphEdge, GraphNode, RuleGraph
from rulegate.utils.enums import OpCode


@dataclass(frozen=True)
class _Binary:
    """Binarized subtree awaiting node-id assignment."""

    concept_id: int = 0
    op: Optional[OpCode] = None
    children: Tuple[Tuple["_Binary", bool], ...] = ()

    @property
    def key(self) -> str:
        """Structural key used to order commutative operands."""
        if self.op is None:
            return f"LEAF({self.concept_id})"
        parts = [("!" if neg else "") + child.key for child, neg in self.children]
        return f"{self.op.name}({','.join(parts)})"


def compile_formula(formula: Formula, vocab: ConceptVocab) -> RuleGraph:
    """
    Compile a formula into a rule graph.

    Leaves map to concept ids, n-ary AND/OR are left-folded into binary nodes
    and a single-child operator repeats its child on both operand slots.
    Commutative operands are ordered by structural key, then by negation.
    Node ids follow a post-order walk, so children precede parents and the
    root is the last node.

    Args:
        formula: Parsed rule.
        vocab: Concept vocabulary the rule is written against.

    Returns:
        The compiled graph.

    Raises:
        UnknownConceptError: If the rule names a concept outside the vocabulary.
        ArityError: For IMPLIES without exactly 2 operands or IFF with more than 2.
    """
    tree = _binarize(formula, vocab)
    nodes: List[GraphNode] = []
    edges: List[GraphEdge] = []
    root = _emit(tree, nodes, edges)
    graph = RuleGraph(tuple(nodes), tuple(edges), root)
    graph.validate(len(vocab))
    return graph


def _binarize(formula: Formula, vocab: ConceptVocab) -> _Binary:
    if formula.is_leaf:
        return _Binary(concept_id=vocab.id_of(formula.name))

    op = formula.op
    children = [(_binarize(child, vocab), neg) for child, neg in formula.children]
    if op is OpCode.IMPLIES:
        if len(children) != 2:
            raise ArityError(f"IMPLIES requires exactly 2 operands, got {len(children)}")
        return _Binary(op=op, children=tuple(children))
    if op is OpCode.IFF and len(children) > 2:
        raise ArityError(f"IFF supports at most 2 operands, got {len(children)}")
    if len(children) == 1:
        children = children * 2

    # Left fold: AND(a, b, c) -> AND(AND(a, b), c)
    folded = _ordered(op, children[0], children[1])
    for child in children[2:]:
        folded = _ordered(op, (folded, False), child)
    return folded


def _ordered(op: OpCode, left: Tuple[_Binary, bool], right: Tuple[_Binary, bool]) -> _Binary:
    pair = sorted([left, right], key=lambda c: (c[0].key, c[1]))
    return _Binary(op=op, children=tuple(pair))


def _emit(tree: _Binary, nodes: List[GraphNode], edges: List[GraphEdge]) -> int:
    if tree.op is None:
        nodes.append(GraphNode(mask=1, concept_id=tree.concept_id))
        return len(nodes) - 1

    child_ids = [_emit(child, nodes, edges) for child, _ in tree.children]
    nodes.append(GraphNode(mask=0, op_code=int(tree.op)))
    node_id = len(nodes) - 1
    for pos, ((_, negated), child_id) in enumerate(zip(tree.children, child_ids)):
        edges.append(GraphEdge(src=child_id, dst=node_id, neg=-1 if negated else 1, pos=pos))
    return node_id
