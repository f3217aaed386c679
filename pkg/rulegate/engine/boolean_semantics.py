"""
Exact Boolean semantics of rule graphs.

These functions produce the hard truth of every node for given concept
labels. They supply gate supervision targets and the pseudo-anomaly label.
"""

from typing import Sequence

import numpy as np

from rulegate.models.rule_graph import RuleGraph
from rulegate.utils.converters import as_matrix
from rulegate.utils.enums import OpCode


def hard_op(op_code: int, vals: Sequence[int]) -> int:
    """
    Truth of an operator over child truths.

    Total over all inputs: AND of nothing is 1, OR of nothing is 0, IFF of
    nothing is 1, IMPLIES with other than 2 operands is 1 and an unknown
    operator code is 0.
    """
    vals = [int(bool(v)) for v in vals]
    if op_code == OpCode.IFF:
        return int(all(v == vals[0] for v in vals[1:])) if vals else 1
    if op_code == OpCode.IMPLIES:
        if len(vals) != 2:
            return 1
        a, b = vals
        return int((1 - a) or b)
    if op_code == OpCode.AND:
        return int(all(vals))
    if op_code == OpCode.OR:
        return int(any(vals))
    return 0


def hard_op_vec(op_code: int, vals: np.ndarray) -> np.ndarray:
    """
    Row-wise ``hard_op`` over a [M x a] matrix of child truths.

    Returns:
        uint8 vector of length M.
    """
    vals = np.asarray(vals).astype(bool)
    rows, arity = vals.shape
    if op_code == OpCode.IFF:
        if arity == 0:
            return np.ones(rows, dtype=np.uint8)
        return np.all(vals == vals[:, :1], axis=1).astype(np.uint8)
    if op_code == OpCode.IMPLIES:
        if arity != 2:
            return np.ones(rows, dtype=np.uint8)
        return (~vals[:, 0] | vals[:, 1]).astype(np.uint8)
    if op_code == OpCode.AND:
        return np.all(vals, axis=1).astype(np.uint8)
    if op_code == OpCode.OR:
        return np.any(vals, axis=1).astype(np.uint8)
    return np.zeros(rows, dtype=np.uint8)


def folded_child_truths(graph: RuleGraph, node: int, truths: np.ndarray) -> np.ndarray:
    """
    Child truths of a node with edge negation applied, in operand order.

    Args:
        graph: Rule graph.
        node: Operator node id.
        truths: [M x nodes] truth matrix.

    Returns:
        [M x arity] uint8 matrix.
    """
    columns = []
    for edge in graph.in_edges(node):
        column = truths[:, edge.src].astype(np.uint8)
        columns.append(1 - column if edge.negated else column)
    if not columns:
        return np.zeros((truths.shape[0], 0), dtype=np.uint8)
    return np.stack(columns, axis=1)


def propagate_hard_truths_batch(graph: RuleGraph, labels: np.ndarray) -> np.ndarray:
    """
    Hard truth of every node for every row of a label matrix.

    Args:
        graph: Rule graph whose concept ids index columns of labels (id 1 is
            column 0).
        labels: [M x N] 0/1 matrix (a single vector is treated as one row).

    Returns:
        [M x nodes] uint8 truth matrix.
    """
    labels = as_matrix(labels, dtype=np.uint8)
    truths = np.zeros((labels.shape[0], len(graph)), dtype=np.uint8)
    for level in graph.topo_levels():
        for v in level:
            node = graph.nodes[v]
            if node.is_leaf:
                truths[:, v] = labels[:, node.concept_id - 1]
            else:
                truths[:, v] = hard_op_vec(
                    node.op_code, folded_child_truths(graph, v, truths)
                )
    return truths


def propagate_hard_truths(graph: RuleGraph, y: Sequence[int]) -> np.ndarray:
    """Hard truth of every node for one label vector."""
    return propagate_hard_truths_batch(graph, np.asarray(y)[None, :])[0]


def rule_truth(graph: RuleGraph, y: Sequence[int]) -> int:
    """Truth of the rule (its root) for one label vector."""
    return int(propagate_hard_truths(graph, y)[graph.root])


def rule_truths_batch(graph: RuleGraph, labels: np.ndarray) -> np.ndarray:
    """Root truth for every row of a label matrix."""
    return propagate_hard_truths_batch(graph, labels)[:, graph.root]


def anomaly_labels_batch(rules: Sequence[RuleGraph], labels: np.ndarray) -> np.ndarray:
    """
    Pseudo-anomaly label per row: 1 when any rule is violated.

    Raises:
        ValueError: If no rules are given.
    """
    if not rules:
        raise ValueError("anomaly label needs at least one rule")
    truths = np.stack([rule_truths_batch(g, labels) for g in rules], axis=1)
    return (truths.min(axis=1) == 0).astype(np.uint8)


def anomaly_label(rules: Sequence[RuleGraph], y: Sequence[int]) -> int:
    """Pseudo-anomaly label for one label vector."""
    return int(anomaly_labels_batch(rules, np.asarray(y)[None, :])[0])
