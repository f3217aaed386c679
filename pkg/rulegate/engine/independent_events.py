"""
Independent-events baseline.

Each node's satisfaction probability is computed from its children's as if
the operands were independent events. The recursion is node-local, so a
concept that appears in several leaves is treated as independent copies.
"""

import itertools
from typing import Sequence

import numpy as np

from rulegate.config import MAX_EXACT_CONCEPTS
from rulegate.engine.boolean_semantics import rule_truths_batch
from rulegate.models.rule_graph import RuleGraph
from rulegate.utils.converters import as_matrix
from rulegate.utils.enums import OpCode


def soft_op_vec(op_code: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Probability that ``op(a, b)`` holds for independent operands."""
    if op_code == OpCode.IFF:
        return a * b + (1.0 - a) * (1.0 - b)
    if op_code == OpCode.IMPLIES:
        return 1.0 - a * (1.0 - b)
    if op_code == OpCode.AND:
        return a * b
    if op_code == OpCode.OR:
        return a + b - a * b
    return np.zeros_like(a)


def soft_eval_batch(graph: RuleGraph, probs: np.ndarray) -> np.ndarray:
    """
    Satisfaction probability of every node for every row.

    Args:
        graph: Rule graph.
        probs: [M x N] concept probabilities (a single vector is one row).

    Returns:
        [M x nodes] probability matrix.
    """
    probs = as_matrix(probs)
    out = np.zeros((probs.shape[0], len(graph)), dtype=np.float64)
    for level in graph.topo_levels():
        for v in level:
            node = graph.nodes[v]
            if node.is_leaf:
                out[:, v] = probs[:, node.concept_id - 1]
                continue
            left, right = (
                1.0 - out[:, e.src] if e.negated else out[:, e.src]
                for e in graph.in_edges(v)
            )
            out[:, v] = soft_op_vec(node.op_code, left, right)
    return np.clip(out, 0.0, 1.0)


def soft_eval(graph: RuleGraph, p: Sequence[float]) -> float:
    """Satisfaction probability of the rule for one probability vector."""
    return float(soft_eval_batch(graph, np.asarray(p, dtype=np.float64)[None, :])[0, graph.root])


def indep_anomaly_scores_batch(graph: RuleGraph, probs: np.ndarray) -> np.ndarray:
    """Per-row anomaly score ``1 - P(rule)``."""
    return 1.0 - soft_eval_batch(graph, probs)[:, graph.root]


def indep_anomaly_score(graph: RuleGraph, p: Sequence[float]) -> float:
    """Anomaly score ``1 - P(rule)`` for one probability vector."""
    return 1.0 - soft_eval(graph, p)


def exact_independent_prob(graph: RuleGraph, p: Sequence[float]) -> float:
    """
    Exact probability that the rule holds when concepts are independent.

    Sums the rule truth over every assignment of the rule's distinct concepts,
    weighted by its probability. Shared leaves are handled correctly, unlike
    ``soft_eval``.

    Raises:
        ValueError: If the rule uses more than 16 distinct concepts.
    """
    p = np.asarray(p, dtype=np.float64)
    concept_ids = graph.concept_ids()
    if len(concept_ids) > MAX_EXACT_CONCEPTS:
        raise ValueError(
            f"Exact enumeration supports at most {MAX_EXACT_CONCEPTS} concepts, "
            f"rule uses {len(concept_ids)}"
        )
    columns = [c - 1 for c in concept_ids]
    assignments = np.array(
        list(itertools.product((0, 1), repeat=len(columns))), dtype=np.uint8
    )

    labels = np.zeros((assignments.shape[0], len(p)), dtype=np.uint8)
    labels[:, columns] = assignments
    marginals = p[columns]
    weights = np.prod(
        np.where(assignments == 1, marginals, 1.0 - marginals), axis=1
    )
    return float(np.sum(weights * rule_truths_batch(graph, labels)))
