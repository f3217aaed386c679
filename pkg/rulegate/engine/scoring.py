"""
Inference with trained gates: root satisfaction, antecedent-gated violation
scores, aggregation across rules and top-k attribution.
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import gmean

from rulegate.engine.gate_training import propagate_gates_batch
from rulegate.engine.leaf_training import concept_probs_batch, encode_batch
from rulegate.models.leaf_bank import LeafBank
from rulegate.models.report import RuleScore
from rulegate.models.rule_graph import RuleGraph
from rulegate.models.run_config import ScoringConfig
from rulegate.models.subtree_gate import GateSet
from rulegate.utils.converters import as_matrix
from rulegate.utils.enums import Aggregation, OpCode

logger = logging.getLogger(__name__)


def predict_nodes_batch(
    graph: RuleGraph, z: np.ndarray, leaf_probs: np.ndarray, gates: GateSet
) -> np.ndarray:
    """
    Truth probability of every node, shape [M x nodes].

    Raises:
        MissingGateError: If an internal node has no gate.
    """
    return propagate_gates_batch(graph, z, leaf_probs, gates)[1]


def predict_root_batch(
    graph: RuleGraph, z: np.ndarray, leaf_probs: np.ndarray, gates: GateSet
) -> np.ndarray:
    return predict_nodes_batch(graph, z, leaf_probs, gates)[:, graph.root]


def predict_root(
    graph: RuleGraph, z: Sequence[float], p: Sequence[float], gates: GateSet
) -> float:
    """Root satisfaction probability for one embedding and concept-probability vector."""
    return float(
        predict_root_batch(
            graph,
            np.asarray(z, dtype=np.float64)[None, :],
            np.asarray(p, dtype=np.float64)[None, :],
            gates,
        )[0]
    )


def antecedent_probs(graph: RuleGraph, node_truths: np.ndarray) -> Optional[np.ndarray]:
    """
    Antecedent probability of an implication rule per row.

    The antecedent is the operand in slot 0 of an IMPLIES root; a negated edge
    uses ``1 - t``. Returns None for rules whose root is not an implication.
    """
    root = graph.nodes[graph.root]
    if root.is_leaf or root.op is not OpCode.IMPLIES:
        return None
    edge = graph.in_edges(graph.root)[0]
    values = as_matrix(node_truths)[:, edge.src]
    return 1.0 - values if edge.negated else values


def gate_factor(antecedent: Union[float, np.ndarray], tau: float) -> np.ndarray:
    """
    ``max(0, a - tau) / (1 - tau)``.

    Raises:
        ValueError: If tau is outside [0, 1).
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must be in [0, 1), got {tau}")
    return np.maximum(0.0, np.asarray(antecedent, dtype=np.float64) - tau) / (1.0 - tau)


def violation_scores_batch(
    graph: RuleGraph,
    node_truths: np.ndarray,
    tau: float = 0.0,
    gate_antecedent: bool = True,
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """
    Violation score per row from node truth probabilities.

    Returns:
        (violation, satisfaction, antecedent); antecedent is None when the
        score is not gated.
    """
    node_truths = as_matrix(node_truths)
    satisfaction = node_truths[:, graph.root]
    violation = 1.0 - satisfaction
    antecedent = antecedent_probs(graph, node_truths) if gate_antecedent else None
    if antecedent is not None:
        violation = gate_factor(antecedent, tau) * violation
    elif not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must be in [0, 1), got {tau}")
    return violation, satisfaction, antecedent


def violation_score(
    graph: RuleGraph,
    z: Sequence[float],
    p: Sequence[float],
    gates: GateSet,
    tau: float = 0.0,
    antecedent: bool = True,
    rule_id: int = 0,
) -> RuleScore:
    """
    Violation score of one rule for one input.

    Implication rules are gated by their antecedent probability; other rules
    score ``1 - t_root``.

    Raises:
        ValueError: If tau is outside [0, 1).
    """
    truths = predict_nodes_batch(
        graph,
        np.asarray(z, dtype=np.float64)[None, :],
        np.asarray(p, dtype=np.float64)[None, :],
        gates,
    )
    violation, satisfaction, ante = violation_scores_batch(graph, truths, tau, antecedent)
    return RuleScore(
        rule_id=rule_id,
        satisfaction=float(satisfaction[0]),
        violation=float(violation[0]),
        antecedent=None if ante is None else float(ante[0]),
        gated=ante is not None,
    )


def aggregate_batch(
    scores: np.ndarray,
    mode: Union[Aggregation, str],
    satisfaction: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Row-wise aggregation of an [M x R] violation-score matrix.

    ``min`` aggregates satisfaction: ``1 - min_r t_r``. When satisfaction is
    not given it is taken as ``1 - score``.

    Raises:
        ValueError: If there are no rules.
    """
    scores = as_matrix(scores)
    if scores.shape[1] == 0:
        raise ValueError("Cannot aggregate an empty score set")
    mode = Aggregation(mode)
    if mode is Aggregation.Max:
        return scores.max(axis=1)
    if mode is Aggregation.Mean:
        return scores.mean(axis=1)
    if mode is Aggregation.Geo:
        with np.errstate(divide="ignore"):
            return gmean(scores, axis=1)
    sat = 1.0 - scores if satisfaction is None else as_matrix(satisfaction)
    return 1.0 - sat.min(axis=1)


def aggregate(
    scores: Sequence[Union[float, RuleScore]], mode: Union[Aggregation, str]
) -> float:
    """
    Aggregate one input's rule scores into an anomaly score.

    Raises:
        ValueError: If scores is empty.
    """
    if len(scores) == 0:
        raise ValueError("Cannot aggregate an empty score set")
    if all(isinstance(s, RuleScore) for s in scores):
        violation = [s.violation for s in scores]  # type: ignore[union-attr]
        satisfaction = [s.satisfaction for s in scores]  # type: ignore[union-attr]
        return float(aggregate_batch(np.array([violation]), mode, np.array([satisfaction]))[0])
    return float(aggregate_batch(np.array([scores], dtype=np.float64), mode)[0])


def attribute_topk(scores: Sequence[float], k: int) -> List[int]:
    """
    Rule ids ranked by descending score, ties by ascending id.

    Raises:
        ValueError: If k < 1.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    order = sorted(range(len(scores)), key=lambda r: (-float(scores[r]), r))
    return order[:k]


def score_rules_batch(
    graphs: Sequence[RuleGraph],
    gate_sets: Sequence[GateSet],
    bank: LeafBank,
    features: np.ndarray,
    cfg: Optional[ScoringConfig] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Violation and satisfaction matrices [M x R] for raw feature rows.
    """
    cfg = cfg or ScoringConfig()
    z = encode_batch(bank, features)
    probs = concept_probs_batch(bank, features)
    violations, satisfactions = [], []
    for graph, gates in zip(graphs, gate_sets):
        truths = predict_nodes_batch(graph, z, probs, gates)
        violation, satisfaction, _ = violation_scores_batch(
            graph, truths, cfg.tau, cfg.gate_antecedent
        )
        violations.append(violation)
        satisfactions.append(satisfaction)
    logger.debug(f"Scored {z.shape[0]} rows against {len(graphs)} rule(s)")
    return np.stack(violations, axis=1), np.stack(satisfactions, axis=1)
