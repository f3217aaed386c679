"""
Rule mining from training labels.

Pairwise mining emits implications ``A -> B`` and exclusions ``A -> !B`` from
co-occurrence counts. Compound mining emits depth-2 consequents
``A -> (B & C)``, ``A -> (B | C)`` and ``A -> (B -> C)`` built from each
antecedent's most reliable singleton consequents.
"""

import graphlib
import logging
import warnings
from itertools import combinations, permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from rulegate.errors import CycleError
from rulegate.models.formula import Formula
from rulegate.models.rule import MinedRule, RuleStats
from rulegate.models.rule_graph import ConceptVocab
from rulegate.models.run_config import MiningConfig
from rulegate.utils.converters import as_matrix
from rulegate.utils.enums import OpCode, Provenance

logger = logging.getLogger(__name__)

Names = Union[ConceptVocab, Sequence[str]]


def _names(vocab: Names, n_concepts: int) -> Tuple[str, ...]:
    names = tuple(vocab.names) if isinstance(vocab, ConceptVocab) else tuple(vocab)
    if len(names) != n_concepts:
        raise ValueError(f"{len(names)} concept names for {n_concepts} label columns")
    return names


def _label_counts(labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = as_matrix(labels, dtype=np.int64)
    return y, y.sum(axis=0), y.T @ y


def _warn_absent(names: Sequence[str], counts: np.ndarray) -> None:
    for name, count in zip(names, counts):
        if count == 0:
            message = f"Concept '{name}' is never present in the mining labels"
            logger.warning(message)
            warnings.warn(message)


def _implies(antecedent: str, consequent: Formula, negated: bool = False) -> Formula:
    return Formula.node(OpCode.IMPLIES, Formula.leaf(antecedent), (consequent, negated))


def mine_pairwise(
    labels: np.ndarray, vocab: Names, cfg: Optional[MiningConfig] = None
) -> List[MinedRule]:
    """
    Mine pairwise implications and exclusions.

    For every ordered pair (A, B) whose antecedent reaches the support
    threshold, ``A -> B`` is emitted when ``P(B|A) >= confidence_pos`` and
    ``A -> !B`` when ``P(B|A) <= confidence_neg``. Consequents that never
    occur are skipped. Rules are ranked by distance of ``P(B|A)`` from 0.5,
    then support, then rule text, and truncated to ``max_rules``.

    Args:
        labels: [M x N] 0/1 label matrix.
        vocab: Concept names of the label columns.
        cfg: Thresholds; defaults when omitted.

    Returns:
        Ranked rules; the reported confidence of an exclusion is ``1 - P(B|A)``.
    """
    cfg = cfg or MiningConfig()
    y, counts, co = _label_counts(labels)
    n_rows, n_concepts = y.shape
    names = _names(vocab, n_concepts)
    if n_rows == 0:
        return []
    _warn_absent(names, counts)

    ranked: List[Tuple[Tuple[float, int, str], MinedRule]] = []
    for a in range(n_concepts):
        if counts[a] == 0 or counts[a] / n_rows < cfg.support_thresh:
            continue
        for b in range(n_concepts):
            if b == a or counts[b] == 0:
                continue
            conf = co[a, b] / counts[a]
            base = counts[b] / n_rows
            if conf >= cfg.confidence_pos:
                formula = _implies(names[a], Formula.leaf(names[b]))
                stats = RuleStats(int(counts[a]), float(conf), float(conf / base))
                provenance = Provenance.PairwisePos
            elif conf <= cfg.confidence_neg:
                formula = _implies(names[a], Formula.leaf(names[b]), negated=True)
                lift = (1.0 - conf) / (1.0 - base) if base < 1.0 else 0.0
                stats = RuleStats(int(counts[a]), float(1.0 - conf), float(lift))
                provenance = Provenance.PairwiseNeg
            else:
                continue
            rule = MinedRule(formula, stats, provenance)
            ranked.append(((-abs(conf - 0.5), -int(counts[a]), rule.text), rule))

    ranked.sort(key=lambda item: item[0])
    rules = [rule for _, rule in ranked[: cfg.max_rules]]
    logger.info(f"Mined {len(rules)} pairwise rule(s) from {len(ranked)} candidate(s)")
    return rules


def mine_compound(
    labels: np.ndarray, vocab: Names, cfg: Optional[MiningConfig] = None
) -> List[MinedRule]:
    """
    Mine depth-2 compound consequents per antecedent.

    For each antecedent passing the support threshold, consequent pairs are
    drawn from its ``compound_pool`` highest-confidence singleton consequents.
    ``B & C`` and ``B | C`` use unordered pairs, ``B -> C`` ordered pairs. A
    compound is kept when its hard-truth confidence over the antecedent's rows
    reaches ``compound_conf``. OR and IMPLIES consequents are dropped when a
    singleton consequent that already makes them hold (B or C, or !B for
    IMPLIES) reaches the threshold on its own. Each antecedent keeps at most
    ``per_parent_pair_limit`` compounds.

    Returns:
        Rules sorted by confidence, then support, then rule text.
    """
    cfg = cfg or MiningConfig()
    y, counts, co = _label_counts(labels)
    n_rows, n_concepts = y.shape
    names = _names(vocab, n_concepts)
    if n_rows == 0:
        return []

    rules: List[MinedRule] = []
    for a in range(n_concepts):
        if counts[a] == 0 or counts[a] / n_rows < cfg.support_thresh:
            continue
        rows = y[y[:, a] == 1].astype(bool)
        single = {b: co[a, b] / counts[a] for b in range(n_concepts) if b != a and counts[b] > 0}
        pool = sorted(single, key=lambda b: (-single[b], names[b]))[: cfg.compound_pool]
        reached = {b for b, conf in single.items() if conf >= cfg.compound_conf}
        excluded = {b for b, conf in single.items() if 1.0 - conf >= cfg.compound_conf}

        candidates: List[MinedRule] = []
        for b, c in combinations(pool, 2):
            pairs = [(OpCode.AND, rows[:, b] & rows[:, c], y[:, b] & y[:, c])]
            if b not in reached and c not in reached:
                pairs.append((OpCode.OR, rows[:, b] | rows[:, c], y[:, b] | y[:, c]))
            for op, holds, base in pairs:
                consequent = Formula.node(op, Formula.leaf(names[b]), Formula.leaf(names[c]))
                candidates.extend(_compound(names[a], consequent, holds, base, int(counts[a]), cfg))
        for b, c in permutations(pool, 2):
            if c in reached or b in excluded:
                continue
            holds = ~rows[:, b] | rows[:, c]
            base = (1 - y[:, b]) | y[:, c]
            consequent = Formula.node(OpCode.IMPLIES, Formula.leaf(names[b]), Formula.leaf(names[c]))
            candidates.extend(_compound(names[a], consequent, holds, base, int(counts[a]), cfg))

        candidates.sort(key=_compound_order)
        rules.extend(candidates[: cfg.per_parent_pair_limit])

    rules.sort(key=_compound_order)
    logger.info(f"Mined {len(rules)} compound rule(s)")
    return rules


def _compound(
    antecedent: str,
    consequent: Formula,
    holds: np.ndarray,
    base: np.ndarray,
    support: int,
    cfg: MiningConfig,
) -> List[MinedRule]:
    conf = float(np.mean(holds))
    if conf < cfg.compound_conf:
        return []
    base_rate = float(np.mean(base))
    lift = conf / base_rate if base_rate > 0.0 else 0.0
    return [MinedRule(_implies(antecedent, consequent), RuleStats(support, conf, lift), Provenance.Compound)]


def _compound_order(rule: MinedRule) -> Tuple[float, int, str]:
    return (-rule.stats.confidence, -rule.stats.support, rule.text)


def upward_closure(
    labels: np.ndarray,
    hierarchy: Mapping[Union[int, str], Sequence[Union[int, str]]],
    vocab: Optional[Names] = None,
) -> np.ndarray:
    """
    Mark every ancestor present wherever a descendant is present.

    Args:
        labels: [M x N] 0/1 label matrix (not modified).
        hierarchy: Child to parents, by column index or, with vocab, by name.
        vocab: Concept names for name-keyed hierarchies.

    Returns:
        Closed uint8 label matrix; closing twice changes nothing.

    Raises:
        CycleError: If the hierarchy has a cycle.
    """
    closed = as_matrix(labels, dtype=np.uint8).copy()
    index: Dict[Union[int, str], int] = {}
    if vocab is not None:
        index = {name: i for i, name in enumerate(_names(vocab, closed.shape[1]))}

    def column(item: Union[int, str]) -> int:
        return index[item] if isinstance(item, str) else int(item)

    parents: Dict[int, List[int]] = {}
    graph: Dict[int, set] = {}
    for child, child_parents in hierarchy.items():
        c = column(child)
        parents[c] = [column(p) for p in child_parents]
        for p in parents[c]:
            graph.setdefault(p, set()).add(c)
        graph.setdefault(c, set())

    try:
        order = list(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as e:
        raise CycleError(f"Concept hierarchy contains a cycle: {e.args[1]}") from e
    for c in order:
        for p in parents.get(c, ()):
            closed[:, p] |= closed[:, c]
    return closed
