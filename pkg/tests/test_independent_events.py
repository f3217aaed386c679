"""
Tests for the independent-events baseline.
"""

import itertools

import numpy as np
import pytest

from rulegate import compile_formula, parse, soft_eval
from rulegate.engine.independent_events import (
    exact_independent_prob,
    indep_anomaly_score,
    indep_anomaly_scores_batch,
    soft_eval_batch,
)
from rulegate.models.formula import Formula
from rulegate.models.rule_graph import ConceptVocab
from rulegate.utils.enums import OpCode

ABCD = ConceptVocab.from_names(["a", "b", "c", "d"])


def test_implication_at_half(abc_vocab):
    """Test P(A -> B) with both marginals at 0.5."""
    graph = compile_formula(parse("A -> B"), abc_vocab)
    assert soft_eval(graph, [0.5, 0.5, 0.5]) == pytest.approx(0.75)
    assert indep_anomaly_score(graph, [0.5, 0.5, 0.5]) == pytest.approx(0.25)


def test_contradiction_treats_leaves_as_independent(abc_vocab):
    """Test that A <-> !A scores as two independent copies of A."""
    graph = compile_formula(parse("A <-> !A"), abc_vocab)
    assert soft_eval(graph, [0.3, 0.0, 0.0]) == pytest.approx(0.42)
    assert exact_independent_prob(graph, [0.3, 0.0, 0.0]) == 0.0


def test_constant_false_rule(abc_vocab):
    """Test the exact probability of an unsatisfiable rule."""
    graph = compile_formula(parse("A & !A"), abc_vocab)
    assert exact_independent_prob(graph, [0.6, 0.2, 0.9]) == 0.0


def test_deterministic_marginals_match_truth(abc_vocab):
    """Test that 0/1 marginals reproduce Boolean truth."""
    graph = compile_formula(parse("(A | B) -> !C"), abc_vocab)
    assert soft_eval(graph, [1.0, 0.0, 1.0]) == 0.0
    assert soft_eval(graph, [0.0, 0.0, 1.0]) == 1.0


@pytest.mark.parametrize(
    "rule",
    [
        "a -> b",
        "(a & !b) | c",
        "a <-> (b -> !c)",
        "!(a | b) & (c <-> d)",
        "a & b & c & d",
        "a | !b | c",
        "(a -> b) -> (c | d)",
    ],
)
def test_distinct_leaves_match_exact_probability(rule):
    """Test that the recursion is exact when every concept appears once."""
    graph = compile_formula(parse(rule), ABCD)
    rng = np.random.default_rng(17)
    for _ in range(25):
        p = rng.random(4)
        assert soft_eval(graph, p) == pytest.approx(exact_independent_prob(graph, p), abs=1e-12)


WIDE = ConceptVocab.from_names([f"v{i:02d}" for i in range(40)])


def _tree_formula(rng, fresh, depth):
    if depth == 0 or rng.random() < 0.3:
        return Formula.leaf(next(fresh))
    op = OpCode(int(rng.integers(1, 5)))
    arity = 2 if op in (OpCode.IMPLIES, OpCode.IFF) else int(rng.integers(2, 4))
    children = [
        (_tree_formula(rng, fresh, depth - 1), bool(rng.random() < 0.3)) for _ in range(arity)
    ]
    return Formula.node(op, *children)


def test_random_trees_match_exact_probability():
    """Test the recursion on random formulas that use each concept once."""
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 500:
        names = (f"v{i:02d}" for i in itertools.count())
        formula = _tree_formula(rng, names, 4)
        if formula.is_leaf or len(list(formula.leaves())) > 10:
            continue
        graph = compile_formula(formula, WIDE)
        p = rng.random(len(WIDE))
        assert soft_eval(graph, p) == pytest.approx(exact_independent_prob(graph, p), abs=1e-12)
        checked += 1


def test_batch_matches_single_rows():
    """Test batch and single-row evaluation agree."""
    graph = compile_formula(parse("a -> (b | !c)"), ABCD)
    probs = np.random.default_rng(2).random((10, 4))
    batch = soft_eval_batch(graph, probs)
    assert batch.shape == (10, len(graph))
    scores = indep_anomaly_scores_batch(graph, probs)
    for row, score in zip(probs, scores):
        assert score == pytest.approx(indep_anomaly_score(graph, row))


def test_scores_are_probabilities():
    """Test that every node value lies in [0, 1]."""
    graph = compile_formula(parse("(a <-> !b) & (c | d) -> a"), ABCD)
    probs = np.random.default_rng(4).random((50, 4))
    values = soft_eval_batch(graph, probs)
    assert np.all((values >= 0.0) & (values <= 1.0))


def test_implication_score_falls_with_consequent(abc_vocab):
    """Test that raising P(B) lowers the anomaly score of A -> B."""
    graph = compile_formula(parse("A -> B"), abc_vocab)
    scores = [indep_anomaly_score(graph, [0.8, pb, 0.0]) for pb in (0.1, 0.5, 0.9)]
    assert scores[0] > scores[1] > scores[2]


def test_exact_probability_concept_limit():
    """Test that exact enumeration refuses more than 16 concepts."""
    names = [f"c{i}" for i in range(17)]
    vocab = ConceptVocab.from_names(names)
    graph = compile_formula(parse(" & ".join(names)), vocab)
    with pytest.raises(ValueError, match="at most 16"):
        exact_independent_prob(graph, np.full(17, 0.5))
