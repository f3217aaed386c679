"""
Tests for exact Boolean semantics of rule graphs.
"""

import numpy as np
import pytest

from rulegate import compile_formula, parse
from rulegate.engine.boolean_semantics import (
    anomaly_label,
    anomaly_labels_batch,
    hard_op,
    hard_op_vec,
    propagate_hard_truths,
    rule_truth,
    rule_truths_batch,
)
from rulegate.models.rule_graph import ConceptVocab
from rulegate.utils.enums import OpCode
from tests.conftest import all_assignments, evaluate_formula, random_formula


@pytest.mark.parametrize(
    "op, table",
    [
        (OpCode.IFF, [1, 0, 0, 1]),
        (OpCode.IMPLIES, [1, 1, 0, 1]),
        (OpCode.AND, [0, 0, 0, 1]),
        (OpCode.OR, [0, 1, 1, 1]),
    ],
)
def test_truth_tables(op, table):
    """Test binary truth tables in (a, b) order 00, 01, 10, 11."""
    pairs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [hard_op(op, pair) for pair in pairs] == table
    assert hard_op_vec(op, np.array(pairs)).tolist() == table


def test_degenerate_arities():
    """Test that hard_op is total."""
    assert hard_op(OpCode.IFF, []) == 1
    assert hard_op(OpCode.AND, []) == 1
    assert hard_op(OpCode.OR, []) == 0
    assert hard_op(OpCode.IMPLIES, [1]) == 1
    assert hard_op(OpCode.IMPLIES, [1, 0, 0]) == 1
    assert hard_op(OpCode.IFF, [1, 1, 1]) == 1
    assert hard_op(OpCode.IFF, [1, 1, 0]) == 0
    assert hard_op(99, [1, 1]) == 0


def test_degenerate_arities_vectorized():
    """Test the row-wise operator on empty operand lists."""
    empty = np.zeros((3, 0), dtype=np.uint8)
    assert hard_op_vec(OpCode.IFF, empty).tolist() == [1, 1, 1]
    assert hard_op_vec(OpCode.AND, empty).tolist() == [1, 1, 1]
    assert hard_op_vec(OpCode.OR, empty).tolist() == [0, 0, 0]
    assert hard_op_vec(OpCode.IMPLIES, empty).tolist() == [1, 1, 1]


def test_implication_node_truths(abc_vocab):
    """Test per-node truths of A -> B."""
    graph = compile_formula(parse("A -> B"), abc_vocab)
    assert propagate_hard_truths(graph, [1, 0, 0]).tolist() == [1, 0, 0]
    assert propagate_hard_truths(graph, [1, 1, 0]).tolist() == [1, 1, 1]
    assert rule_truth(graph, [0, 0, 1]) == 1


def test_contradiction_is_never_satisfied(abc_vocab):
    """Test that A <-> !A is false on every row."""
    graph = compile_formula(parse("A <-> !A"), abc_vocab)
    assert rule_truths_batch(graph, all_assignments(3)).tolist() == [0] * 8


def test_single_vector_is_one_row(abc_vocab):
    """Test that a label vector is accepted by the batch form."""
    graph = compile_formula(parse("A & C"), abc_vocab)
    assert rule_truths_batch(graph, np.array([1, 0, 1])).tolist() == [1]


def test_random_formulas_match_direct_evaluation():
    """Test compiled semantics against recursive evaluation of the formula."""
    rng = np.random.default_rng(5)
    names = ["a", "b", "c", "d"]
    vocab = ConceptVocab.from_names(names)
    assignments = all_assignments(len(names))
    for _ in range(1000):
        formula = random_formula(rng, names, max_depth=4)
        graph = compile_formula(formula, vocab)
        expected = [
            evaluate_formula(formula, dict(zip(names, row))) for row in assignments
        ]
        assert rule_truths_batch(graph, assignments).tolist() == expected


def test_anomaly_label(abc_vocab):
    """Test that a row is anomalous when any rule is violated."""
    rules = [
        compile_formula(parse("A -> B"), abc_vocab),
        compile_formula(parse("B -> C"), abc_vocab),
    ]
    assert anomaly_label(rules, [0, 0, 0]) == 0
    assert anomaly_label(rules, [1, 1, 1]) == 0
    assert anomaly_label(rules, [1, 0, 0]) == 1
    assert anomaly_label(rules, [0, 1, 0]) == 1
    labels = all_assignments(3)
    expected = [int(not ((1 - a or b) and (1 - b or c))) for a, b, c in labels]
    assert anomaly_labels_batch(rules, labels).tolist() == expected


def test_anomaly_label_is_monotone_in_rules(abc_vocab):
    """Test that adding a rule never clears an anomaly label."""
    labels = all_assignments(3)
    one = [compile_formula(parse("A -> B"), abc_vocab)]
    two = one + [compile_formula(parse("C | !A"), abc_vocab)]
    assert np.all(anomaly_labels_batch(two, labels) >= anomaly_labels_batch(one, labels))


def test_anomaly_label_needs_rules():
    """Test the empty rule set."""
    with pytest.raises(ValueError, match="at least one rule"):
        anomaly_labels_batch([], np.zeros((2, 3)))
