"""
Tests for violation scoring, aggregation and attribution.
"""

import numpy as np
import pytest

from rulegate import aggregate, attribute_topk, compile_formula, parse, violation_score
from rulegate.engine.gate_training import init_gate
from rulegate.engine.neural import init_mlp
from rulegate.engine.scoring import (
    aggregate_batch,
    antecedent_probs,
    gate_factor,
    predict_root,
    score_rules_batch,
    violation_scores_batch,
)
from rulegate.models.leaf_bank import LeafBank
from rulegate.models.report import RuleScore
from rulegate.models.run_config import ScoringConfig
from rulegate.models.subtree_gate import GateSet
from rulegate.utils.enums import Aggregation
from tests.conftest import small_gate_config

Z = np.ones(3)


def _zero_gates(graph) -> GateSet:
    gates = GateSet()
    for v in graph.internal_nodes():
        gate = init_gate(3, small_gate_config(), np.random.default_rng(v))
        for array in gate.params.arrays():
            array[...] = 0.0
        gates[v] = gate
    return gates


class TestViolationScore:
    """Tests for per-rule scores."""

    def test_zero_gates_predict_half(self, abc_vocab):
        """Test the root probability through all-zero gates."""
        graph = compile_formula(parse("A -> B"), abc_vocab)
        assert predict_root(graph, Z, [0.3, 0.6, 0.1], _zero_gates(graph)) == 0.5

    def test_implication_is_gated_by_antecedent(self, abc_vocab):
        """Test antecedent gating with tau = 0."""
        graph = compile_formula(parse("A -> B"), abc_vocab)
        score = violation_score(graph, Z, [0.8, 0.1, 0.0], _zero_gates(graph), rule_id=4)
        assert score == RuleScore(
            rule_id=4, satisfaction=0.5, violation=pytest.approx(0.4), antecedent=0.8, gated=True
        )

    @pytest.mark.parametrize("tau, expected", [(0.5, 0.3), (0.8, 0.0), (0.9, 0.0), (0.2, 0.375)])
    def test_tau_thresholds_antecedent(self, abc_vocab, tau, expected):
        """Test max(0, a - tau) / (1 - tau) gating."""
        graph = compile_formula(parse("A -> B"), abc_vocab)
        score = violation_score(graph, Z, [0.8, 0.1, 0.0], _zero_gates(graph), tau=tau)
        assert score.violation == pytest.approx(expected)

    def test_negated_antecedent(self, abc_vocab):
        """Test that a negated antecedent edge gates on 1 - p."""
        graph = compile_formula(parse("!A -> B"), abc_vocab)
        score = violation_score(graph, Z, [0.8, 0.1, 0.0], _zero_gates(graph))
        assert score.antecedent == pytest.approx(0.2)
        assert score.violation == pytest.approx(0.1)

    def test_non_implication_is_not_gated(self, abc_vocab):
        """Test that other rules score 1 - t."""
        graph = compile_formula(parse("A & B"), abc_vocab)
        score = violation_score(graph, Z, [0.8, 0.1, 0.0], _zero_gates(graph))
        assert score.violation == 0.5
        assert score.antecedent is None
        assert not score.gated

    def test_gating_can_be_disabled(self, abc_vocab):
        """Test ungated implication scores."""
        graph = compile_formula(parse("A -> B"), abc_vocab)
        score = violation_score(graph, Z, [0.8, 0.1, 0.0], _zero_gates(graph), antecedent=False)
        assert score.violation == 0.5
        assert not score.gated

    @pytest.mark.parametrize("tau", [1.0, 1.5, -0.1])
    def test_tau_range(self, abc_vocab, tau):
        """Test that tau must lie in [0, 1)."""
        for text in ("A -> B", "A | B"):
            graph = compile_formula(parse(text), abc_vocab)
            with pytest.raises(ValueError, match="tau"):
                violation_score(graph, Z, [0.8, 0.1, 0.0], _zero_gates(graph), tau=tau)

    def test_batch_scores(self, abc_vocab):
        """Test batch scoring from node truths."""
        graph = compile_formula(parse("A -> B"), abc_vocab)
        truths = np.array([[0.9, 0.2, 0.1], [0.1, 0.9, 0.95]])
        violation, satisfaction, antecedent = violation_scores_batch(graph, truths)
        assert satisfaction.tolist() == [0.1, 0.95]
        assert antecedent.tolist() == [0.9, 0.1]
        assert violation == pytest.approx([0.81, 0.005])

    @pytest.mark.parametrize("tau", [0.0, 0.3])
    def test_gated_score_is_monotone(self, abc_vocab, tau):
        """Test that violation rises with the antecedent and falls with satisfaction."""
        graph = compile_formula(parse("A -> B"), abc_vocab)
        antecedent_node = graph.in_edges(graph.root)[0].src
        grid = np.linspace(0.0, 1.0, 21)
        ante, sat = np.meshgrid(grid, grid, indexing="ij")
        truths = np.full((ante.size, len(graph)), 0.5)
        truths[:, antecedent_node] = ante.ravel()
        truths[:, graph.root] = sat.ravel()
        violation, _, _ = violation_scores_batch(graph, truths, tau)
        violation = violation.reshape(ante.shape)
        assert np.all(np.diff(violation, axis=0) >= 0.0)
        assert np.all(np.diff(violation, axis=1) <= 0.0)
        assert violation[-1, 0] == pytest.approx(1.0)
        assert np.all(violation[:, -1] == 0.0)

    def test_antecedent_only_for_implication_roots(self, abc_vocab):
        """Test antecedent lookup."""
        graph = compile_formula(parse("(A -> B) & C"), abc_vocab)
        assert antecedent_probs(graph, np.zeros((1, len(graph)))) is None

    def test_gate_factor(self):
        """Test the gating factor."""
        assert gate_factor(np.array([0.0, 0.5, 1.0]), 0.5).tolist() == [0.0, 0.0, 1.0]
        with pytest.raises(ValueError):
            gate_factor(0.5, 1.0)


class TestAggregate:
    """Tests for anomaly aggregation."""

    def test_modes(self):
        """Test every aggregation mode on plain scores."""
        assert aggregate([0.2, 0.8], Aggregation.Max) == pytest.approx(0.8)
        assert aggregate([0.2, 0.8], Aggregation.Mean) == pytest.approx(0.5)
        assert aggregate([0.25, 1.0], Aggregation.Geo) == pytest.approx(0.5)
        assert aggregate([0.2, 0.8], Aggregation.Min) == pytest.approx(0.8)

    def test_mode_by_name(self):
        """Test aggregation modes given as strings."""
        assert aggregate([0.2, 0.4], "mean") == pytest.approx(0.3)
        with pytest.raises(ValueError):
            aggregate([0.2], "median")

    def test_geo_with_zero(self):
        """Test that a zero score zeroes the geometric mean."""
        assert aggregate([0.0, 0.9], "geo") == 0.0

    def test_min_uses_satisfaction_of_rule_scores(self):
        """Test min aggregation over gated rule scores."""
        scores = [
            RuleScore(0, satisfaction=0.3, violation=0.1, antecedent=0.1, gated=True),
            RuleScore(1, satisfaction=0.9, violation=0.1),
        ]
        assert aggregate(scores, "min") == pytest.approx(0.7)
        assert aggregate(scores, "max") == pytest.approx(0.1)

    def test_empty(self):
        """Test aggregating no scores."""
        with pytest.raises(ValueError, match="empty"):
            aggregate([], "max")
        with pytest.raises(ValueError, match="empty"):
            aggregate_batch(np.zeros((3, 0)), "max")

    def test_batch(self):
        """Test row-wise aggregation."""
        scores = np.array([[0.1, 0.3], [0.5, 0.5]])
        assert aggregate_batch(scores, "max").tolist() == [0.3, 0.5]
        assert aggregate_batch(scores, "min") == pytest.approx([0.3, 0.5])


class TestAttribution:
    """Tests for top-k attribution."""

    def test_descending_with_id_ties(self):
        """Test ranking and tie-breaking."""
        scores = [0.5, 0.9, 0.5, 0.1]
        assert attribute_topk(scores, 2) == [1, 0]
        assert attribute_topk(scores, 3) == [1, 0, 2]

    def test_k_larger_than_rule_count(self):
        """Test that k beyond the rule count returns every rule."""
        assert attribute_topk([0.2, 0.7], 5) == [1, 0]

    def test_k_must_be_positive(self):
        """Test k < 1."""
        with pytest.raises(ValueError, match="positive"):
            attribute_topk([0.2], 0)


def test_score_rules_batch(abc_vocab):
    """Test scoring raw features against several rules."""
    bank = LeafBank(params=init_mlp([5, 3, 3], np.random.default_rng(0)), vocab=abc_vocab)
    graphs = [compile_formula(parse(text), abc_vocab) for text in ("A -> B", "B | !C")]
    gate_sets = [_zero_gates(graph) for graph in graphs]
    features = np.random.default_rng(1).normal(size=(6, 5))

    violations, satisfactions = score_rules_batch(graphs, gate_sets, bank, features)
    assert violations.shape == (6, 2)
    assert np.all(satisfactions == 0.5)
    assert np.all(violations[:, 1] == 0.5)
    assert np.all(violations[:, 0] <= 0.5)

    ungated, _ = score_rules_batch(
        graphs, gate_sets, bank, features, ScoringConfig(gate_antecedent=False)
    )
    assert np.all(ungated == 0.5)
