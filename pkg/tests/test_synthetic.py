"""
Tests for the synthetic concept-feature benchmark.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from rulegate import compile_formula, gen_dataset, parse
from rulegate.engine.boolean_semantics import anomaly_labels_batch, rule_truths_batch
from rulegate.engine.synthetic import (
    entangled_concepts,
    gen_datasets,
    planted_rules,
    row_gains,
    signal_directions,
)
from rulegate.errors import InfeasibleSpecError
from rulegate.models.run_config import PlantedImplication, SynthSpec
from rulegate.utils.enums import Split
from tests.conftest import small_spec


def _graphs(spec, vocab):
    return [compile_formula(parse(text), vocab) for text in planted_rules(spec)]


def test_train_split_has_no_violations(small_data):
    """Test that every planted rule holds on the train split."""
    train, _ = small_data
    graphs = _graphs(small_spec(), train.vocab)
    assert anomaly_labels_batch(graphs, train.labels).sum() == 0


def test_eval_split_violation_rate(small_data):
    """Test the injected violation rate on the eval split."""
    _, eval_data = small_data
    graphs = _graphs(small_spec(), eval_data.vocab)
    rate = anomaly_labels_batch(graphs, eval_data.labels).mean()
    assert rate == pytest.approx(0.2, abs=0.06)


def test_shapes_and_names(small_data):
    """Test dataset shapes and the concept vocabulary."""
    train, eval_data = small_data
    assert train.features.shape == (1500, 16)
    assert eval_data.labels.shape == (600, 4)
    assert train.vocab.names == ("c00", "c01", "c02", "c03")


def test_generation_is_deterministic():
    """Test that a spec always produces the same data."""
    spec = small_spec(n_train=200, n_eval=100)
    first = gen_dataset(spec, Split.Eval)
    second = gen_dataset(spec, "eval")
    assert np.array_equal(first.labels, second.labels)
    assert np.array_equal(first.features, second.features)
    other = gen_dataset(small_spec(n_train=200, n_eval=100, seed=8), Split.Eval)
    assert not np.array_equal(first.labels, other.labels)


def test_rows_do_not_depend_on_split_size():
    """Test that row labels come from per-row generators."""
    short = gen_dataset(small_spec(n_train=50), Split.Train)
    long = gen_dataset(small_spec(n_train=120), Split.Train)
    assert np.array_equal(short.labels, long.labels[:50])


def test_planted_implication_holds_in_marginals():
    """Test that a planted rule shapes the consequent marginal."""
    spec = small_spec(n_train=2000, violation_rate=0.0)
    train = gen_dataset(spec, Split.Train)
    a, c = train.labels[:, 0], train.labels[:, 1]
    assert np.all(c[a == 1] == 1)
    assert c.mean() > a.mean()


def test_exclusion():
    """Test a planted exclusion."""
    spec = small_spec(
        implications=[PlantedImplication(antecedent="c02", consequent="c03", exclusion=True)],
        n_train=300,
        n_eval=300,
    )
    train, eval_data = gen_datasets(spec)
    graph = compile_formula(parse("c02 -> !c03"), train.vocab)
    assert rule_truths_batch(graph, train.labels).min() == 1
    assert rule_truths_batch(graph, eval_data.labels).min() == 0
    assert planted_rules(spec) == ["c02 -> !c03"]


def test_features_follow_signal_directions():
    """Test noiseless features are the scaled sum of concept directions."""
    spec = small_spec(noise=0.0, n_train=20)
    train = gen_dataset(spec, Split.Train)
    directions = signal_directions(spec)
    assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)
    assert np.allclose(train.features, spec.signal * train.labels @ directions)


def test_planted_concepts_share_a_row_gain():
    """Test that the concepts of a planted pair scale together."""
    spec = small_spec(noise=0.0, gain_spread=0.5, n_train=200)
    train = gen_dataset(spec, Split.Train)
    assert entangled_concepts(spec).tolist() == [True, True, False, False]
    coefficients = train.features @ np.linalg.pinv(signal_directions(spec))
    expected = spec.signal * train.labels * row_gains(spec, Split.Train, 200)
    assert np.allclose(coefficients, expected)
    both = (train.labels[:, 0] == 1) & (train.labels[:, 1] == 1)
    assert both.sum() > 10
    assert np.allclose(coefficients[both, 0], coefficients[both, 1])
    assert np.allclose(coefficients[:, 2], spec.signal * train.labels[:, 2])
    assert coefficients[both, 0].std() > 0.1


def test_zero_gain_spread():
    """Test that a zero spread keeps every gain at 1."""
    assert np.all(row_gains(small_spec(), Split.Eval, 30) == 1.0)
    gains = row_gains(small_spec(gain_spread=0.3), "eval", 30)
    assert np.all(gains[:, 2:] == 1.0)
    assert np.all(gains[:, 0] == gains[:, 1])
    assert np.all(gains[:, 0] > 0.0)


def test_infeasible_strength_zero():
    """Test that a rule that can never hold is rejected."""
    spec = small_spec(
        marginals=[1.0, 0.0, 0.3, 0.3],
        implications=[PlantedImplication(antecedent="c00", consequent="c01", strength=0.0)],
        n_train=5,
    )
    with pytest.raises(InfeasibleSpecError, match="no rule-consistent labels"):
        gen_dataset(spec, Split.Train)


def test_infeasible_conflicting_rules():
    """Test an implication and an exclusion on the same pair."""
    spec = small_spec(
        marginals=[1.0, 0.3, 0.3, 0.3],
        implications=[
            PlantedImplication(antecedent="c00", consequent="c01"),
            PlantedImplication(antecedent="c00", consequent="c01", exclusion=True),
        ],
        n_train=5,
    )
    with pytest.raises(InfeasibleSpecError):
        gen_dataset(spec, Split.Train)


class TestSynthSpec:
    """Tests for SynthSpec validation."""

    def test_defaults(self):
        """Test the default benchmark."""
        spec = SynthSpec()
        assert spec.n_concepts == 12
        assert spec.concept_names[0] == "c00"
        assert spec.concept_names[-1] == "c11"
        assert planted_rules(spec)[0] == "c00 -> c01"
        assert spec.marginal_vector() == [0.3] * 12
        assert spec.gain_spread > 0.0
        assert entangled_concepts(spec).sum() == 9

    def test_name_width_grows(self):
        """Test zero padding for large vocabularies."""
        spec = SynthSpec(n_concepts=150, implications=[])
        assert spec.concept_names[0] == "c000"
        assert spec.concept_names[-1] == "c149"

    def test_unknown_concept(self):
        """Test a planted rule naming a missing concept."""
        with pytest.raises(ValidationError, match="unknown concept"):
            small_spec(implications=[PlantedImplication(antecedent="c00", consequent="c09")])

    def test_reflexive_rule(self):
        """Test a planted rule from a concept to itself."""
        with pytest.raises(ValidationError, match="reflexive"):
            small_spec(implications=[PlantedImplication(antecedent="c01", consequent="c01")])

    def test_marginals_length(self):
        """Test that marginals list one value per concept."""
        with pytest.raises(ValidationError, match="one probability per concept"):
            small_spec(marginals=[0.5, 0.5])

    def test_extra_fields_forbidden(self):
        """Test that unknown settings are rejected."""
        with pytest.raises(ValidationError):
            SynthSpec(n_rows=10)
