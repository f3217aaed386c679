"""
Tests for detection metrics.
"""

import numpy as np
import pytest

from rulegate.engine.metrics import (
    accuracy_at,
    auroc,
    average_precision,
    fpr_at_95tpr,
    mean_defined,
)


def _pairwise_auroc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


def _ranked_average_precision(scores, labels):
    order = np.argsort(-scores, kind="stable")
    hits = labels[order]
    precision = np.cumsum(hits) / np.arange(1, len(hits) + 1)
    return float(precision[hits == 1].mean())


def test_auroc_matches_pair_counting():
    """Test AUROC against pair counting, ties included."""
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 40))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = rng.integers(0, 6, size=n) / 5.0
        assert auroc(scores, labels) == pytest.approx(_pairwise_auroc(scores, labels))


def test_auroc_of_negated_scores_is_complement():
    """Test auroc(s) + auroc(-s) = 1, ties included."""
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 50))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = rng.integers(0, 8, size=n) / 7.0
        assert auroc(scores, labels) + auroc(-scores, labels) == pytest.approx(1.0)


def test_auroc_ignores_increasing_transforms():
    """Test that AUROC only depends on the score order."""
    rng = np.random.default_rng(4)
    labels = rng.integers(0, 2, size=200)
    scores = rng.normal(size=200) + labels
    expected = auroc(scores, labels)
    for transform in (np.exp, np.arctan, lambda s: 3.0 * s + 1.0, lambda s: s**3):
        assert auroc(transform(scores), labels) == pytest.approx(expected)


def test_average_precision_matches_ranking():
    """Test AP against precision averaged over positive ranks."""
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 40))
        labels = rng.integers(0, 2, size=n)
        labels[0] = 1
        scores = rng.random(n)
        assert average_precision(scores, labels) == pytest.approx(
            _ranked_average_precision(scores, labels)
        )


def test_single_positive_ranked_last():
    """Test AP of one positive below every negative."""
    scores = np.linspace(1.0, 0.0, 10)
    labels = np.zeros(10, dtype=int)
    labels[-1] = 1
    assert average_precision(scores, labels) == pytest.approx(0.1)
    assert auroc(scores, labels) == 0.0


def test_undefined_metrics_return_none():
    """Test single-class and empty inputs."""
    assert auroc([0.1, 0.9], [1, 1]) is None
    assert auroc([0.1, 0.9], [0, 0]) is None
    assert auroc([], []) is None
    assert average_precision([0.1, 0.9], [0, 0]) is None
    assert fpr_at_95tpr([0.1, 0.9], [1, 1]) is None
    assert accuracy_at([], []) is None


def test_fpr_at_95_tpr():
    """Test FPR at 95% TPR on separated and inverted scores."""
    labels = np.array([0] * 10 + [1] * 10)
    scores = np.arange(20) / 20.0
    assert fpr_at_95tpr(scores, labels) == 0.0
    assert fpr_at_95tpr(-scores, labels) == 1.0


def test_accuracy_at_threshold():
    """Test accuracy of score > threshold."""
    assert accuracy_at([0.2, 0.7, 0.5, 0.9], [0, 1, 1, 1]) == pytest.approx(0.75)
    assert accuracy_at([0.2, 0.7], [0, 1], threshold=0.8) == pytest.approx(0.5)


def test_shape_mismatch():
    """Test mismatched score and label counts."""
    with pytest.raises(ValueError, match="labels"):
        auroc([0.1, 0.2], [1])


def test_mean_defined():
    """Test averaging with undefined entries."""
    assert mean_defined([0.5, None, 1.0]) == pytest.approx(0.75)
    assert mean_defined([None, None]) is None
    assert mean_defined([]) is None
