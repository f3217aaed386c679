"""
Detection metrics.

Every metric returns None when it is undefined for the given labels (for
example AUROC with a single class) instead of a forced value.
"""

from typing import Optional, Sequence

import numpy as np
from sklearn.metrics import average_precision_score, roc_auc_score, roc_curve


def _prepare(scores: Sequence[float], labels: Sequence[int]):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).astype(np.int64).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores but {labels.size} labels")
    return scores, labels


def _single_class(labels: np.ndarray) -> bool:
    return labels.size == 0 or np.unique(labels).size < 2


def auroc(scores: Sequence[float], labels: Sequence[int]) -> Optional[float]:
    """Area under the ROC curve with midrank ties; None for single-class labels."""
    scores, labels = _prepare(scores, labels)
    if _single_class(labels):
        return None
    return float(roc_auc_score(labels, scores))


def average_precision(scores: Sequence[float], labels: Sequence[int]) -> Optional[float]:
    """Average precision of the positive class; None when there are no positives."""
    scores, labels = _prepare(scores, labels)
    if labels.size == 0 or labels.sum() == 0:
        return None
    return float(average_precision_score(labels, scores))


def fpr_at_95tpr(scores: Sequence[float], labels: Sequence[int]) -> Optional[float]:
    """False positive rate at the first threshold reaching 95% TPR."""
    scores, labels = _prepare(scores, labels)
    if _single_class(labels):
        return None
    fpr, tpr, _ = roc_curve(labels, scores)
    return float(fpr[np.argmax(tpr >= 0.95)])


def accuracy_at(
    scores: Sequence[float], labels: Sequence[int], threshold: float = 0.5
) -> Optional[float]:
    """Accuracy of ``score > threshold`` as the positive prediction."""
    scores, labels = _prepare(scores, labels)
    if labels.size == 0:
        return None
    return float(np.mean((scores > threshold).astype(np.int64) == labels))


def mean_defined(values: Sequence[Optional[float]]) -> Optional[float]:
    """Mean of the defined values, None if none are defined."""
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None
