"""
Leaf concept bank training, inference, temperature fitting and fingerprinting.
"""

import hashlib
import json
import logging
import warnings
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from rulegate.config import (
    FINGERPRINT_CHARS,
    LOG_TEMPERATURE_BOUNDS,
    POS_WEIGHT_MAX,
    POS_WEIGHT_MIN,
)
from rulegate.engine import metrics
from rulegate.engine.neural import (
    adam_step,
    bce_with_logits,
    forward_batch,
    init_mlp,
    iterate_minibatches,
    loss_and_grad,
    sigmoid,
)
from rulegate.models.leaf_bank import ConceptDataset, LeafBank
from rulegate.models.mlp import AdamState
from rulegate.models.report import ConceptMetrics, LeafMetrics
from rulegate.models.run_config import LeafBankConfig
from rulegate.utils.converters import as_matrix
from rulegate.writers.params_writer import ParamsWriter

logger = logging.getLogger(__name__)


def encode_batch(bank: LeafBank, features: np.ndarray) -> np.ndarray:
    """Embeddings z for a [M x D] feature matrix, shape [M x F]."""
    z, _ = forward_batch(bank.params, as_matrix(features))
    return z


def concept_logits_batch(bank: LeafBank, features: np.ndarray) -> np.ndarray:
    """Untempered concept logits, shape [M x N]."""
    _, logits = forward_batch(bank.params, as_matrix(features))
    return logits


def concept_probs_batch(bank: LeafBank, features: np.ndarray) -> np.ndarray:
    """Concept probabilities ``sigmoid(logit / T)``, shape [M x N]."""
    return sigmoid(concept_logits_batch(bank, features) / bank.temperature)


def encode(bank: LeafBank, x: Sequence[float]) -> np.ndarray:
    return encode_batch(bank, np.asarray(x, dtype=np.float64)[None, :])[0]


def concept_probs(bank: LeafBank, x: Sequence[float]) -> np.ndarray:
    return concept_probs_batch(bank, np.asarray(x, dtype=np.float64)[None, :])[0]


def fingerprint(bank: LeafBank) -> str:
    """
    Truncated SHA-256 of the encoder weights.

    Heads and temperature are excluded, so recalibrating or retraining heads
    keeps gate cache entries valid.
    """
    encoder = bank.encoder
    digest = hashlib.sha256()
    digest.update(json.dumps([list(l.weight.shape) for l in encoder.layers]).encode("utf-8"))
    digest.update(ParamsWriter.payload(encoder))
    return digest.hexdigest()[:FINGERPRINT_CHARS]


def fit_temperature_logits(
    logits: np.ndarray,
    labels: np.ndarray,
    bounds: Sequence[float] = LOG_TEMPERATURE_BOUNDS,
) -> float:
    """
    Scalar temperature minimizing ``BCE(sigmoid(logits / T), labels)``.

    The search runs over log T inside ``bounds``. A minimum on the boundary is
    clamped to it with a warning.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if logits.size == 0:
        raise ValueError("Cannot fit a temperature on empty data")
    low, high = float(bounds[0]), float(bounds[1])

    result = minimize_scalar(
        lambda log_t: bce_with_logits(logits / np.exp(log_t), labels),
        bounds=(low, high),
        method="bounded",
        options={"xatol": 1e-6},
    )
    log_t = float(result.x)
    edge = 1e-3 * (high - low)
    if log_t - low < edge or high - log_t < edge:
        log_t = low if log_t - low < edge else high
        message = f"Temperature clamped to search bound T={np.exp(log_t):.4g}"
        logger.warning(message)
        warnings.warn(message)
    return float(np.exp(log_t))


def fit_temperature(bank: LeafBank, data: ConceptDataset) -> float:
    """
    Fit and store the bank temperature on held-out data.

    Returns:
        The fitted temperature.
    """
    if len(data) == 0:
        raise ValueError("Cannot fit a temperature on empty data")
    temperature = fit_temperature_logits(
        concept_logits_batch(bank, data.features), data.labels
    )
    bank.temperature = temperature
    logger.info(f"Fitted leaf temperature T={temperature:.4f} on {len(data)} rows")
    return temperature


def positive_weights(labels: np.ndarray) -> np.ndarray:
    """``#neg / #pos`` per concept, clamped to [1, 100]; 1 for absent concepts."""
    positives = labels.sum(axis=0).astype(np.float64)
    negatives = labels.shape[0] - positives
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(positives > 0, negatives / positives, 1.0)
    return np.clip(ratio, POS_WEIGHT_MIN, POS_WEIGHT_MAX)


def degenerate_concepts(data: ConceptDataset) -> Sequence[str]:
    """Concepts that are never present or always present."""
    positives = data.labels.sum(axis=0)
    return [
        name
        for name, count in zip(data.vocab.names, positives)
        if count == 0 or count == len(data)
    ]


def train_leaf_bank(data: ConceptDataset, cfg: Optional[LeafBankConfig] = None) -> LeafBank:
    """
    Train the shared encoder and concept heads with multi-label BCE.

    Args:
        data: Training rows.
        cfg: Training settings; defaults when omitted.

    Returns:
        A trained bank. With temperature scaling enabled, a held-out fraction
        of rows calibrates T instead of being trained on.

    Raises:
        ValueError: If data is empty.
    """
    cfg = cfg or LeafBankConfig()
    if len(data) == 0:
        raise ValueError("Cannot train a leaf bank on empty data")

    rng = np.random.default_rng(cfg.seed)
    train, held_out = data, None
    if cfg.temperature_scaling and cfg.calibration_frac > 0.0:
        n_held = int(round(len(data) * cfg.calibration_frac))
        if 0 < n_held < len(data):
            order = rng.permutation(len(data))
            held_out = data.subset(np.sort(order[:n_held]))
            train = data.subset(np.sort(order[n_held:]))

    degenerate = degenerate_concepts(train)
    for name in degenerate:
        message = f"Concept '{name}' has a single class in the training data"
        logger.warning(message)
        warnings.warn(message)

    sizes = [data.input_dim, *cfg.encoder_hidden, cfg.feature_dim, data.n_concepts]
    arch = "leaf-mlp-relu-" + "x".join(str(s) for s in sizes) + "-v1"
    params = init_mlp(sizes, rng, arch)
    state = AdamState.for_params(params, cfg.lr)
    pos_weight = positive_weights(train.labels) if cfg.use_pos_weight else None

    for epoch in range(cfg.epochs):
        losses = []
        for rows in iterate_minibatches(len(train), cfg.batch_size, rng):
            loss, grads = loss_and_grad(
                params, train.features[rows], train.labels[rows], pos_weight
            )
            adam_step(state, params, grads)
            losses.append(loss)
        logger.info(f"Leaf bank epoch {epoch + 1}/{cfg.epochs}: loss {np.mean(losses):.4f}")

    bank = LeafBank(params=params, vocab=data.vocab, degenerate=tuple(degenerate))
    if cfg.temperature_scaling:
        fit_temperature(bank, held_out if held_out is not None else train)
    return bank


def leaf_metrics(bank: LeafBank, data: ConceptDataset) -> LeafMetrics:
    """
    Per-concept ROC-AUC, average precision and accuracy at 0.5.

    Macro averages skip concepts whose metric is undefined on data.
    """
    probs = concept_probs_batch(bank, data.features)
    concepts = []
    for column, name in enumerate(data.vocab.names):
        labels = data.labels[:, column]
        concepts.append(
            ConceptMetrics(
                name=name,
                prevalence=float(labels.mean()) if len(data) else 0.0,
                auroc=metrics.auroc(probs[:, column], labels),
                average_precision=metrics.average_precision(probs[:, column], labels),
                accuracy=metrics.accuracy_at(probs[:, column], labels),
            )
        )
    return LeafMetrics(
        concepts=concepts,
        macro_auroc=metrics.mean_defined([c.auroc for c in concepts]),
        macro_average_precision=metrics.mean_defined([c.average_precision for c in concepts]),
        macro_accuracy=metrics.mean_defined([c.accuracy for c in concepts]),
        temperature=bank.temperature,
    )
