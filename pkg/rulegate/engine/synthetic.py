"""
Synthetic concept-feature benchmark.

Labels come from independent concept marginals followed by the planted
implications, applied in order. Rows that still break a planted rule are
rejected and redrawn, so the training split is violation-free. On the eval
split a fraction of rows then gets one planted rule broken by label surgery.
Features are a noisy sum of fixed per-concept signal directions. Concepts named
by a planted implication share a per-row log-normal gain, so their evidence
is strong or weak together and the leaf detectors of a planted pair err
together.

Every row draws from its own generator seeded by (seed, split, row, attempt),
so a row does not depend on how many attempts earlier rows needed.
"""

import logging
from typing import List, Tuple

import numpy as np

from rulegate.config import MAX_REJECTION_ATTEMPTS, MIN_ACCEPTANCE_RATE
from rulegate.errors import InfeasibleSpecError
from rulegate.models.leaf_bank import ConceptDataset
from rulegate.models.rule_graph import ConceptVocab
from rulegate.models.run_config import PlantedImplication, SynthSpec
from rulegate.utils.enums import Split

logger = logging.getLogger(__name__)

_DIRECTION_STREAM = 0xD1
_GAIN_STREAM = 0x6A
_SURGERY_ATTEMPT = -1 % (1 << 32)
_SPLIT_CODES = {Split.Train: 0, Split.Eval: 1}

_Planted = List[Tuple[int, int, float, bool]]


def signal_directions(spec: SynthSpec) -> np.ndarray:
    """Unit-norm signal direction of every concept, shape [N x D]."""
    rng = np.random.default_rng([spec.seed, _DIRECTION_STREAM])
    directions = rng.normal(size=(spec.n_concepts, spec.input_dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def entangled_concepts(spec: SynthSpec) -> np.ndarray:
    """Mask [N] of the concepts named by any planted implication."""
    vocab = ConceptVocab.from_names(spec.concept_names)
    mask = np.zeros(spec.n_concepts, dtype=bool)
    for imp in spec.implications:
        mask[vocab.id_of(imp.antecedent) - 1] = True
        mask[vocab.id_of(imp.consequent) - 1] = True
    return mask


def row_gains(spec: SynthSpec, split: Split, n_rows: int) -> np.ndarray:
    """
    Signal gain of every (row, concept), shape [M x N].

    Entangled concepts of a row share ``exp(gain_spread * g)`` with g standard
    normal; every other concept has gain 1.
    """
    split = Split(split)
    gains = np.ones((n_rows, spec.n_concepts))
    if spec.gain_spread > 0.0:
        rng = np.random.default_rng([spec.seed, _SPLIT_CODES[split], n_rows, _GAIN_STREAM])
        shared = np.exp(spec.gain_spread * rng.normal(size=n_rows))
        gains[:, entangled_concepts(spec)] = shared[:, None]
    return gains


def planted_rules(spec: SynthSpec) -> List[str]:
    """DSL text of every planted implication."""
    return [imp.rule_text for imp in spec.implications]


def _planted(spec: SynthSpec) -> _Planted:
    vocab = ConceptVocab.from_names(spec.concept_names)

    def column(imp: PlantedImplication) -> Tuple[int, int, float, bool]:
        return (
            vocab.id_of(imp.antecedent) - 1,
            vocab.id_of(imp.consequent) - 1,
            imp.strength,
            imp.exclusion,
        )

    return [column(imp) for imp in spec.implications]


def _violates(y: np.ndarray, planted: _Planted) -> bool:
    for a, c, _, exclusion in planted:
        if y[a] and y[c] == int(exclusion):
            return True
    return False


def _sample_labels(
    spec: SynthSpec, split: Split, row: int, marginals: np.ndarray, planted: _Planted
) -> Tuple[np.ndarray, int]:
    for attempt in range(MAX_REJECTION_ATTEMPTS):
        rng = np.random.default_rng([spec.seed, _SPLIT_CODES[split], row, attempt])
        y = (rng.random(spec.n_concepts) < marginals).astype(np.uint8)
        for a, c, strength, exclusion in planted:
            if y[a] and rng.random() < strength:
                y[c] = 0 if exclusion else 1
        if not _violates(y, planted):
            return y, attempt + 1
    raise InfeasibleSpecError(
        f"Row {row} of the {split.value} split found no rule-consistent labels "
        f"in {MAX_REJECTION_ATTEMPTS} attempts"
    )


def gen_dataset(spec: SynthSpec, split: Split) -> ConceptDataset:
    """
    Generate one split of the benchmark.

    Args:
        spec: Benchmark specification.
        split: Train (violation-free) or Eval (with injected violations).

    Returns:
        Deterministic dataset for (spec, split).

    Raises:
        InfeasibleSpecError: If rejection sampling accepts under 1% of draws
            or a row exhausts its attempts.
    """
    split = Split(split)
    n_rows = spec.n_train if split is Split.Train else spec.n_eval
    marginals = np.asarray(spec.marginal_vector(), dtype=np.float64)
    planted = _planted(spec)
    directions = signal_directions(spec)

    labels = np.zeros((n_rows, spec.n_concepts), dtype=np.uint8)
    draws = 0
    for row in range(n_rows):
        labels[row], attempts = _sample_labels(spec, split, row, marginals, planted)
        draws += attempts
    acceptance = n_rows / draws
    if acceptance < MIN_ACCEPTANCE_RATE:
        raise InfeasibleSpecError(
            f"Rejection sampling accepted {acceptance:.2%} of draws for the {split.value} split"
        )

    injected = 0
    if split is Split.Eval and planted and spec.violation_rate > 0.0:
        for row in range(n_rows):
            rng = np.random.default_rng([spec.seed, _SPLIT_CODES[split], row, _SURGERY_ATTEMPT])
            if rng.random() < spec.violation_rate:
                a, c, _, exclusion = planted[rng.integers(len(planted))]
                labels[row, a] = 1
                labels[row, c] = 1 if exclusion else 0
                injected += 1

    noise_rng = np.random.default_rng([spec.seed, _SPLIT_CODES[split], n_rows, _DIRECTION_STREAM])
    features = spec.signal * ((labels * row_gains(spec, split, n_rows)) @ directions)
    if spec.noise > 0.0:
        features = features + noise_rng.normal(0.0, spec.noise, size=features.shape)

    logger.info(
        f"Generated {split.value} split: {n_rows} rows, acceptance {acceptance:.2%}, "
        f"{injected} injected violation(s)"
    )
    return ConceptDataset(features, labels, ConceptVocab.from_names(spec.concept_names))


def gen_datasets(spec: SynthSpec) -> Tuple[ConceptDataset, ConceptDataset]:
    """Train and eval splits of one spec."""
    return gen_dataset(spec, Split.Train), gen_dataset(spec, Split.Eval)
