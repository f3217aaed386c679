"""
Leaf concept bank and concept dataset models.
"""

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from rulegate.models.mlp import MlpParams
from rulegate.models.rule_graph import ConceptVocab


@dataclass
class ConceptDataset:
    """
    Feature vectors with multi-hot concept labels.

    Attributes:
        features: [M x D] float64 matrix.
        labels: [M x N] uint8 matrix, N = len(vocab).
        vocab: Concept vocabulary naming the label columns.
    """

    features: np.ndarray
    labels: np.ndarray
    vocab: ConceptVocab

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise ValueError("features and labels must be 2-D")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} label rows"
            )
        if self.labels.shape[1] != len(self.vocab):
            raise ValueError(
                f"Label width {self.labels.shape[1]} does not match vocab size {len(self.vocab)}"
            )
        if self.labels.size and self.labels.max() > 1:
            raise ValueError("labels must be 0/1")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_concepts(self) -> int:
        return self.labels.shape[1]

    def subset(self, rows: Sequence[int]) -> "ConceptDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return ConceptDataset(self.features[rows], self.labels[rows], self.vocab)


@dataclass
class LeafBank:
    """
    Shared encoder with one sigmoid head per concept.

    The parameters form one MLP ``D -> ... -> F -> N``: every layer but the
    last is the encoder (its output is the embedding z) and the last layer
    holds the concept heads.

    Attributes:
        params: Encoder and head parameters.
        vocab: Concepts in head order.
        temperature: Logit temperature T > 0 applied as ``sigmoid(logit / T)``.
        degenerate: Concepts with no positive (or no negative) training rows.
    """

    params: MlpParams
    vocab: ConceptVocab
    temperature: float = 1.0
    degenerate: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.params.layers) < 2:
            raise ValueError("Leaf bank needs at least one encoder layer and a head layer")
        if self.params.output_dim != len(self.vocab):
            raise ValueError(
                f"Head count {self.params.output_dim} does not match vocab size {len(self.vocab)}"
            )
        if not self.temperature > 0.0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        self.degenerate = tuple(self.degenerate)

    @property
    def input_dim(self) -> int:
        return self.params.input_dim

    @property
    def feature_dim(self) -> int:
        return self.params.feature_dim

    @property
    def encoder(self) -> MlpParams:
        """Encoder layers only (shares arrays with params)."""
        return MlpParams(self.params.layers[:-1], f"encoder:{self.params.arch}")
