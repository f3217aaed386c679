"""
Dense MLP parameter containers and Adam optimizer state.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from rulegate.config import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, DEFAULT_LEARNING_RATE


@dataclass
class DenseLayer:
    """
    One affine layer ``x @ weight.T + bias``.

    Attributes:
        weight: [out x in] float64 matrix.
        bias: [out] float64 vector.
    """

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValueError(
                f"Incompatible layer shapes {self.weight.shape} and {self.bias.shape}"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.weight.shape  # type: ignore[return-value]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weight.copy(), self.bias.copy())


@dataclass
class MlpParams:
    """
    Parameters of a ReLU MLP with a linear output head.

    Every layer but the last applies ReLU. The last hidden activation is the
    network's feature output; the last layer produces logits.

    Attributes:
        layers: Layers in forward order; adjacent dimensions must chain.
        arch: Architecture tag (layer sizes and activation spec).
    """

    layers: List[DenseLayer]
    arch: str = ""

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("MLP needs at least one layer")
        for prev, layer in zip(self.layers, self.layers[1:]):
            if layer.weight.shape[1] != prev.weight.shape[0]:
                raise ValueError(
                    f"Layer input {layer.weight.shape[1]} does not match "
                    f"previous output {prev.weight.shape[0]}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weight.shape[0]

    @property
    def feature_dim(self) -> int:
        """Width of the last hidden activation (the input width without hidden layers)."""
        return self.layers[-1].weight.shape[1]

    @property
    def sizes(self) -> List[int]:
        return [self.input_dim] + [layer.weight.shape[0] for layer in self.layers]

    def copy(self) -> "MlpParams":
        return MlpParams([layer.copy() for layer in self.layers], self.arch)

    def arrays(self) -> List[np.ndarray]:
        """Weight and bias arrays in layer order (views, not copies)."""
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.extend((layer.weight, layer.bias))
        return out

    def equals(self, other: "MlpParams") -> bool:
        """Bit-exact comparison of shapes, values and arch tag."""
        if self.arch != other.arch or len(self.layers) != len(other.layers):
            return False
        return all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.arrays(), other.arrays())
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


@dataclass
class AdamState:
    """
    Adam optimizer state for one MlpParams.

    Attributes:
        step: Number of updates applied so far.
        m: First-moment accumulators, one per parameter array.
        v: Second-moment accumulators, one per parameter array.
        lr: Learning rate.
    """

    m: List[np.ndarray]
    v: List[np.ndarray]
    lr: float = DEFAULT_LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPSILON
    step: int = field(default=0)

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = DEFAULT_LEARNING_RATE) -> "AdamState":
        """Zero-initialized state matching the shapes of params."""
        arrays = params.arrays()
        return cls(
            m=[np.zeros_like(a) for a in arrays],
            v=[np.zeros_like(a) for a in arrays],
            lr=lr,
        )
