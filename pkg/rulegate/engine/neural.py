"""
Numpy MLP substrate: initialization, forward pass, BCE-with-logits loss,
exact backpropagation, Adam updates and finite-difference verification.

All math runs in float64.
"""

from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from rulegate.errors import DimensionError
from rulegate.models.mlp import AdamState, DenseLayer, MlpParams


def init_mlp(sizes: Sequence[int], rng: np.random.Generator, arch: str = "") -> MlpParams:
    """
    Uniform Glorot initialization with zero biases.

    Args:
        sizes: Layer widths from input to output, e.g. ``[in, F, F, 1]``.
        rng: Source of randomness.
        arch: Architecture tag stored on the parameters.
    """
    if len(sizes) < 2 or any(int(s) <= 0 for s in sizes):
        raise ValueError(f"Invalid layer sizes {list(sizes)}")
    layers = []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weight = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(DenseLayer(weight, np.zeros(fan_out)))
    return MlpParams(layers, arch)


def _check_input(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != params.input_dim:
        raise DimensionError(
            f"Expected inputs of width {params.input_dim}, got shape {inputs.shape}"
        )
    return inputs


def forward_batch(params: MlpParams, inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Forward pass over a batch.

    Args:
        params: Network parameters.
        inputs: [M x in] matrix.

    Returns:
        (h, logits): the last hidden activation [M x F] (the inputs themselves
        when there are no hidden layers) and the head logits [M x out].
    """
    activation = _check_input(params, inputs)
    for layer in params.layers[:-1]:
        activation = np.maximum(activation @ layer.weight.T + layer.bias, 0.0)
    head = params.layers[-1]
    return activation, activation @ head.weight.T + head.bias


def forward(params: MlpParams, x: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Forward pass for one input vector.

    Returns:
        (h, logits) with shapes [F] and [out].
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"Expected a vector input, got shape {x.shape}")
    h, logits = forward_batch(params, x[None, :])
    return h[0], logits[0]


def sigmoid(logits: np.ndarray) -> np.ndarray:
    return expit(logits)


def _as_targets(targets: np.ndarray, logits: np.ndarray) -> np.ndarray:
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != logits.shape:
        targets = targets.reshape(logits.shape)
    return targets


def bce_with_logits(
    logits: np.ndarray,
    targets: np.ndarray,
    pos_weight: Optional[np.ndarray] = None,
) -> float:
    """
    Mean binary cross-entropy on logits in the stable log-sum-exp form.

    Args:
        logits: Logits of any shape.
        targets: Targets in [0, 1], same number of elements.
        pos_weight: Optional weight on the positive term, broadcast over the
            last axis (one weight per output).
    """
    logits = np.asarray(logits, dtype=np.float64)
    targets = _as_targets(targets, logits)
    softplus_neg = np.maximum(-logits, 0.0) + np.log1p(np.exp(-np.abs(logits)))
    if pos_weight is None:
        loss = (1.0 - targets) * logits + softplus_neg
    else:
        weight = 1.0 + (np.asarray(pos_weight, dtype=np.float64) - 1.0) * targets
        loss = (1.0 - targets) * logits + weight * softplus_neg
    return float(np.mean(loss))


def bce_logit_grad(
    logits: np.ndarray, targets: np.ndarray, pos_weight: Optional[np.ndarray] = None
) -> np.ndarray:
    """Elementwise derivative of the (unaveraged) BCE with respect to the logits."""
    prob = expit(logits)
    if pos_weight is None:
        return prob - targets
    return (1.0 - targets) * prob - np.asarray(pos_weight) * targets * (1.0 - prob)


def loss_and_grad(
    params: MlpParams,
    inputs: np.ndarray,
    targets: np.ndarray,
    pos_weight: Optional[np.ndarray] = None,
) -> Tuple[float, MlpParams]:
    """
    Mean BCE and its exact gradient with respect to every parameter.

    The mean runs over all batch rows and outputs.
    """
    inputs = _check_input(params, inputs)
    activations = [inputs]
    for layer in params.layers[:-1]:
        activations.append(np.maximum(activations[-1] @ layer.weight.T + layer.bias, 0.0))
    head = params.layers[-1]
    logits = activations[-1] @ head.weight.T + head.bias
    targets = _as_targets(targets, logits)
    if targets.shape != logits.shape:
        raise DimensionError(f"Targets {targets.shape} do not match logits {logits.shape}")

    loss = bce_with_logits(logits, targets, pos_weight)
    delta = bce_logit_grad(logits, targets, pos_weight) / logits.size

    grads: List[DenseLayer] = []
    for index in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[index]
        previous = activations[index]
        grads.append(DenseLayer(delta.T @ previous, delta.sum(axis=0)))
        if index > 0:
            delta = (delta @ layer.weight) * (previous > 0.0)
    grads.reverse()
    return loss, MlpParams(grads, params.arch)


def backward(
    params: MlpParams,
    inputs: np.ndarray,
    targets: np.ndarray,
    pos_weight: Optional[np.ndarray] = None,
) -> MlpParams:
    """Mean-over-batch BCE gradients, shaped like params."""
    return loss_and_grad(params, inputs, targets, pos_weight)[1]


def adam_step(state: AdamState, params: MlpParams, grads: MlpParams) -> MlpParams:
    """
    Apply one bias-corrected Adam update to params in place.

    Returns:
        The updated params (the same object).
    """
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for param, grad, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        param -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params


def finite_diff_check(
    params: MlpParams,
    inputs: np.ndarray,
    targets: np.ndarray,
    eps: float = 1e-5,
    grads: Optional[MlpParams] = None,
    pos_weight: Optional[np.ndarray] = None,
) -> float:
    """
    Compare analytic gradients against central differences on every coordinate.

    Args:
        params: Network to check (restored unchanged on return).
        inputs: Batch inputs.
        targets: Batch targets.
        eps: Perturbation size in (0, 1e-3].
        grads: Gradients to check; computed with ``backward`` when omitted.

    Returns:
        Maximum of ``|analytic - numeric| / max(1, |analytic|, |numeric|)``.
    """
    if not 0.0 < eps <= 1e-3:
        raise ValueError(f"eps must be in (0, 1e-3], got {eps}")
    if grads is None:
        grads = backward(params, inputs, targets, pos_weight)

    def loss() -> float:
        _, logits = forward_batch(params, inputs)
        return bce_with_logits(logits, targets, pos_weight)

    worst = 0.0
    for param, grad in zip(params.arrays(), grads.arrays()):
        for index in np.ndindex(param.shape):
            original = param[index]
            param[index] = original + eps
            upper = loss()
            param[index] = original - eps
            lower = loss()
            param[index] = original
            numeric = (upper - lower) / (2.0 * eps)
            analytic = grad[index]
            scale = max(1.0, abs(analytic), abs(numeric))
            worst = max(worst, abs(analytic - numeric) / scale)
    return worst


def iterate_minibatches(
    n_rows: int, batch_size: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    """Shuffled row-index batches covering every row once."""
    order = rng.permutation(n_rows)
    for start in range(0, n_rows, batch_size):
        yield order[start : start + batch_size]
