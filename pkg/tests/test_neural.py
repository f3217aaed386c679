"""
Tests for the numpy MLP substrate.
"""

import numpy as np
import pytest

from rulegate.engine.neural import (
    adam_step,
    backward,
    bce_with_logits,
    finite_diff_check,
    forward,
    forward_batch,
    init_mlp,
    iterate_minibatches,
    loss_and_grad,
    sigmoid,
)
from rulegate.errors import DimensionError
from rulegate.models.mlp import AdamState, MlpParams


def _zeroed(params: MlpParams) -> MlpParams:
    for array in params.arrays():
        array[...] = 0.0
    return params


class TestForward:
    """Tests for initialization and the forward pass."""

    def test_init_shapes(self):
        """Test layer shapes and zero biases."""
        params = init_mlp([10, 4, 4, 1], np.random.default_rng(0), arch="test")
        assert params.sizes == [10, 4, 4, 1]
        assert params.feature_dim == 4
        assert params.arch == "test"
        assert all(np.all(layer.bias == 0.0) for layer in params.layers)
        limit = np.sqrt(6.0 / 14.0)
        assert np.all(np.abs(params.layers[0].weight) <= limit)

    def test_init_rejects_bad_sizes(self):
        """Test invalid layer sizes."""
        with pytest.raises(ValueError):
            init_mlp([4], np.random.default_rng(0))
        with pytest.raises(ValueError):
            init_mlp([4, 0, 1], np.random.default_rng(0))

    def test_zero_params_give_half(self):
        """Test that an all-zero network outputs probability 0.5."""
        params = _zeroed(init_mlp([6, 3, 1], np.random.default_rng(1)))
        h, logits = forward_batch(params, np.random.default_rng(2).normal(size=(5, 6)))
        assert h.shape == (5, 3)
        assert np.all(logits == 0.0)
        assert np.all(sigmoid(logits) == 0.5)

    def test_single_vector_forward(self):
        """Test that forward matches the first row of forward_batch."""
        params = init_mlp([6, 3, 2], np.random.default_rng(1))
        x = np.random.default_rng(3).normal(size=6)
        h, logits = forward(params, x)
        hb, lb = forward_batch(params, x[None, :])
        assert np.array_equal(h, hb[0])
        assert np.array_equal(logits, lb[0])

    def test_no_hidden_layer_returns_inputs_as_features(self):
        """Test a linear model."""
        params = init_mlp([3, 1], np.random.default_rng(0))
        inputs = np.eye(3)
        h, _ = forward_batch(params, inputs)
        assert np.array_equal(h, inputs)

    def test_dimension_errors(self):
        """Test mismatched input widths."""
        params = init_mlp([6, 3, 1], np.random.default_rng(1))
        with pytest.raises(DimensionError, match="width 6"):
            forward_batch(params, np.zeros((2, 5)))
        with pytest.raises(DimensionError, match="vector"):
            forward(params, np.zeros((1, 6)))


class TestLoss:
    """Tests for BCE with logits and its gradient."""

    def test_known_values(self):
        """Test BCE at zero and at saturated logits."""
        assert bce_with_logits(np.array([0.0]), np.array([1.0])) == pytest.approx(np.log(2.0))
        assert bce_with_logits(np.array([0.0]), np.array([0.0])) == pytest.approx(np.log(2.0))
        assert bce_with_logits(np.array([50.0]), np.array([1.0])) < 1e-20
        assert bce_with_logits(np.array([-50.0]), np.array([1.0])) == pytest.approx(50.0)
        assert bce_with_logits(np.array([50.0]), np.array([0.0])) == pytest.approx(50.0)

    def test_extreme_logits_stay_finite(self):
        """Test numerical stability far from zero."""
        loss = bce_with_logits(np.array([1e4, -1e4]), np.array([0.0, 1.0]))
        assert np.isfinite(loss)
        assert loss == pytest.approx(1e4)

    def test_pos_weight_scales_positive_term(self):
        """Test the positive-class weight."""
        loss = bce_with_logits(np.array([0.0]), np.array([1.0]), pos_weight=np.array([3.0]))
        assert loss == pytest.approx(3.0 * np.log(2.0))
        loss = bce_with_logits(np.array([0.0]), np.array([0.0]), pos_weight=np.array([3.0]))
        assert loss == pytest.approx(np.log(2.0))

    def test_linear_model_gradient_closed_form(self):
        """Test gradients of logistic regression against the closed form."""
        rng = np.random.default_rng(4)
        params = init_mlp([3, 1], rng)
        params.layers[0].bias[:] = 0.2
        inputs = rng.normal(size=(8, 3))
        targets = rng.integers(0, 2, size=(8, 1)).astype(float)

        loss, grads = loss_and_grad(params, inputs, targets)
        logits = inputs @ params.layers[0].weight.T + 0.2
        residual = sigmoid(logits) - targets
        assert loss == pytest.approx(bce_with_logits(logits, targets))
        assert np.allclose(grads.layers[0].weight, residual.T @ inputs / 8)
        assert np.allclose(grads.layers[0].bias, residual.mean(axis=0))

    def test_targets_shape_mismatch(self):
        """Test targets that cannot match the logits."""
        params = init_mlp([3, 2], np.random.default_rng(0))
        with pytest.raises(ValueError):
            loss_and_grad(params, np.zeros((4, 3)), np.zeros(5))


class TestFiniteDifferences:
    """Tests for gradient verification."""

    def test_gate_sized_networks(self):
        """Test backprop against central differences on random gate networks."""
        rng = np.random.default_rng(9)
        feature_dim = 4
        for _ in range(20):
            params = init_mlp([2 * (feature_dim + 1), feature_dim, feature_dim, 1], rng)
            for layer in params.layers:
                layer.bias[:] = rng.normal(scale=0.1, size=layer.bias.shape)
            inputs = rng.normal(size=(6, 2 * (feature_dim + 1)))
            targets = rng.integers(0, 2, size=(6, 1)).astype(float)
            assert finite_diff_check(params, inputs, targets) < 1e-5

    def test_weighted_multi_output(self):
        """Test a leaf-bank shaped network with positive weights."""
        rng = np.random.default_rng(10)
        params = init_mlp([5, 4, 3], rng)
        inputs = rng.normal(size=(7, 5))
        targets = rng.integers(0, 2, size=(7, 3)).astype(float)
        weights = np.array([1.0, 2.5, 7.0])
        assert finite_diff_check(params, inputs, targets, pos_weight=weights) < 1e-5

    def test_detects_corrupted_gradient(self):
        """Test that a wrong gradient is reported."""
        rng = np.random.default_rng(11)
        params = init_mlp([4, 3, 1], rng)
        inputs = rng.normal(size=(5, 4))
        targets = rng.integers(0, 2, size=(5, 1)).astype(float)
        grads = backward(params, inputs, targets)
        grads.layers[0].weight[0, 0] += 1.0
        assert finite_diff_check(params, inputs, targets, grads=grads) > 1e-2

    def test_params_restored(self):
        """Test that checking leaves the parameters unchanged."""
        rng = np.random.default_rng(12)
        params = init_mlp([4, 3, 1], rng)
        before = params.copy()
        finite_diff_check(params, rng.normal(size=(3, 4)), np.ones((3, 1)))
        assert params.equals(before)

    @pytest.mark.parametrize("eps", [0.0, -1e-6, 1e-2])
    def test_eps_range(self, eps):
        """Test the perturbation size bounds."""
        params = init_mlp([2, 1], np.random.default_rng(0))
        with pytest.raises(ValueError, match="eps"):
            finite_diff_check(params, np.zeros((1, 2)), np.zeros((1, 1)), eps=eps)


class TestAdam:
    """Tests for the Adam update."""

    def _setup(self, lr=1e-2):
        params = init_mlp([3, 2, 1], np.random.default_rng(0))
        return params, AdamState.for_params(params, lr=lr)

    def test_zero_gradient_keeps_params(self):
        """Test that a zero gradient does not move anything."""
        params, state = self._setup()
        before = params.copy()
        adam_step(state, params, _zeroed(params.copy()))
        assert params.equals(before)
        assert state.step == 1

    def test_first_step_moves_by_learning_rate(self):
        """Test the bias-corrected first step size."""
        params, state = self._setup(lr=1e-2)
        before = params.copy()
        grads = params.copy()
        for array in grads.arrays():
            array[...] = 0.5
        adam_step(state, params, grads)
        for new, old in zip(params.arrays(), before.arrays()):
            assert np.allclose(old - new, 1e-2, rtol=1e-5)

    def test_zero_learning_rate_is_identity(self):
        """Test that lr=0 leaves params unchanged."""
        params, state = self._setup(lr=0.0)
        before = params.copy()
        grads = params.copy()
        for _ in range(3):
            adam_step(state, params, grads)
        assert params.equals(before)

    def test_training_reduces_loss(self):
        """Test that Adam fits a separable problem."""
        rng = np.random.default_rng(13)
        inputs = rng.normal(size=(200, 4))
        targets = (inputs[:, :1] + inputs[:, 1:2] > 0).astype(float)
        params = init_mlp([4, 8, 1], rng)
        state = AdamState.for_params(params, lr=1e-2)
        start, _ = loss_and_grad(params, inputs, targets)
        for _ in range(30):
            for batch in iterate_minibatches(200, 32, rng):
                _, grads = loss_and_grad(params, inputs[batch], targets[batch])
                adam_step(state, params, grads)
        end, _ = loss_and_grad(params, inputs, targets)
        assert end < 0.5 * start
        assert params.is_finite()


def test_minibatches_cover_every_row_once():
    """Test shuffled batching."""
    batches = list(iterate_minibatches(10, 4, np.random.default_rng(0)))
    assert [len(b) for b in batches] == [4, 4, 2]
    assert sorted(np.concatenate(batches).tolist()) == list(range(10))
