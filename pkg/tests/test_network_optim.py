"""Topology builder, optimizer recurrence, and gradient-checker tests."""

import numpy as np
import pytest

from gesture_forge.errors import CheckInvalidError, ShapeError
from gesture_forge.nn import (
    Conv2d,
    Linear,
    MaxPool2d,
    Parameter,
    ReLU,
    SGDMomentum,
    build_tongue_net,
    check_layer,
    check_network,
)
from gesture_forge.nn import layers as layer_mod


def analytic_parameter_count(class_count=2):
    """Sum over the fixed topology, written out from the layer formulas."""
    conv = lambda f, c: f * c * 3 * 3 + f
    bn = lambda c: 2 * c
    total = conv(96, 3) + bn(96) + conv(32, 96) + bn(32) + conv(64, 32) + bn(64)
    total += class_count * (64 * 8 * 8) + class_count
    return total


class TestBuildNetwork:
    def test_output_dim_matches_class_count(self):
        net = build_tongue_net(class_count=2)
        assert net.class_count == 2
        assert net.layers[-1].weight.data.shape[0] == 2

    def test_zero_input_smoke(self):
        net = build_tongue_net(seed=3)
        logits = net.forward(np.zeros((1, 3, 32, 32), dtype=np.float32))
        assert logits.shape == (1, 2)
        assert np.isfinite(logits).all()

    def test_parameter_count_frozen(self):
        # Computed once from the layer formulas and pinned as a regression value.
        assert analytic_parameter_count() == 57442
        assert build_tongue_net().num_parameters == 57442

    def test_same_seed_same_weights(self):
        a = build_tongue_net(seed=11).state_dict()
        b = build_tongue_net(seed=11).state_dict()
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_different_seed_different_weights(self):
        a = build_tongue_net(seed=1).state_dict()
        b = build_tongue_net(seed=2).state_dict()
        assert any((a[n] != b[n]).any() for n in a if n.endswith("conv1.weight"))

    def test_pooling_halves_and_conv_preserves_shape(self):
        net = build_tongue_net()
        shape = (3, 32, 32)
        shapes = []
        for layer in net.layers:
            shape = layer.out_shape(shape)
            shapes.append(shape)
        assert (96, 32, 32) in shapes and (96, 16, 16) in shapes
        assert (32, 16, 16) in shapes and (32, 8, 8) in shapes
        assert (64, 8, 8) in shapes

    def test_bad_class_count(self):
        with pytest.raises(ShapeError):
            build_tongue_net(class_count=1)

    def test_state_dict_round_trip(self):
        net = build_tongue_net(seed=5)
        other = build_tongue_net(seed=9)
        other.load_state_dict(net.state_dict())
        x = np.random.default_rng(0).standard_normal((2, 3, 32, 32)).astype(np.float32)
        np.testing.assert_array_equal(net.forward(x), other.forward(x))


class TestSGDMomentum:
    def test_single_step_no_momentum(self):
        p = Parameter("p", np.array([0.0], dtype=np.float32))
        opt = SGDMomentum([p], learning_rate=0.1, momentum=0.0)
        p.grad[:] = 1.0
        opt.step()
        np.testing.assert_allclose(p.data, [-0.1], rtol=1e-6)

    def test_zero_grad_zero_velocity_no_change(self):
        p = Parameter("p", np.array([1.5], dtype=np.float32))
        opt = SGDMomentum([p], learning_rate=0.1, momentum=0.9)
        opt.step()
        np.testing.assert_array_equal(p.data, [1.5])

    def test_two_step_heavy_ball_recurrence(self):
        # v1 = 1, p1 = -0.1; v2 = 0.9 + 1 = 1.9, p2 = -0.1 - 0.19 = -0.29
        p = Parameter("p", np.array([0.0], dtype=np.float32))
        opt = SGDMomentum([p], learning_rate=0.1, momentum=0.9)
        p.grad[:] = 1.0
        opt.step()
        np.testing.assert_allclose(p.data, [-0.1], rtol=1e-6)
        p.grad[:] = 1.0
        opt.step()
        np.testing.assert_allclose(p.data, [-0.29], rtol=1e-6)

    def test_velocity_zero_initialized(self):
        p = Parameter("p", np.ones(3, dtype=np.float32))
        opt = SGDMomentum([p])
        assert all(not v.any() for v in opt.velocities)

    def test_invalid_hyperparameters(self):
        p = Parameter("p", np.zeros(1, dtype=np.float32))
        with pytest.raises(ValueError):
            SGDMomentum([p], learning_rate=0.0)
        with pytest.raises(ValueError):
            SGDMomentum([p], momentum=1.0)


class TestGradientCheck:
    def test_linear_layer_is_exact(self, rng):
        layer = Linear(6, 4, rng)
        x = rng.standard_normal((3, 6)).astype(np.float32)
        report = check_layer(layer, x, dtype=np.float64)
        assert report.max_relative_error < 1e-5

    def test_relu_away_from_kink(self, rng):
        x = rng.standard_normal((2, 3, 6, 6)).astype(np.float32)
        eps = 1e-4
        x[np.abs(x) <= 10 * eps] = 0.5  # keep every probe off the kink
        report = check_layer(ReLU(), x, epsilon=eps, dtype=np.float64)
        assert report.max_relative_error < 1e-4

    def test_conv_layer_float32(self, rng):
        # Conv is linear, so a large probe step has zero truncation error and
        # keeps float32 rounding noise far below the gradient magnitudes.
        layer = Conv2d(2, 3, rng)
        x = rng.standard_normal((2, 2, 6, 6)).astype(np.float32)
        report = check_layer(layer, x, epsilon=0.1, dtype=np.float32)
        assert report.max_relative_error <= 1e-3

    def test_maxpool_layer(self, rng):
        x = rng.permutation(2 * 2 * 6 * 6).astype(np.float64).reshape(2, 2, 6, 6)
        report = check_layer(MaxPool2d(), x, dtype=np.float64)
        assert report.max_relative_error <= 1e-3

    def test_full_network_small_batch(self, rng):
        net = build_tongue_net(seed=7)
        x = rng.standard_normal((4, 3, 32, 32)).astype(np.float32)
        labels = np.array([0, 1, 1, 0])
        report = check_network(net, x, labels, samples_per_target=8, seed=3)
        assert report.max_relative_error <= 1e-3
        assert set(report.per_target) >= {"input", "conv1.weight", "fc.bias"}

    def test_update_stats_configuration_rejected(self, rng):
        net = build_tongue_net()
        with pytest.raises(CheckInvalidError):
            check_network(net, np.zeros((2, 3, 32, 32), np.float32),
                          np.array([0, 1]), update_stats=True)

    def test_sign_flip_fault_is_caught(self, rng):
        net = build_tongue_net(seed=7)
        x = rng.standard_normal((2, 3, 32, 32)).astype(np.float32)
        labels = np.array([0, 1])
        layer_mod._fault_injection.add("conv_input_grad_sign_flip")
        try:
            report = check_network(net, x, labels, samples_per_target=6, seed=3)
        finally:
            layer_mod._fault_injection.discard("conv_input_grad_sign_flip")
        assert report.per_target["input"] > 1e-3
