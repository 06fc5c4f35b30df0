import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sohcast.errors import ConfigError, TrainingInstabilityError, UsageError
from sohcast.numerics import (Activation, AdamState, LayerKind, LayerParams, Mode,
                              Param, Tape, Value, activation, dropout,
                              finite_difference_grad, grad_error, layernorm_forward,
                              linear_forward, mean_broadcast, mse_loss)
from sohcast.rng import make_rng

F = np.float32


def lp_linear(w, b):
    return LayerParams("lin", np.asarray(w, F), np.asarray(b, F), LayerKind.LINEAR)


def lp_norm(gain, bias):
    return LayerParams("ln", np.asarray(gain, F), np.asarray(bias, F), LayerKind.LAYERNORM)


class TestLinear:
    def test_identity(self):
        out = linear_forward(Tape(), Value(np.array([[1.0, 0.0]], F)),
                             lp_linear(np.eye(2), [0, 0]))
        np.testing.assert_allclose(out.data, [[1.0, 0.0]])

    def test_hand_product(self):
        p = lp_linear([[1, 1], [0, 1]], [0.5, 0.5])
        out = linear_forward(Tape(), Value(np.array([[1.0, 2.0]], F)), p)
        np.testing.assert_allclose(out.data, [[3.5, 2.5]])

    def test_zero_input_gives_bias(self):
        p = lp_linear(np.arange(12).reshape(4, 3), [1, 2, 3, 4])
        out = linear_forward(Tape(), Value(np.zeros((2, 3), F)), p)
        np.testing.assert_allclose(out.data, [[1, 2, 3, 4]] * 2)

    def test_dim_mismatch(self):
        with pytest.raises(ConfigError):
            linear_forward(Tape(), Value(np.zeros((1, 5), F)), lp_linear(np.eye(2), [0, 0]))


class TestLayerNorm:
    def test_constant_row(self):
        out = layernorm_forward(Tape(), Value(np.array([[1.0, 1, 1]], F)),
                                lp_norm([1, 1, 1], [0, 0, 0]))
        np.testing.assert_allclose(out.data, [[0, 0, 0]], atol=1e-6)

    def test_two_point_row(self):
        out = layernorm_forward(Tape(), Value(np.array([[-1.0, 1.0]], F)),
                                lp_norm([1, 1], [0, 0]))
        np.testing.assert_allclose(out.data, [[-1, 1]], atol=1e-3)

    def test_gain_bias(self):
        out = layernorm_forward(Tape(), Value(np.array([[0.0, 2.0]], F)),
                                lp_norm([2, 2], [1, 1]))
        np.testing.assert_allclose(out.data, [[-1, 3]], atol=1e-3)

    @given(st.lists(st.floats(-100, 100, width=32), min_size=2, max_size=32))
    @settings(max_examples=60, deadline=None)
    def test_normalized_mean_below_1e5(self, row):
        x = np.array([row], F)
        out = layernorm_forward(Tape(), Value(x), lp_norm(np.ones(x.shape[1]),
                                                          np.zeros(x.shape[1])))
        assert abs(float(out.data.mean())) < 1e-5


class TestActivation:
    def test_relu(self):
        out = activation(Tape(), Value(np.array([-1.0, 2.0], F)), Activation.RELU)
        np.testing.assert_allclose(out.data, [0, 2])

    def test_tanh_zero(self):
        out = activation(Tape(), Value(np.array([0.0], F)), Activation.TANH)
        assert out.data[0] == 0

    def test_tanh_one(self):
        out = activation(Tape(), Value(np.array([1.0], F)), Activation.TANH)
        assert abs(out.data[0] - 0.76159) < 1e-5


class TestDropout:
    def test_p_zero_identity(self):
        x = np.arange(6, dtype=F)
        for mode in Mode:
            out = dropout(Tape(), Value(x), 0.0, mode, make_rng(0))
            np.testing.assert_array_equal(out.data, x)

    def test_deterministic_identity(self):
        x = np.arange(6, dtype=F)
        out = dropout(Tape(), Value(x), 0.5, Mode.DETERMINISTIC, None)
        np.testing.assert_array_equal(out.data, x)

    def test_mean_preserved(self):
        x = np.ones(100_000, F)
        out = dropout(Tape(), Value(x), 0.5, Mode.TRAIN, make_rng(123))
        assert abs(float(out.data.mean()) - 1.0) < 0.02

    def test_bad_probability(self):
        with pytest.raises(ConfigError):
            dropout(Tape(), Value(np.ones(3, F)), 1.0, Mode.TRAIN, make_rng(0))


class TestBackward:
    def test_linear_gradient_is_input(self):
        # loss = w.x with fixed x -> dloss/dw = x
        x = np.array([[0.3, -0.7, 2.0]], F)
        p = lp_linear(np.zeros((1, 3)), [0.0])
        tape = Tape()
        out = linear_forward(tape, Value(x), p)
        out.grad = np.ones_like(out.data)
        for fn in reversed(tape._steps):
            fn()
        np.testing.assert_allclose(p.weight.grad, x)

    def test_tanh_grad_at_zero(self):
        w = Param("w", np.zeros(4, F))
        tape = Tape()
        out = activation(tape, w, Activation.TANH)
        out.grad = np.ones_like(out.data)
        for fn in reversed(tape._steps):
            fn()
        np.testing.assert_allclose(w.grad, np.ones(4))

    def test_backward_before_forward(self):
        with pytest.raises(UsageError):
            Tape().backward(Value(np.zeros((), F)))

    def test_composition_matches_finite_differences(self):
        rng = make_rng(9)
        lin1 = LayerParams("l1", rng.normal(size=(5, 4)), np.zeros(5), LayerKind.LINEAR)
        ln = LayerParams("n1", np.ones(5), np.zeros(5), LayerKind.LAYERNORM)
        lin2 = LayerParams("l2", rng.normal(size=(2, 5)), np.zeros(2), LayerKind.LINEAR)
        x = rng.normal(size=(3, 4))
        tgt = rng.normal(size=(3, 2))

        def forward():
            tape = Tape()
            h = linear_forward(tape, Value(x), lin1)
            h = layernorm_forward(tape, h, ln)
            h = activation(tape, h, Activation.TANH)
            h = mean_and_head(tape, h)
            return tape, mse_loss(tape, h, tgt)

        def mean_and_head(tape, h):
            return linear_forward(tape, h, lin2)

        tape, loss = forward()
        tape.backward(loss)
        for p in [lin1.weight, lin1.bias, ln.weight, ln.bias, lin2.weight, lin2.bias]:
            original = p.data

            def f(v, p=p):
                p.data = v.copy()
                _, l = forward()
                return float(l.data)

            numeric = finite_difference_grad(f, original)
            p.data = original
            assert grad_error(p.grad, numeric) < 1e-4, p.name


class TestMeanBroadcast:
    def test_forward_and_grad(self):
        x = Value(np.array([[1.0, 2.0, 3.0]], np.float64))
        tape = Tape()
        out = mean_broadcast(tape, x, 5)
        np.testing.assert_allclose(out.data, np.full((1, 5), 2.0))
        out.grad = np.ones_like(out.data)
        for fn in reversed(tape._steps):
            fn()
        np.testing.assert_allclose(x.grad, np.full((1, 3), 5.0 / 3.0))


class TestAdam:
    def _param(self, v):
        return Param("p", np.asarray(v, F))

    def test_zero_grad_no_change(self):
        p = self._param([1.0, -2.0])
        opt = AdamState([p], lr=0.1)
        p.grad = np.zeros(2, F)
        opt.step()
        np.testing.assert_array_equal(p.data, [1.0, -2.0])

    def test_first_step_magnitude(self):
        p = self._param([0.0, 0.0])
        opt = AdamState([p], lr=1e-3)
        p.grad = np.array([0.5, -3.0], F)
        opt.step()
        np.testing.assert_allclose(np.abs(p.data), [1e-3, 1e-3], rtol=1e-4)
        assert p.data[0] < 0 < p.data[1]

    def test_deterministic(self):
        runs = []
        for _ in range(2):
            p = self._param([0.2, 0.4])
            opt = AdamState([p], lr=0.01)
            for step in range(5):
                p.grad = np.array([0.1 * (step + 1), -0.2], F)
                opt.step()
            runs.append(p.data.copy())
        np.testing.assert_array_equal(runs[0], runs[1])

    def test_nonfinite_grad_aborts(self):
        p = self._param([1.0])
        opt = AdamState([p], lr=0.1)
        p.grad = np.array([np.nan], F)
        with pytest.raises(TrainingInstabilityError):
            opt.step()
        assert p.data[0] == 1.0 and opt.t == 0


class TestRng:
    def test_same_seed_same_stream(self):
        a = make_rng(42, "x").random(8)
        b = make_rng(42, "x").random(8)
        np.testing.assert_array_equal(a, b)

    def test_different_path_different_stream(self):
        a = make_rng(42, "x").random(8)
        b = make_rng(42, "y").random(8)
        assert not np.array_equal(a, b)
