import math

import numpy as np
import pytest

from src.exceptions import TeleDriveDimensionError, TeleDriveFormatError, TeleDriveTapeError
from src.numeric import (
    LinearParams,
    LstmParams,
    OptimizerKind,
    OptimizerState,
    ParameterSet,
    Tensor,
    adam_step,
    backward,
    check_gradients,
    decode_checkpoint,
    encode_checkpoint,
    gelu,
    kl_divergence,
    linear_forward,
    lstm_sequence,
    lstm_step,
    make_optimizer,
    mse_loss,
    step_decay_lr,
)


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


class TestLayers:
    def test_linear_identity(self) -> None:
        params = LinearParams(Tensor(np.eye(2)), Tensor(np.zeros(2)))
        assert linear_forward(params, Tensor([0.3, 0.7])).values == pytest.approx([0.3, 0.7])

    def test_linear_scalar(self) -> None:
        params = LinearParams(Tensor([[2.0]]), Tensor([1.0]))
        assert linear_forward(params, Tensor([3.0])).values == [7.0]

    def test_linear_applies_per_step(self) -> None:
        params = LinearParams(Tensor(np.zeros((3, 2))), Tensor([0.5, 0.5]))
        out = linear_forward(params, Tensor(np.ones((4, 10, 3))))
        assert out.shape == (4, 10, 2)
        assert np.all(out.data == 0.5)

    def test_linear_shape_mismatch(self) -> None:
        params = LinearParams(Tensor(np.zeros((3, 2))), Tensor(np.zeros(2)))
        with pytest.raises(TeleDriveDimensionError):
            linear_forward(params, Tensor(np.zeros(4)))

    def test_lstm_zero_network(self) -> None:
        params = LstmParams(Tensor(np.zeros((3, 8))), Tensor(np.zeros((2, 8))), Tensor(np.zeros(8)))
        hidden, cell = lstm_step(params, Tensor(np.ones((1, 3))), Tensor(np.zeros((1, 2))), Tensor(np.zeros((1, 2))))
        assert np.all(hidden.data == 0.0)
        assert np.all(cell.data == 0.0)

    def test_lstm_gate_identity(self) -> None:
        # input gate closed, forget gate open: the cell carries over
        bias = np.concatenate([np.full(2, -50.0), np.full(2, 50.0), np.zeros(2), np.zeros(2)])
        params = LstmParams(Tensor(np.zeros((1, 8))), Tensor(np.zeros((2, 8))), Tensor(bias))
        cell = np.array([[0.3, -0.4]])
        _, new_cell = lstm_step(params, Tensor([[1.0]]), Tensor(np.zeros((1, 2))), Tensor(cell))
        np.testing.assert_allclose(new_cell.data, cell, atol=1e-12)

    def test_lstm_matches_scalar_loop(self) -> None:
        rng = np.random.default_rng(3)
        w_ih, w_hh, b = rng.normal(size=(3, 16)), rng.normal(size=(4, 16)), rng.normal(size=16)
        x, h, c = rng.normal(size=3), rng.normal(size=4), rng.normal(size=4)
        params = LstmParams(Tensor(w_ih), Tensor(w_hh), Tensor(b))
        hidden, cell = lstm_step(params, Tensor(x[None]), Tensor(h[None]), Tensor(c[None]))
        expected_h, expected_c = [], []
        for unit in range(4):
            gate = [
                sum(x[k] * w_ih[k, g * 4 + unit] for k in range(3))
                + sum(h[k] * w_hh[k, g * 4 + unit] for k in range(4))
                + b[g * 4 + unit]
                for g in range(4)
            ]
            new_c = _sigmoid(gate[1]) * c[unit] + _sigmoid(gate[0]) * math.tanh(gate[2])
            expected_c.append(new_c)
            expected_h.append(_sigmoid(gate[3]) * math.tanh(new_c))
        np.testing.assert_allclose(hidden.data[0], expected_h, atol=1e-12)
        np.testing.assert_allclose(cell.data[0], expected_c, atol=1e-12)

    def test_lstm_sequence_shape(self) -> None:
        params = LstmParams(Tensor(np.zeros((3, 20))), Tensor(np.zeros((5, 20))), Tensor(np.zeros(20)))
        assert lstm_sequence(params, Tensor(np.ones((2, 10, 3)))).shape == (2, 10, 5)

    def test_gelu(self) -> None:
        out = gelu(Tensor([0.0, 1.0, -10.0])).values
        assert out[0] == 0.0
        assert out[1] == pytest.approx(0.841345, abs=1e-6)
        assert abs(out[2]) < 1e-8

    def test_gelu_uses_exact_normal_cdf(self) -> None:
        xs = np.linspace(-4.0, 4.0, 33)
        expected = [x * 0.5 * (1.0 + math.erf(x / math.sqrt(2.0))) for x in xs]
        np.testing.assert_allclose(gelu(Tensor(xs)).values, expected, rtol=1e-12, atol=1e-15)
        tanh_form = 0.5 * (1.0 + math.tanh(math.sqrt(2.0 / math.pi) * (1.0 + 0.044715)))
        assert abs(gelu(Tensor([1.0])).values[0] - tanh_form) > 1e-4


class TestLosses:
    def test_mse(self) -> None:
        assert mse_loss(Tensor([0.2, 0.4]), np.array([0.2, 0.4])).item() == 0.0
        assert mse_loss(Tensor([1.0, 1.0]), np.zeros(2)).item() == 1.0
        assert mse_loss(Tensor([0.5]), np.zeros(1)).item() == 0.25

    def test_mse_shape_mismatch(self) -> None:
        with pytest.raises(TeleDriveDimensionError):
            mse_loss(Tensor([1.0, 2.0]), np.zeros(3))

    def test_kl(self) -> None:
        assert kl_divergence(Tensor([0.0]), Tensor([0.0])).item() == 0.0
        assert kl_divergence(Tensor([0.5]), Tensor([0.0])).item() == pytest.approx(0.125)
        assert kl_divergence(Tensor([0.0]), Tensor([math.log(4.0)])).item() == pytest.approx(
            0.5 * (4.0 - 1.0 - math.log(4.0))
        )


class TestBackward:
    def test_quadratic(self) -> None:
        params = ParameterSet()
        w = params.add("w", np.array([3.0]))
        backward((w * w).sum())
        assert w.grad is not None
        assert w.grad.tolist() == [6.0]

    def test_unused_parameter_gets_zero(self) -> None:
        params = ParameterSet()
        w = params.add("w", np.array([1.0, 2.0]))
        params.add("unused", np.array([5.0]))
        backward((w * 2.0).sum())
        assert params.gradients()["unused"].tolist() == [0.0]

    def test_tape_consumed(self) -> None:
        w = Tensor([2.0], requires_grad=True)
        loss = (w * w).sum()
        backward(loss)
        with pytest.raises(TeleDriveTapeError):
            backward(loss)

    def test_non_scalar_loss(self) -> None:
        w = Tensor([2.0, 3.0], requires_grad=True)
        with pytest.raises(TeleDriveDimensionError):
            backward(w * w)

    def test_broadcast_gradient(self) -> None:
        bias = Tensor([1.0, 2.0], requires_grad=True)
        backward((Tensor(np.ones((3, 2))) + bias).sum())
        assert bias.grad is not None
        assert bias.grad.tolist() == [3.0, 3.0]

    def test_inference_builds_no_graph(self) -> None:
        out = Tensor([1.0]) * Tensor([2.0])
        assert out._parents == ()

    def test_gradient_check_linear(self) -> None:
        rng = np.random.default_rng(0)
        params = ParameterSet()
        params.add_linear("fc", 4, 3, rng)
        x, target = rng.normal(size=(5, 4)), rng.normal(size=(5, 3))
        report = check_gradients(
            "fc", lambda: mse_loss(gelu(linear_forward(params.linear("fc"), Tensor(x))), target), params
        )
        assert report.passed, report.errors


class TestOptimizers:
    def test_adam_zero_gradient(self) -> None:
        params = ParameterSet()
        params.add("w", np.array([1.5, -2.0]))
        state = adam_step(params, {"w": np.zeros(2)}, OptimizerState.for_params(params), 0.1)
        assert params["w"].data.tolist() == [1.5, -2.0]
        assert state.step == 1

    def test_adam_first_step(self) -> None:
        params = ParameterSet()
        params.add("w", np.array([1.0]))
        adam_step(params, {"w": np.array([1.0])}, OptimizerState.for_params(params), 0.1)
        assert params["w"].data[0] == pytest.approx(0.9, abs=1e-6)

    def test_adam_deterministic(self) -> None:
        def run() -> list[float]:
            rng = np.random.default_rng(11)
            params = ParameterSet()
            params.add("w", rng.normal(size=4))
            optimizer = make_optimizer(OptimizerKind.ADAM, params)
            for _ in range(5):
                params.zero_grad()
                backward((params["w"] * params["w"]).sum())
                optimizer.step(params, 0.01)
            return params["w"].values

        assert run() == run()

    def test_sgd_step(self) -> None:
        params = ParameterSet()
        params.add("w", np.array([1.0]))
        optimizer = make_optimizer(OptimizerKind.SGD, params)
        backward((params["w"] * params["w"]).sum())
        optimizer.step(params, 0.1)
        assert params["w"].data[0] == pytest.approx(0.8)
        assert optimizer.state.step == 1

    @pytest.mark.parametrize(("epoch", "expected"), [(0, 1e-3), (299, 1e-3), (300, 1e-4), (899, 1e-5)])
    def test_step_decay(self, epoch: int, expected: float) -> None:
        assert step_decay_lr(1e-3, epoch) == expected


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self) -> None:
        rng = np.random.default_rng(5)
        params = ParameterSet()
        params.add_lstm("enc.lstm", 3, 2, rng)
        params.add_linear("dec.linear1", 2, 4, rng)
        state = OptimizerState.for_params(params)
        state.step = 42
        blob = encode_checkpoint(params, state)
        decoded, decoded_state = decode_checkpoint(blob)
        assert decoded == params
        assert list(decoded) == list(params)
        assert decoded_state is not None and decoded_state.step == 42
        assert encode_checkpoint(decoded, decoded_state) == blob

    def test_bad_magic(self) -> None:
        with pytest.raises(TeleDriveFormatError):
            decode_checkpoint(b"NOTACKPT" + b"\x00" * 16)

    def test_truncated(self) -> None:
        params = ParameterSet()
        params.add("w", np.ones(3))
        with pytest.raises(TeleDriveFormatError):
            decode_checkpoint(encode_checkpoint(params)[:-4])
