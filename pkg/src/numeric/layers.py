import dataclasses
import typing as t

import numpy as np

from src.exceptions import TeleDriveDimensionError

from .tensor import Tensor, stack

__all__: tuple[str, ...] = (
    "LinearParams",
    "LstmParams",
    "linear_forward",
    "lstm_step",
    "lstm_sequence",
    "gelu",
    "sigmoid",
    "tanh",
    "mse_loss",
    "kl_divergence",
)


@dataclasses.dataclass(frozen=True)
class LinearParams:
    weight: Tensor
    bias: Tensor

    @property
    def in_features(self) -> int:
        return self.weight.shape[0]

    @property
    def out_features(self) -> int:
        return self.weight.shape[1]


@dataclasses.dataclass(frozen=True)
class LstmParams:
    """LSTM weights with gates packed in the order input, forget, candidate, output."""

    weight_ih: Tensor
    weight_hh: Tensor
    bias: Tensor

    @property
    def input_size(self) -> int:
        return self.weight_ih.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.weight_hh.shape[0]


def linear_forward(params: LinearParams, x: Tensor) -> Tensor:
    """``x @ W + b``, applied to the last axis so sequences are handled step by step."""
    if x.shape[-1:] != (params.in_features,):
        raise TeleDriveDimensionError.mismatch("linear input vs weight", x.shape, params.weight.shape)
    return x @ params.weight + params.bias


def gelu(x: Tensor) -> Tensor:
    return x.gelu()


def sigmoid(x: Tensor) -> Tensor:
    return x.sigmoid()


def tanh(x: Tensor) -> Tensor:
    return x.tanh()


def _lstm_cell(gates_in: Tensor, hidden: Tensor, cell: Tensor, params: LstmParams) -> tuple[Tensor, Tensor]:
    size = params.hidden_size
    gates = gates_in + hidden @ params.weight_hh + params.bias
    input_gate = gates[..., 0:size].sigmoid()
    forget_gate = gates[..., size : 2 * size].sigmoid()
    candidate = gates[..., 2 * size : 3 * size].tanh()
    output_gate = gates[..., 3 * size : 4 * size].sigmoid()
    new_cell = forget_gate * cell + input_gate * candidate
    new_hidden = output_gate * new_cell.tanh()
    return new_hidden, new_cell


def lstm_step(params: LstmParams, x_t: Tensor, hidden: Tensor, cell: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM update; a pure function of its arguments."""
    if x_t.shape[-1:] != (params.input_size,):
        raise TeleDriveDimensionError.mismatch("lstm input vs weight_ih", x_t.shape, params.weight_ih.shape)
    size = params.hidden_size
    if hidden.shape[-1:] != (size,) or cell.shape != hidden.shape:
        raise TeleDriveDimensionError.mismatch("lstm hidden vs cell", hidden.shape, cell.shape)
    return _lstm_cell(x_t @ params.weight_ih, hidden, cell, params)


def lstm_sequence(params: LstmParams, x: Tensor) -> Tensor:
    """Run the LSTM over a (batch, time, features) sequence from zero state, returning every hidden state."""
    if x.data.ndim != 3 or x.shape[-1] != params.input_size:
        raise TeleDriveDimensionError.mismatch("lstm sequence vs weight_ih", x.shape, params.weight_ih.shape)
    batch, steps = x.shape[0], x.shape[1]
    projected = x @ params.weight_ih
    hidden = Tensor(np.zeros((batch, params.hidden_size)))
    cell = Tensor(np.zeros((batch, params.hidden_size)))
    outputs: list[Tensor] = []
    for step in range(steps):
        hidden, cell = _lstm_cell(projected[:, step, :], hidden, cell, params)
        outputs.append(hidden)
    return stack(outputs, axis=1)


def mse_loss(pred: Tensor, target: t.Union[Tensor, np.ndarray]) -> Tensor:
    """Mean of squared elementwise differences."""
    goal = Tensor.lift(target)
    if pred.shape != goal.shape:
        raise TeleDriveDimensionError.mismatch("mse prediction vs target", pred.shape, goal.shape)
    diff = pred - goal
    return (diff * diff).mean()


def kl_divergence(mu: Tensor, logvar: Tensor) -> Tensor:
    """
    KL(N(mu, exp(logvar)) || N(0, 1)), summed over the latent axis and averaged over the batch.

    A 1-D input counts as a batch of one.
    """
    if mu.shape != logvar.shape:
        raise TeleDriveDimensionError.mismatch("kl mu vs logvar", mu.shape, logvar.shape)
    terms = (1.0 + logvar - mu * mu - logvar.exp()).sum(axis=-1)
    per_sample = terms * -0.5
    return per_sample.mean()
