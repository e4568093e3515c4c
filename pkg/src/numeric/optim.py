import dataclasses
import decimal
import enum
import typing as t
from abc import ABC, abstractmethod

import numpy as np

from src.exceptions import TeleDriveDimensionError, TeleDriveOutOfRangeError

from .params import ParameterSet
from .tensor import Array

__all__: tuple[str, ...] = (
    "OptimizerKind",
    "OptimizerState",
    "Optimizer",
    "Adam",
    "Sgd",
    "adam_step",
    "sgd_step",
    "step_decay_lr",
    "make_optimizer",
)

BETA1: float = 0.9
BETA2: float = 0.999
EPSILON: float = 1e-8


class OptimizerKind(enum.StrEnum):
    ADAM = "adam"
    SGD = "sgd"


@dataclasses.dataclass
class OptimizerState:
    step: int = 0
    first_moment: dict[str, Array] = dataclasses.field(default_factory=dict)
    second_moment: dict[str, Array] = dataclasses.field(default_factory=dict)

    @classmethod
    def for_params(cls, params: ParameterSet) -> "OptimizerState":
        return cls(
            step=0,
            first_moment={name: np.zeros(tensor.shape) for name, tensor in params.items()},
            second_moment={name: np.zeros(tensor.shape) for name, tensor in params.items()},
        )

    def arrays(self) -> dict[str, Array]:
        entries = {f"m:{name}": value for name, value in self.first_moment.items()}
        entries.update({f"v:{name}": value for name, value in self.second_moment.items()})
        return entries

    @classmethod
    def from_arrays(cls, step: int, arrays: t.Mapping[str, Array]) -> "OptimizerState":
        first = {key[2:]: value for key, value in arrays.items() if key.startswith("m:")}
        second = {key[2:]: value for key, value in arrays.items() if key.startswith("v:")}
        return cls(step=step, first_moment=first, second_moment=second)


def _check_aligned(params: ParameterSet, grads: t.Mapping[str, Array]) -> None:
    for name, tensor in params.items():
        if name not in grads:
            raise TeleDriveDimensionError(f"missing gradient for parameter {name!r}.")
        if grads[name].shape != tensor.shape:
            raise TeleDriveDimensionError.mismatch(f"gradient {name!r}", tuple(grads[name].shape), tensor.shape)


def adam_step(
    params: ParameterSet,
    grads: t.Mapping[str, Array],
    state: OptimizerState,
    lr: float,
    *,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPSILON,
) -> OptimizerState:
    """Bias-corrected Adam update of ``params`` in place; returns the advanced state."""
    _check_aligned(params, grads)
    step = state.step + 1
    first: dict[str, Array] = {}
    second: dict[str, Array] = {}
    correction1 = 1.0 - beta1**step
    correction2 = 1.0 - beta2**step
    for name, tensor in params.items():
        grad = grads[name]
        m = beta1 * state.first_moment.get(name, np.zeros(tensor.shape)) + (1.0 - beta1) * grad
        v = beta2 * state.second_moment.get(name, np.zeros(tensor.shape)) + (1.0 - beta2) * grad * grad
        tensor.data = tensor.data - lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
        first[name], second[name] = m, v
    return OptimizerState(step=step, first_moment=first, second_moment=second)


def sgd_step(params: ParameterSet, grads: t.Mapping[str, Array], state: OptimizerState, lr: float) -> OptimizerState:
    _check_aligned(params, grads)
    for name, tensor in params.items():
        tensor.data = tensor.data - lr * grads[name]
    return dataclasses.replace(state, step=state.step + 1)


def step_decay_lr(initial_lr: float, epoch: int, period: int = 300, factor: float = 0.1) -> float:
    """
    ``initial_lr * factor ** (epoch // period)``.

    Evaluated in decimal so that 1e-3 decays to exactly 1e-4 and 1e-5.
    """
    if epoch < 0:
        raise TeleDriveOutOfRangeError(f"epoch must be non-negative, got {epoch}.")
    drops = epoch // period
    value = decimal.Decimal(repr(initial_lr)) * decimal.Decimal(repr(factor)) ** drops
    return float(value)


class Optimizer(ABC):
    """Base class for optimizers that update a ParameterSet from its accumulated gradients."""

    def __init__(self, state: OptimizerState) -> None:
        self.state = state

    @property
    @abstractmethod
    def kind(self) -> OptimizerKind:
        raise NotImplementedError

    @abstractmethod
    def apply(self, params: ParameterSet, grads: t.Mapping[str, Array], lr: float) -> None:
        raise NotImplementedError

    def step(self, params: ParameterSet, lr: float) -> None:
        self.apply(params, params.gradients(), lr)


class Adam(Optimizer):
    @property
    def kind(self) -> OptimizerKind:
        return OptimizerKind.ADAM

    def apply(self, params: ParameterSet, grads: t.Mapping[str, Array], lr: float) -> None:
        self.state = adam_step(params, grads, self.state, lr)


class Sgd(Optimizer):
    @property
    def kind(self) -> OptimizerKind:
        return OptimizerKind.SGD

    def apply(self, params: ParameterSet, grads: t.Mapping[str, Array], lr: float) -> None:
        self.state = sgd_step(params, grads, self.state, lr)


def make_optimizer(kind: OptimizerKind, params: ParameterSet) -> Optimizer:
    state = OptimizerState.for_params(params)
    return Adam(state) if kind is OptimizerKind.ADAM else Sgd(state)
