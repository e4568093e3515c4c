import dataclasses
import typing as t

import numpy as np

from .params import ParameterSet
from .tensor import Tensor, backward

__all__: tuple[str, ...] = ("GradientReport", "check_gradients", "finite_difference")

LossFn = t.Callable[[], Tensor]


@dataclasses.dataclass(frozen=True)
class GradientReport:
    """Worst relative error between reverse-mode and central-difference gradients, per parameter."""

    name: str
    errors: dict[str, float]
    tolerance: float

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


def finite_difference(loss_fn: LossFn, tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central differences of ``loss_fn`` with respect to every entry of ``tensor``."""
    numeric = np.zeros(tensor.shape)
    flat = tensor.data.reshape(-1)
    out = numeric.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = loss_fn().item()
        flat[i] = original - h
        lower = loss_fn().item()
        flat[i] = original
        out[i] = (upper - lower) / (2.0 * h)
    return numeric


def check_gradients(
    name: str,
    loss_fn: LossFn,
    params: ParameterSet,
    *,
    h: float = 1e-5,
    tolerance: float = 1e-4,
    floor: float = 1e-6,
) -> GradientReport:
    """
    Compare :func:`backward` against central differences for every parameter.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``.
    """
    params.zero_grad()
    backward(loss_fn())
    analytic = params.gradients()
    errors: dict[str, float] = {}
    for key, tensor in params.items():
        numeric = finite_difference(loss_fn, tensor, h)
        scale = np.maximum(np.maximum(np.abs(analytic[key]), np.abs(numeric)), floor)
        errors[key] = float(np.max(np.abs(analytic[key] - numeric) / scale)) if numeric.size else 0.0
    params.zero_grad()
    return GradientReport(name=name, errors=errors, tolerance=tolerance)
