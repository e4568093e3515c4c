import typing as t

import numpy as np

from src.config import Role, TrainingMode
from src.model import CvaeConfig, CvaeModel
from src.numeric import (
    GradientReport,
    ParameterSet,
    Tensor,
    check_gradients,
    gelu,
    kl_divergence,
    linear_forward,
    lstm_sequence,
    mse_loss,
)
from src.seeding import SeedTree

__all__: tuple[str, ...] = ("toy_cvae_config", "gradient_suite")

GRADCHECK_TOLERANCE = 1e-4


def toy_cvae_config(mode: TrainingMode = TrainingMode.PAPER) -> CvaeConfig:
    """Six perception plus two control values per step, four-unit layers."""
    return CvaeConfig(
        role=Role.INVERSE, perception_dim=6, control_dim=2, linear_width=4, hidden_size=4, mode=mode
    )


def _linear(rng: np.random.Generator) -> GradientReport:
    params = ParameterSet()
    params.add_linear("fc", 3, 2, rng)
    params["fc.bias"].data[:] = rng.normal(size=2)
    x, target = rng.normal(size=(4, 3)), rng.normal(size=(4, 2))
    return check_gradients(
        "linear", lambda: mse_loss(linear_forward(params.linear("fc"), Tensor(x)), target), params
    )


def _lstm(rng: np.random.Generator) -> GradientReport:
    params = ParameterSet()
    params.add_lstm("cell", 3, 4, rng)
    x = rng.normal(size=(2, 5, 3))

    def loss() -> Tensor:
        hidden = lstm_sequence(params.lstm("cell"), Tensor(x))
        return (hidden * hidden).sum()

    return check_gradients("lstm", loss, params)


def _gelu(rng: np.random.Generator) -> GradientReport:
    params = ParameterSet()
    x = params.add("x", rng.normal(size=7))
    return check_gradients("gelu", lambda: gelu(x).sum(), params)


def _mse(rng: np.random.Generator) -> GradientReport:
    params = ParameterSet()
    pred = params.add("pred", rng.normal(size=(3, 2)))
    target = rng.normal(size=(3, 2))
    return check_gradients("mse", lambda: mse_loss(pred, target), params)


def _kl(rng: np.random.Generator) -> GradientReport:
    params = ParameterSet()
    mu = params.add("mu", rng.normal(size=(2, 3)))
    logvar = params.add("logvar", 0.5 * rng.normal(size=(2, 3)))
    return check_gradients("kl", lambda: kl_divergence(mu, logvar), params)


def _cvae(mode: TrainingMode, rng: np.random.Generator) -> GradientReport:
    config = toy_cvae_config(mode)
    model = CvaeModel.initialize(config, rng)
    windows = rng.uniform(size=(2, config.window_length, config.step_dim))
    eps = rng.standard_normal((2, config.generated_dim))
    noise = rng.standard_normal((2, config.generated_dim))
    return check_gradients(
        f"cvae-{mode}",
        lambda: model.loss(windows, eps=eps, noise=noise).total,
        model.params,
        tolerance=GRADCHECK_TOLERANCE,
    )


def gradient_suite(seed: int = 0) -> list[GradientReport]:
    """Finite-difference checks of every layer, both losses and the toy model in both training modes."""
    seeds = SeedTree(seed)
    checks: list[t.Callable[[np.random.Generator], GradientReport]] = [_linear, _lstm, _gelu, _mse, _kl]
    reports = [check(seeds.rng("gradcheck", index)) for index, check in enumerate(checks)]
    for index, mode in enumerate(TrainingMode, start=len(checks)):
        reports.append(_cvae(mode, seeds.rng("gradcheck", index)))
    return reports
