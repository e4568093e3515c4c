import dataclasses
import typing as t

import numpy as np

from src.config import ModelConfig, Role, TrainingMode
from src.exceptions import TeleDriveDimensionError, TeleDriveNonFiniteError, TeleDriveRoleError
from src.numeric import (
    Array,
    LinearParams,
    LstmParams,
    ParameterSet,
    Tensor,
    concat,
    gelu,
    kl_divergence,
    linear_forward,
    lstm_sequence,
    mse_loss,
    sigmoid,
)
from src.preprocess import CONTROL_DIM, PERCEPTION_DIM, WINDOW_LENGTH

__all__: tuple[str, ...] = ("CvaeConfig", "CvaeModel", "LossTerms")


@dataclasses.dataclass(frozen=True)
class CvaeConfig:
    """
    Shape and behaviour of one conditional VAE.

    The latent width equals the generated width ``N``: the perception width for
    the forward role, the control width for the inverse role.
    """

    role: Role
    perception_dim: int = PERCEPTION_DIM
    control_dim: int = CONTROL_DIM
    linear_width: int = 256
    hidden_size: int = 256
    window_length: int = WINDOW_LENGTH
    beta: float = 0.01
    mode: TrainingMode = TrainingMode.PAPER
    literal_eq4: bool = False

    def __post_init__(self) -> None:
        if self.window_length != WINDOW_LENGTH:
            raise TeleDriveDimensionError(f"window length must be {WINDOW_LENGTH}, got {self.window_length}.")
        if min(self.perception_dim, self.control_dim, self.linear_width, self.hidden_size) < 1:
            raise TeleDriveDimensionError("all model dimensions must be positive.")

    @classmethod
    def from_settings(
        cls,
        settings: ModelConfig,
        role: Role,
        *,
        perception_dim: int = PERCEPTION_DIM,
        control_dim: int = CONTROL_DIM,
    ) -> "CvaeConfig":
        return cls(
            role=role,
            perception_dim=perception_dim,
            control_dim=control_dim,
            linear_width=settings.linear_width,
            hidden_size=settings.hidden_size,
            beta=settings.beta,
            mode=settings.mode,
            literal_eq4=settings.literal_eq4,
        )

    @property
    def step_dim(self) -> int:
        return self.perception_dim + self.control_dim

    @property
    def generated_dim(self) -> int:
        return self.perception_dim if self.role is Role.FORWARD else self.control_dim

    @property
    def target_slice(self) -> slice:
        """Columns of a window step that this role generates and masks at the current step."""
        if self.role is Role.FORWARD:
            return slice(0, self.perception_dim)
        return slice(self.perception_dim, self.step_dim)


@dataclasses.dataclass(frozen=True)
class LossTerms:
    total: Tensor
    reconstruction: float
    kl: float


@dataclasses.dataclass(frozen=True)
class _Layers:
    enc_linear1: LinearParams
    enc_lstm: LstmParams
    enc_linear2: LinearParams
    enc_mu: LinearParams
    enc_logvar: LinearParams
    dec_lstm: LstmParams
    dec_linear1: LinearParams
    dec_linear2: LinearParams
    dec_linear3: LinearParams
    dec_linear4: LinearParams


def _frozen_linear(params: LinearParams) -> LinearParams:
    return LinearParams(Tensor(params.weight.data), Tensor(params.bias.data))


def _frozen_lstm(params: LstmParams) -> LstmParams:
    return LstmParams(Tensor(params.weight_ih.data), Tensor(params.weight_hh.data), Tensor(params.bias.data))


class CvaeModel:
    """
    LSTM conditional VAE over ten-step condition windows.

    The encoder maps the assembled sequence through a GELU linear layer, an LSTM
    and a second GELU linear layer to parallel mean and log-variance heads. The
    decoder runs an LSTM over the same window with the latent in the injected
    slot, followed by three GELU linear layers and a sigmoid output layer.
    Only the current (last) step of either side is used.
    """

    def __init__(self, config: CvaeConfig, params: ParameterSet) -> None:
        self.config = config
        self.params = params

    def __repr__(self) -> str:
        return f"CvaeModel(role={self.config.role}, mode={self.config.mode}, parameters={self.params.size})"

    @classmethod
    def template(cls, config: CvaeConfig, rng: np.random.Generator) -> ParameterSet:
        width, hidden = config.linear_width, config.hidden_size
        assembled = config.step_dim + config.generated_dim
        params = ParameterSet()
        params.add_linear("enc.linear1", assembled, width, rng)
        params.add_lstm("enc.lstm", width, hidden, rng)
        params.add_linear("enc.linear2", hidden, width, rng)
        params.add_linear("enc.mu", width, config.generated_dim, rng)
        params.add_linear("enc.logvar", width, config.generated_dim, rng)
        params.add_lstm("dec.lstm", assembled, hidden, rng)
        params.add_linear("dec.linear1", hidden, width, rng)
        params.add_linear("dec.linear2", width, width, rng)
        params.add_linear("dec.linear3", width, width, rng)
        params.add_linear("dec.linear4", width, config.generated_dim, rng)
        return params

    @classmethod
    def initialize(cls, config: CvaeConfig, rng: np.random.Generator) -> "CvaeModel":
        return cls(config, cls.template(config, rng))

    def _layers(self, *, trainable: bool) -> _Layers:
        p = self.params
        linear = p.linear if trainable else (lambda prefix: _frozen_linear(p.linear(prefix)))
        lstm = p.lstm if trainable else (lambda prefix: _frozen_lstm(p.lstm(prefix)))
        return _Layers(
            enc_linear1=linear("enc.linear1"),
            enc_lstm=lstm("enc.lstm"),
            enc_linear2=linear("enc.linear2"),
            enc_mu=linear("enc.mu"),
            enc_logvar=linear("enc.logvar"),
            dec_lstm=lstm("dec.lstm"),
            dec_linear1=linear("dec.linear1"),
            dec_linear2=linear("dec.linear2"),
            dec_linear3=linear("dec.linear3"),
            dec_linear4=linear("dec.linear4"),
        )

    def _batch(self, windows: Array) -> Array:
        windows = np.asarray(windows, dtype=np.float64)
        if windows.ndim == 2:
            windows = windows[None]
        expected = (self.config.window_length, self.config.step_dim)
        if windows.ndim != 3 or windows.shape[1:] != expected:
            raise TeleDriveDimensionError.mismatch("condition window", windows.shape, (-1, *expected))
        return windows

    def _vector(self, value: Tensor | Array, batch: int, what: str) -> Tensor:
        tensor = Tensor.lift(value)
        if tensor.data.ndim == 1:
            tensor = tensor[None, :]
        n = self.config.generated_dim
        if tensor.data.ndim != 2 or tensor.shape[1] != n or tensor.shape[0] not in (1, batch):
            raise TeleDriveDimensionError.mismatch(what, tensor.shape, (batch, n))
        return tensor

    def masked(self, windows: Array) -> Array:
        """Copy of ``windows`` with the generated slice of the current step zeroed."""
        base = self._batch(windows).copy()
        base[:, -1, self.config.target_slice] = 0.0
        return base

    def assemble_input(self, windows: Array, injected: Tensor | Array) -> Tensor:
        """
        Masked window with ``injected`` appended to the current step.

        Earlier steps carry zeros in the appended slot so every step is
        ``step_dim + N`` wide.
        """
        base = self.masked(windows)
        batch = base.shape[0]
        vector = self._vector(injected, batch, "injected vector")
        if vector.shape[0] != batch:
            vector = concat([vector] * batch, axis=0)
        padding = Tensor(np.zeros((batch, self.config.window_length - 1, self.config.generated_dim)))
        slot = concat([padding, vector[:, None, :]], axis=1)
        return concat([Tensor(base), slot], axis=-1)

    def _encode(self, layers: _Layers, x: Tensor) -> tuple[Tensor, Tensor]:
        hidden = gelu(linear_forward(layers.enc_linear1, x))
        features = gelu(linear_forward(layers.enc_linear2, lstm_sequence(layers.enc_lstm, hidden)))
        return linear_forward(layers.enc_mu, features), linear_forward(layers.enc_logvar, features)

    def encode(self, x: Tensor) -> tuple[Tensor, Tensor]:
        """Per-step mean and log-variance, each ``(batch, 10, N)``."""
        return self._encode(self._layers(trainable=True), x)

    def reparameterize(self, mu: Tensor, logvar: Tensor, eps: Tensor | Array) -> Tensor:
        """``mu + exp(logvar / 2) * eps``, or ``mu + exp(logvar) * eps`` under ``literal_eq4``."""
        noise = Tensor.lift(eps)
        if mu.shape != logvar.shape or noise.shape != mu.shape:
            raise TeleDriveDimensionError.mismatch("reparameterize mu vs eps", mu.shape, noise.shape)
        scale = logvar.exp() if self.config.literal_eq4 else (logvar * 0.5).exp()
        return mu + scale * noise

    def _decode(self, layers: _Layers, windows: Array, z_t: Tensor | Array) -> Tensor:
        x = self.assemble_input(windows, z_t)
        hidden = lstm_sequence(layers.dec_lstm, x)
        hidden = gelu(linear_forward(layers.dec_linear1, hidden))
        hidden = gelu(linear_forward(layers.dec_linear2, hidden))
        hidden = gelu(linear_forward(layers.dec_linear3, hidden))
        return sigmoid(linear_forward(layers.dec_linear4, hidden))

    def decode(self, windows: Array, z_t: Tensor | Array) -> Tensor:
        """Generated sequence ``(batch, 10, N)``; the last step is the simulated vector."""
        return self._decode(self._layers(trainable=True), windows, z_t)

    def forward(
        self, windows: Array, injected: Tensor | Array, eps: Tensor | Array, *, trainable: bool = True
    ) -> tuple[Tensor, Tensor, Tensor]:
        """``(g_t, mu_t, logvar_t)`` for an explicit encoder input and reparameterization noise."""
        layers = self._layers(trainable=trainable)
        mu, logvar = self._encode(layers, self.assemble_input(windows, injected))
        mu_t, logvar_t = mu[:, -1, :], logvar[:, -1, :]
        noise = np.broadcast_to(self._vector(eps, mu_t.shape[0], "eps").data, mu_t.shape)
        z_t = self.reparameterize(mu_t, logvar_t, noise)
        generated = self._decode(layers, windows, z_t)
        return generated[:, -1, :], mu_t, logvar_t

    def _target(self, windows: Array, target: t.Optional[Array]) -> Array:
        if target is None:
            return windows[:, -1, self.config.target_slice]
        target = np.asarray(target, dtype=np.float64)
        if target.ndim == 3:
            target = target[:, -1, :]
        elif target.ndim == 1:
            target = target[None, :]
        if target.shape != (windows.shape[0], self.config.generated_dim):
            expected = (windows.shape[0], self.config.generated_dim)
            raise TeleDriveDimensionError.mismatch("loss target", target.shape, expected)
        return target

    def loss(
        self,
        windows: Array,
        target: t.Optional[Array] = None,
        *,
        eps: t.Optional[Array] = None,
        noise: t.Optional[Array] = None,
        rng: t.Optional[np.random.Generator] = None,
        beta: t.Optional[float] = None,
        trainable: bool = True,
    ) -> LossTerms:
        """
        Current-step reconstruction MSE plus ``beta`` times the current-step KL term.

        ``target`` defaults to the logged slice of the current step. The encoder
        sees ``noise`` in paper mode and the target itself in standard mode.
        Missing ``eps``/``noise`` are drawn from ``rng``. With ``trainable=False``
        no gradient tape is recorded.
        """
        batch = self._batch(windows)
        goal = self._target(batch, target)
        shape = (batch.shape[0], self.config.generated_dim)
        generator = rng if rng is not None else np.random.default_rng()
        if eps is None:
            eps = generator.standard_normal(shape)
        if self.config.mode is TrainingMode.STANDARD_CVAE:
            injected = goal
        else:
            injected = noise if noise is not None else generator.standard_normal(shape)
        generated, mu_t, logvar_t = self.forward(batch, injected, eps, trainable=trainable)
        reconstruction = mse_loss(generated, goal)
        kl = kl_divergence(mu_t, logvar_t)
        weight = self.config.beta if beta is None else beta
        total = reconstruction + kl * weight
        if not np.isfinite(total.item()):
            raise TeleDriveNonFiniteError(f"non-finite loss for the {self.config.role} model.")
        return LossTerms(total=total, reconstruction=reconstruction.item(), kl=kl.item())

    def generate(self, windows: Array, rng: np.random.Generator) -> Array:
        """
        Sample the current-step vector for each window; a single ``(10, D)`` window gives a 1-D result.

        Paper mode pushes fresh noise through the encoder; standard mode samples the latent from the prior.
        """
        single = np.asarray(windows).ndim == 2
        batch = self._batch(windows)
        shape = (batch.shape[0], self.config.generated_dim)
        layers = self._layers(trainable=False)
        if self.config.mode is TrainingMode.STANDARD_CVAE:
            z_t = Tensor(rng.standard_normal(shape))
        else:
            noise = rng.standard_normal(shape)
            eps = rng.standard_normal(shape)
            mu, logvar = self._encode(layers, self.assemble_input(batch, noise))
            z_t = self.reparameterize(mu[:, -1, :], logvar[:, -1, :], eps)
        output = self._decode(layers, batch, z_t)[:, -1, :].data
        if not np.all(np.isfinite(output)):
            raise TeleDriveNonFiniteError(f"the {self.config.role} model produced a non-finite vector.")
        return output[0].copy() if single else output.copy()

    def expect_role(self, role: Role) -> "CvaeModel":
        if self.config.role is not role:
            raise TeleDriveRoleError(f"expected a {role} model, got a {self.config.role} model.")
        return self
