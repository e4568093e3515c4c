import pathlib
import typing as t

import numpy as np
import pydantic
import yaml
from pydantic import BaseModel, ConfigDict

from src.config import Role, TrainingMode
from src.exceptions import TeleDriveFileNotFoundError, TeleDriveFormatError, TeleDriveRoleError
from src.numeric import OptimizerState, read_checkpoint, write_checkpoint

from .cvae import CvaeConfig, CvaeModel

__all__: tuple[str, ...] = ("ModelSidecar", "sidecar_path", "save_model", "load_model")

SIDECAR_FORMAT = "teledrive-model"
SIDECAR_VERSION = 1


class ModelSidecar(BaseModel):
    """Human-readable description stored next to a binary checkpoint."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    format: t.Literal["teledrive-model"] = SIDECAR_FORMAT
    version: t.Literal[1] = SIDECAR_VERSION
    role: Role
    mode: TrainingMode
    literal_eq4: bool
    perception_dim: int
    control_dim: int
    linear_width: int
    hidden_size: int
    window_length: int
    beta: float
    parameter_count: int
    dataset_fingerprint: t.Optional[str] = None
    best_epoch: t.Optional[int] = None
    best_val_loss: t.Optional[float] = None

    @classmethod
    def describe(cls, model: CvaeModel, **extra: t.Any) -> "ModelSidecar":
        c = model.config
        return cls(
            role=c.role,
            mode=c.mode,
            literal_eq4=c.literal_eq4,
            perception_dim=c.perception_dim,
            control_dim=c.control_dim,
            linear_width=c.linear_width,
            hidden_size=c.hidden_size,
            window_length=c.window_length,
            beta=c.beta,
            parameter_count=model.params.size,
            **extra,
        )

    def to_config(self) -> CvaeConfig:
        return CvaeConfig(
            role=self.role,
            perception_dim=self.perception_dim,
            control_dim=self.control_dim,
            linear_width=self.linear_width,
            hidden_size=self.hidden_size,
            window_length=self.window_length,
            beta=self.beta,
            mode=self.mode,
            literal_eq4=self.literal_eq4,
        )


def sidecar_path(path: pathlib.Path) -> pathlib.Path:
    return path.with_suffix(".yaml")


def save_model(
    path: pathlib.Path,
    model: CvaeModel,
    state: t.Optional[OptimizerState] = None,
    **extra: t.Any,
) -> ModelSidecar:
    sidecar = ModelSidecar.describe(model, **extra)
    write_checkpoint(path, model.params, state)
    sidecar_path(path).write_text(
        yaml.safe_dump(sidecar.model_dump(mode="json"), sort_keys=False), encoding="utf-8"
    )
    return sidecar


def load_model(
    path: pathlib.Path, *, expected_role: t.Optional[Role] = None
) -> tuple[CvaeModel, t.Optional[OptimizerState], ModelSidecar]:
    """Load a checkpoint and its sidecar, checking parameter names and shapes against the recorded config."""
    side = sidecar_path(path)
    if not side.exists():
        raise TeleDriveFileNotFoundError(f"model sidecar {side} does not exist.")
    try:
        sidecar = ModelSidecar.model_validate(yaml.safe_load(side.read_text(encoding="utf-8")))
    except (yaml.YAMLError, pydantic.ValidationError) as e:
        raise TeleDriveFormatError(f"{side}: bad model sidecar: {e}") from None
    if expected_role is not None and sidecar.role is not expected_role:
        raise TeleDriveRoleError(f"{path} holds a {sidecar.role} model, expected {expected_role}.")
    params, state = read_checkpoint(path)
    config = sidecar.to_config()
    template = CvaeModel.template(config, np.random.default_rng(0))
    layout = [(name, tensor.shape) for name, tensor in template.items()]
    found = [(name, tensor.shape) for name, tensor in params.items()]
    if layout != found:
        raise TeleDriveFormatError(f"{path}: parameters do not match the {config.role} model described by {side}.")
    return CvaeModel(config, params), state, sidecar
