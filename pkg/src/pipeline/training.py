import csv
import dataclasses
import math
import pathlib
import typing as t

import numpy as np

from src.config import ModelConfig, Role, TrainingConfig
from src.exceptions import TeleDriveDatasetError, TeleDriveRoleError
from src.logger import Logger
from src.model import CvaeConfig, CvaeModel
from src.numeric import Array, OptimizerKind, OptimizerState, backward, make_optimizer, step_decay_lr
from src.preprocess import CONTROL_DIM, WindowDataset
from src.seeding import SeedTree

__all__: tuple[str, ...] = (
    "EpochRecord",
    "TrainingResult",
    "Trainer",
    "write_history",
    "substitute_perception",
    "train_forward",
    "train_inverse",
)

HISTORY_FIELDS: tuple[str, ...] = ("epoch", "lr", "train_loss", "val_loss")
_GENERATION_BATCH = 256


@dataclasses.dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    val_loss: float


@dataclasses.dataclass(eq=False)
class TrainingResult:
    """The best-validation model together with the optimizer state at the end of training."""

    model: CvaeModel
    state: OptimizerState
    history: list[EpochRecord]
    best_epoch: int
    best_val_loss: float
    dataset_windows: int


def write_history(path: pathlib.Path, history: t.Sequence[EpochRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(HISTORY_FIELDS)
        for record in history:
            writer.writerow([record.epoch, repr(record.lr), repr(record.train_loss), repr(record.val_loss)])


class Trainer:
    """
    Mini-batch trainer with a fixed train/validation split.

    All randomness (split, shuffling, encoder noise) is drawn from streams of one
    seed, so two runs with the same seed produce identical parameters.
    """

    def __init__(self, model: CvaeModel, settings: TrainingConfig, *, seed: int, logger: Logger) -> None:
        self.model = model
        self.settings = settings
        self.seeds = SeedTree(seed)
        self.logger = logger

    def split(self, dataset: WindowDataset) -> tuple[Array, Array]:
        """Held-out windows never take part in parameter updates."""
        if len(dataset) < 2:
            raise TeleDriveDatasetError(f"need at least 2 windows to train, got {len(dataset)}.")
        windows = dataset.windows
        cap = self.settings.max_windows
        if cap is not None and len(windows) > cap:
            keep = np.sort(self.seeds.rng("subsample").permutation(len(windows))[:cap])
            windows = windows[keep]
        order = self.seeds.rng("split").permutation(len(windows))
        held_out = min(max(1, round(len(windows) * self.settings.validation_fraction)), len(windows) - 1)
        return windows[order[held_out:]], windows[order[:held_out]]

    def _validation_loss(self, windows: Array) -> float:
        rng = self.seeds.rng("validation")
        total = 0.0
        size = self.settings.batch_size
        for start in range(0, len(windows), size):
            batch = windows[start : start + size]
            total += self.model.loss(batch, rng=rng, trainable=False).total.item() * len(batch)
        return total / len(windows)

    def fit(self, dataset: WindowDataset) -> TrainingResult:
        if dataset.role is not self.model.config.role:
            raise TeleDriveRoleError(f"a {dataset.role} dataset cannot train a {self.model.config.role} model.")
        train, validation = self.split(dataset)
        params = self.model.params
        optimizer = make_optimizer(OptimizerKind(self.settings.optimizer), params)
        history: list[EpochRecord] = []
        best_arrays, best_epoch, best_val = params.arrays(), -1, math.inf
        size = self.settings.batch_size
        self.logger.info(
            f"training {self.model!r} on {len(train)} windows, validating on {len(validation)}, "
            f"{self.settings.epochs} epochs"
        )
        for epoch in range(self.settings.epochs):
            settings = self.settings
            lr = step_decay_lr(settings.learning_rate, epoch, settings.decay_period, settings.decay_factor)
            order = self.seeds.rng("shuffle", epoch).permutation(len(train))
            noise = self.seeds.rng("noise", epoch)
            running = 0.0
            for start in range(0, len(train), size):
                batch = train[order[start : start + size]]
                params.zero_grad()
                terms = self.model.loss(batch, rng=noise)
                backward(terms.total)
                optimizer.step(params, lr)
                running += terms.total.item() * len(batch)
            record = EpochRecord(epoch, lr, running / len(train), self._validation_loss(validation))
            history.append(record)
            if record.val_loss < best_val:
                best_arrays, best_epoch, best_val = params.arrays(), epoch, record.val_loss
            self.logger.progress(
                f"{self.model.config.role} epoch {epoch}: lr={lr:g} train={record.train_loss:.6f} "
                f"val={record.val_loss:.6f}"
            )
        params.zero_grad()
        final_state = optimizer.state
        params.assign(best_arrays)
        self.logger.info(f"best {self.model.config.role} validation loss {best_val:.6f} at epoch {best_epoch}")
        return TrainingResult(
            model=self.model,
            state=final_state,
            history=history,
            best_epoch=best_epoch,
            best_val_loss=best_val,
            dataset_windows=len(dataset),
        )


def substitute_perception(windows: Array, forward: CvaeModel, rng: np.random.Generator) -> Array:
    """Copy of ``windows`` whose current-step perception comes from the forward model."""
    forward.expect_role(Role.FORWARD)
    replaced = np.array(windows, dtype=np.float64)
    width = forward.config.perception_dim
    for start in range(0, len(replaced), _GENERATION_BATCH):
        batch = replaced[start : start + _GENERATION_BATCH]
        replaced[start : start + len(batch), -1, :width] = forward.generate(batch, rng)
    return replaced


def train_forward(
    dataset: WindowDataset,
    model_settings: ModelConfig,
    training: TrainingConfig,
    *,
    seed: int,
    logger: Logger,
) -> TrainingResult:
    """Forward model: learns the current perception from the history and the current control."""
    if dataset.role is not Role.FORWARD:
        raise TeleDriveRoleError(f"train_forward needs a forward dataset, got {dataset.role}.")
    config = CvaeConfig.from_settings(
        model_settings, Role.FORWARD, perception_dim=dataset.step_dim - CONTROL_DIM, control_dim=CONTROL_DIM
    )
    model = CvaeModel.initialize(config, SeedTree(seed).rng("init", 0))
    return Trainer(model, training, seed=seed, logger=logger).fit(dataset)


def train_inverse(
    dataset: WindowDataset,
    forward: t.Optional[CvaeModel],
    model_settings: ModelConfig,
    training: TrainingConfig,
    *,
    seed: int,
    logger: Logger,
) -> TrainingResult:
    """
    Inverse model: learns the current control.

    Unless ``training.ground_truth_perception`` is set, the current-step
    perception of every window is first replaced by the forward model's output.
    """
    if dataset.role is not Role.INVERSE:
        raise TeleDriveRoleError(f"train_inverse needs an inverse dataset, got {dataset.role}.")
    if not training.ground_truth_perception:
        if forward is None:
            raise TeleDriveRoleError("train_inverse needs a forward model unless ground_truth_perception is set.")
        logger.info("replacing current-step perception with forward-model samples")
        windows = substitute_perception(dataset.windows, forward, SeedTree(seed).rng("substitute"))
        dataset = WindowDataset(windows=windows, role=Role.INVERSE)
    config = CvaeConfig.from_settings(
        model_settings, Role.INVERSE, perception_dim=dataset.step_dim - CONTROL_DIM, control_dim=CONTROL_DIM
    )
    model = CvaeModel.initialize(config, SeedTree(seed).rng("init", 1))
    return Trainer(model, training, seed=seed, logger=logger).fit(dataset)
