import dataclasses

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.config import PreprocessConfig
from src.exceptions import TeleDriveDimensionError, TeleDriveInsufficientHistoryError
from src.numeric import Array
from src.sim import Episode

from .vectors import CONTROL_DIM, PERCEPTION_DIM, STEP_DIM, step_vector

__all__: tuple[str, ...] = (
    "WINDOW_LENGTH",
    "ConditionWindow",
    "preprocess_episode",
    "build_window",
    "windows_from_steps",
)

WINDOW_LENGTH: int = 10


@dataclasses.dataclass(frozen=True, eq=False)
class ConditionWindow:
    """Ten consecutive preprocessed ticks; row 9 is the current step."""

    steps: Array
    tick: int = WINDOW_LENGTH - 1

    def __post_init__(self) -> None:
        if self.steps.shape != (WINDOW_LENGTH, STEP_DIM):
            raise TeleDriveDimensionError.mismatch("condition window", self.steps.shape, (WINDOW_LENGTH, STEP_DIM))

    @property
    def perception(self) -> Array:
        return self.steps[:, :PERCEPTION_DIM]

    @property
    def control(self) -> Array:
        return self.steps[:, PERCEPTION_DIM : PERCEPTION_DIM + CONTROL_DIM]

    @property
    def current(self) -> Array:
        return self.steps[-1]


def preprocess_episode(episode: Episode, config: PreprocessConfig = PreprocessConfig()) -> Array:
    """Every tick of ``episode`` as a ``(T, 186)`` array."""
    if not episode.records:
        return np.zeros((0, STEP_DIM))
    return np.stack([step_vector(record, config) for record in episode.records])


def build_window(episode: Episode, tick: int, config: PreprocessConfig = PreprocessConfig()) -> ConditionWindow:
    """Window for ticks ``tick - 9 .. tick``."""
    if tick < WINDOW_LENGTH - 1:
        raise TeleDriveInsufficientHistoryError(
            f"a window needs {WINDOW_LENGTH} ticks of history, tick {tick} has only {tick + 1}."
        )
    if tick >= len(episode.records):
        raise TeleDriveInsufficientHistoryError(f"tick {tick} is past the last record ({len(episode.records) - 1}).")
    records = episode.records[tick - WINDOW_LENGTH + 1 : tick + 1]
    return ConditionWindow(steps=np.stack([step_vector(record, config) for record in records]), tick=tick)


def windows_from_steps(steps: Array) -> Array:
    """All sliding windows of a ``(T, 186)`` step array as ``(T - 9, 10, 186)``."""
    if steps.ndim != 2 or steps.shape[1] != STEP_DIM:
        raise TeleDriveDimensionError.mismatch("step array", steps.shape, (-1, STEP_DIM))
    if len(steps) < WINDOW_LENGTH:
        return np.zeros((0, WINDOW_LENGTH, STEP_DIM))
    return np.ascontiguousarray(sliding_window_view(steps, (WINDOW_LENGTH, STEP_DIM))[:, 0])
