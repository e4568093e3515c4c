import pathlib
import typing as t

from src.config import PreprocessConfig, Role
from src.exceptions import TeleDriveDatasetError
from src.logger import Logger
from src.numeric import Array
from src.preprocess import STEP_DIM, WINDOW_LENGTH, WindowDataset, preprocess_episode, windows_from_steps
from src.sim import Episode, read_episode

__all__: tuple[str, ...] = ("build_datasets", "load_episode_steps")


def load_episode_steps(
    paths: t.Sequence[pathlib.Path], config: PreprocessConfig = PreprocessConfig()
) -> list[tuple[str, Array]]:
    """Read episode logs and preprocess every tick; returns ``(label, steps)`` pairs in path order."""
    return [(str(path), preprocess_episode(read_episode(path), config)) for path in paths]


def build_datasets(
    episodes: t.Iterable[Episode | tuple[str, Array]],
    role: Role,
    *,
    logger: Logger,
    config: PreprocessConfig = PreprocessConfig(),
) -> WindowDataset:
    """
    Slide a ten-step window over every episode; an episode of ``n`` ticks gives ``n - 9`` windows.

    Accepts raw episodes or already preprocessed ``(label, steps)`` pairs.
    Episodes shorter than ten ticks are skipped with a warning.
    """
    parts: list[Array] = []
    seen = 0
    for item in episodes:
        seen += 1
        if isinstance(item, Episode):
            label, steps = f"{item.driver_id}@{item.terrain_id}#{item.seed}", preprocess_episode(item, config)
        else:
            label, steps = item
        if len(steps) < WINDOW_LENGTH:
            logger.warning(f"skipping {label}: {len(steps)} ticks is shorter than one {WINDOW_LENGTH}-step window")
            continue
        parts.append(windows_from_steps(steps))
    if seen == 0:
        raise TeleDriveDatasetError(f"no episodes given for the {role} dataset.")
    if not parts:
        raise TeleDriveDatasetError(f"none of the {seen} episodes is long enough for the {role} dataset.")
    dataset = WindowDataset.concatenate(parts, role, STEP_DIM)
    logger.info(f"built {role} dataset: {len(dataset)} windows from {len(parts)} episodes")
    return dataset
