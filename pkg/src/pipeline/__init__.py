from .collect import CollectedEpisode, Collector, EpisodeJob, TerrainCache, population_terrains
from .datasets import build_datasets, load_episode_steps
from .rollout import ModelDriver, denormalize_control, rollout, run_rollouts
from .training import (
    EpochRecord,
    Trainer,
    TrainingResult,
    substitute_perception,
    train_forward,
    train_inverse,
    write_history,
)

__all__: tuple[str, ...] = (
    "EpisodeJob",
    "CollectedEpisode",
    "TerrainCache",
    "Collector",
    "population_terrains",
    "build_datasets",
    "load_episode_steps",
    "EpochRecord",
    "TrainingResult",
    "Trainer",
    "write_history",
    "substitute_perception",
    "train_forward",
    "train_inverse",
    "denormalize_control",
    "ModelDriver",
    "rollout",
    "run_rollouts",
)
