import enum
import hashlib
import math
import os
import pathlib
import typing as t

import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, Field

from src.exceptions import TeleDriveConfigError, TeleDriveFileNotFoundError

__all__: tuple[str, ...] = (
    "Role",
    "TrainingMode",
    "Population",
    "TerrainConfig",
    "VehicleConfig",
    "LidarConfig",
    "DriverProfile",
    "DriversConfig",
    "CollectionConfig",
    "PreprocessConfig",
    "ModelConfig",
    "TrainingConfig",
    "RolloutConfig",
    "EvaluationConfig",
    "TeleDriveConfig",
    "parse_config",
    "load_config",
    "serialize_config",
    "config_hash",
    "resolve_threads",
)

THREADS_ENV = "TDG_THREADS"


class Role(enum.StrEnum):
    """Which current-step slice a model generates."""

    FORWARD = "forward"
    INVERSE = "inverse"


class TrainingMode(enum.StrEnum):
    PAPER = "paper"
    STANDARD_CVAE = "standard_cvae"


class Population(enum.StrEnum):
    ORACLE = "oracle"
    EXPERIENCED = "experienced"
    INEXPERIENCED = "inexperienced"


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TerrainConfig(Section):
    length: float = Field(900.0, ge=100.0)
    width: float = Field(20.0, gt=0.0, description="mean corridor width in metres")
    width_variation: float = Field(4.0, ge=0.0, description="peak-to-peak change of the corridor width")
    curviness: float = Field(1.0, ge=0.0, le=1.0)
    min_radius: float = Field(40.0, gt=0.0)
    max_turn_deg: float = Field(50.0, gt=0.0, lt=90.0)
    straight_length: tuple[float, float] = (40.0, 120.0)
    wall_height: float = Field(8.0, gt=0.0)
    section_count: int = Field(9, ge=1)
    sample_spacing: float = Field(0.5, gt=0.0, le=5.0)
    roughness_deg: float = Field(2.0, ge=0.0, le=20.0)


class VehicleConfig(Section):
    wheelbase: float = Field(3.0, gt=0.0)
    max_steer_deg: float = Field(30.0, gt=0.0, lt=90.0)
    max_accel: float = Field(3.0, gt=0.0)
    max_brake: float = Field(6.0, gt=0.0)
    drag: float = Field(0.1, ge=0.0)
    max_speed: float = Field(30.0, gt=0.0, le=30.0)
    width: float = Field(2.0, gt=0.0)


class LidarConfig(Section):
    channels: int = Field(16, ge=1)
    min_elevation_deg: float = Field(-15.0, ge=-89.0, le=0.0)
    max_elevation_deg: float = Field(15.0, ge=0.0, le=89.0)
    azimuth_step_deg: float = Field(1.0, gt=0.0, le=10.0)
    max_range: float = Field(50.0, gt=0.0)
    mount_height: float = Field(2.0, gt=0.0)


class DriverProfile(Section):
    name: str
    lookahead: float = Field(gt=0.0)
    target_speed: float = Field(gt=0.0, le=30.0)
    steer_noise_sd: float = Field(0.0, ge=0.0)
    pedal_noise_sd: float = Field(0.0, ge=0.0)
    reaction_lag: int = Field(0, ge=0)
    seed: int = 0


def _oracle_profile() -> DriverProfile:
    return DriverProfile(name="oracle", lookahead=12.0, target_speed=12.0, seed=100)


def _experienced_profiles() -> list[DriverProfile]:
    return [
        DriverProfile(
            name=f"experienced-{i + 1}",
            lookahead=11.0 + 0.25 * i,
            target_speed=11.0 + 0.5 * i,
            steer_noise_sd=round(0.01 + 0.005 * i, 4),
            pedal_noise_sd=round(0.01 + 0.005 * i, 4),
            reaction_lag=0,
            seed=101 + i,
        )
        for i in range(5)
    ]


def _inexperienced_profiles() -> list[DriverProfile]:
    """
    Laggier, noisier drivers. The target speed keeps the pursuit loop at a
    fixed fraction of its stability limit: with the lag filter acting as a
    delay of ``response`` seconds, pure pursuit oscillates once
    ``response * speed`` reaches the lookahead.
    """
    tick = 0.1
    profiles: list[DriverProfile] = []
    for i in range(14):
        lag = 2 + i % 4
        lookahead = round(9.0 + ((i * 5) % 14) / 13, 3)
        response = tick / math.log((1 + lag) / lag) + tick / 2
        noise = round(0.12 + 0.01 * (lag - 2), 4)
        profiles.append(
            DriverProfile(
                name=f"inexperienced-{i + 1}",
                lookahead=lookahead,
                target_speed=round(min(14.0, 0.55 * lookahead / response), 3),
                steer_noise_sd=noise,
                pedal_noise_sd=noise,
                reaction_lag=lag,
                seed=201 + i,
            )
        )
    return profiles


class DriversConfig(Section):
    oracle: DriverProfile = Field(default_factory=_oracle_profile)
    experienced: list[DriverProfile] = Field(default_factory=_experienced_profiles)
    inexperienced: list[DriverProfile] = Field(default_factory=_inexperienced_profiles)
    speed_gain: float = Field(0.5, gt=0.0)
    lateral_accel: float = Field(2.5, gt=0.0, description="comfortable lateral acceleration in curves, m/s^2")
    preview_seconds: float = Field(2.0, ge=0.0)

    def population(self, population: Population) -> list[DriverProfile]:
        if population is Population.ORACLE:
            return [self.oracle]
        return list(self.experienced if population is Population.EXPERIENCED else self.inexperienced)


class CollectionConfig(Section):
    experienced_terrains: list[int] = Field(default_factory=lambda: [1, 2, 3])
    inexperienced_terrains: list[int] = Field(default_factory=lambda: [4, 5])
    repeats: int = Field(2, ge=1)
    tick_limit: int = Field(3000, gt=100)


class PreprocessConfig(Section):
    slope_threshold_deg: float = Field(45.0, gt=0.0, lt=90.0)
    max_distance: float = Field(50.0, gt=0.0)
    max_speed: float = Field(30.0, gt=0.0)


class ModelConfig(Section):
    linear_width: int = Field(64, ge=1)
    hidden_size: int = Field(64, ge=1)
    beta: float = Field(0.01, ge=0.0)
    mode: TrainingMode = TrainingMode.PAPER
    literal_eq4: bool = False


class TrainingConfig(Section):
    epochs: int = Field(200, gt=0)
    batch_size: int = Field(64, gt=0)
    learning_rate: float = Field(1e-3, gt=0.0)
    decay_period: int = Field(300, gt=0)
    decay_factor: float = Field(0.1, gt=0.0, le=1.0)
    optimizer: t.Literal["adam", "sgd"] = "adam"
    validation_fraction: float = Field(0.1, gt=0.0, lt=0.5)
    ground_truth_perception: bool = False
    max_windows: t.Optional[int] = Field(10_000, gt=0)


class RolloutConfig(Section):
    runs: int = Field(28, ge=1)
    tick_limit: int = Field(3000, gt=100)
    warmup_ticks: int = Field(10, ge=10)
    hallucinated_perception: bool = False


class EvaluationConfig(Section):
    split_half: bool = True


class TeleDriveConfig(Section):
    seed: int = 0
    threads: int = Field(1, ge=1)
    terrain: TerrainConfig = Field(default_factory=TerrainConfig)
    vehicle: VehicleConfig = Field(default_factory=VehicleConfig)
    lidar: LidarConfig = Field(default_factory=LidarConfig)
    drivers: DriversConfig = Field(default_factory=DriversConfig)
    collection: CollectionConfig = Field(default_factory=CollectionConfig)
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    rollout: RolloutConfig = Field(default_factory=RolloutConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)


def _describe(error: pydantic.ValidationError) -> str:
    lines = []
    for issue in error.errors():
        path = ".".join(str(part) for part in issue["loc"]) or "<root>"
        lines.append(f"{path}: {issue['msg']}")
    return "; ".join(lines)


def load_config(tree: t.Mapping[str, t.Any]) -> TeleDriveConfig:
    """Validate an already parsed mapping, filling defaults."""
    try:
        return TeleDriveConfig.model_validate(dict(tree))
    except pydantic.ValidationError as e:
        raise TeleDriveConfigError(f"invalid configuration: {_describe(e)}") from None


def parse_config(path: t.Optional[pathlib.Path]) -> TeleDriveConfig:
    """Read and validate a YAML config file; ``None`` gives the full default tree."""
    if path is None:
        return TeleDriveConfig()
    if not path.exists():
        raise TeleDriveFileNotFoundError(f"config file {path} does not exist.")
    try:
        tree = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise TeleDriveConfigError(f"{path}: malformed YAML: {e}") from None
    if tree is None:
        tree = {}
    if not isinstance(tree, dict):
        raise TeleDriveConfigError(f"{path}: top level must be a mapping, got {type(tree).__name__}.")
    return load_config(t.cast(dict[str, t.Any], tree))


def serialize_config(config: TeleDriveConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def config_hash(config: TeleDriveConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()


def resolve_threads(flag: t.Optional[int], config: TeleDriveConfig) -> int:
    """``--threads`` wins, then ``TDG_THREADS``, then the config file."""
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise TeleDriveConfigError(f"{THREADS_ENV} must be an integer, got {env!r}.") from None
    return config.threads
