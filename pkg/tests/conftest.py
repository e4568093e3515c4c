import typing as t

import pytest

from src.config import (
    CollectionConfig,
    DriverProfile,
    DriversConfig,
    ModelConfig,
    RolloutConfig,
    TeleDriveConfig,
    TerrainConfig,
    TrainingConfig,
    load_config,
)
from src.logger import Logger
from src.sim import Terrain, generate_terrain

STRAIGHT = TerrainConfig(curviness=0.0, width_variation=0.0)


@pytest.fixture(scope="session")
def straight_terrain() -> Terrain:
    """900 m long, 20 m wide corridor along +x."""
    return generate_terrain(1, STRAIGHT)


@pytest.fixture(scope="session")
def default_terrain() -> Terrain:
    return generate_terrain(1)


@pytest.fixture()
def logger() -> Logger:
    return Logger.silent()


@pytest.fixture()
def noiseless_profile() -> DriverProfile:
    return DriverProfile(name="noiseless", lookahead=12.0, target_speed=10.0)


TINY_DRIVERS = DriversConfig()


def tiny_config_tree() -> dict[str, t.Any]:
    """A short terrain, two drivers and a small model: the whole pipeline in seconds."""
    drivers = DriversConfig(experienced=TINY_DRIVERS.experienced[:1], inexperienced=TINY_DRIVERS.inexperienced[:2])
    config = TeleDriveConfig(
        seed=7,
        terrain=TerrainConfig(length=150.0, curviness=0.5, min_radius=40.0),
        drivers=drivers,
        collection=CollectionConfig(experienced_terrains=[1], inexperienced_terrains=[4], repeats=1, tick_limit=400),
        model=ModelConfig(linear_width=6, hidden_size=6),
        training=TrainingConfig(epochs=2, batch_size=32, max_windows=120),
        rollout=RolloutConfig(runs=2, tick_limit=400),
    )
    return config.model_dump(mode="json")


@pytest.fixture(scope="session")
def tiny_config() -> TeleDriveConfig:
    return load_config(tiny_config_tree())
