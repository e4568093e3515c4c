import dataclasses
import math
import typing as t

import numpy as np

from src.config import LidarConfig, VehicleConfig
from src.exceptions import TeleDriveOutOfRangeError
from src.logger import Logger
from src.numeric import Array

from .lidar import lidar_scan
from .terrain import Terrain
from .vehicle import RawControl, VehicleState, step_vehicle

__all__: tuple[str, ...] = (
    "TICKS_PER_SECOND",
    "TimestepRecord",
    "Episode",
    "Observation",
    "Driver",
    "resolve_wall_contact",
    "run_episode",
)

TICKS_PER_SECOND: int = 10


@dataclasses.dataclass(frozen=True, eq=False)
class TimestepRecord:
    tick_index: int
    raw_control: RawControl
    vehicle_state: VehicleState
    lidar_points: Array

    @property
    def time(self) -> float:
        """Seconds since the start; computed from the tick so it never drifts."""
        return self.tick_index / TICKS_PER_SECOND


@dataclasses.dataclass(eq=False)
class Episode:
    terrain_id: str
    driver_id: str
    seed: int
    records: list[TimestepRecord] = dataclasses.field(default_factory=list)
    completed: bool = False
    collision_count: int = 0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def duration(self) -> float:
        return len(self.records) / TICKS_PER_SECOND

    def positions(self) -> Array:
        return np.array([r.vehicle_state.position for r in self.records], dtype=np.float64).reshape(-1, 2)

    def speeds(self) -> Array:
        return np.array([r.vehicle_state.speed for r in self.records], dtype=np.float64)

    def without_points(self) -> "Episode":
        """Copy that drops the LiDAR sweeps, for keeping many episodes in memory."""
        empty = np.zeros((0, 3))
        return dataclasses.replace(
            self, records=[dataclasses.replace(record, lidar_points=empty) for record in self.records]
        )


@dataclasses.dataclass(frozen=True, eq=False)
class Observation:
    """What a driver sees at one tick."""

    tick: int
    state: VehicleState
    terrain: Terrain
    lidar_points: Array


@t.runtime_checkable
class Driver(t.Protocol):
    """Anything that turns observations into controls, one episode at a time."""

    @property
    def driver_id(self) -> str:
        ...

    def reset(self, seed: int) -> None:
        ...

    def act(self, observation: Observation) -> RawControl:
        ...


def resolve_wall_contact(
    terrain: Terrain, state: VehicleState, vehicle: VehicleConfig = VehicleConfig()
) -> tuple[VehicleState, bool]:
    """
    Keep the vehicle circle inside the corridor.

    On contact the position is pushed back along the wall normal so the vehicle
    slides along the wall; speed and heading are kept.
    """
    radius = vehicle.width / 2.0
    projection = terrain.project(state.position)
    half_width = terrain.half_width_at(projection.arc_length)
    if abs(projection.offset) + radius <= half_width:
        return state, False
    cx, cy = projection.closest
    dx, dy = state.x - cx, state.y - cy
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return state, True
    scale = max(half_width - radius, 0.0) / norm
    return dataclasses.replace(state, x=cx + dx * scale, y=cy + dy * scale), True


def run_episode(
    terrain: Terrain,
    driver: Driver,
    seed: int,
    tick_limit: int,
    *,
    vehicle: VehicleConfig = VehicleConfig(),
    lidar: LidarConfig = LidarConfig(),
    logger: t.Optional[Logger] = None,
) -> Episode:
    """
    Drive ``driver`` from the start of ``terrain`` until it reaches the end or ``tick_limit`` ticks pass.

    Each tick observes, acts, records, checks for completion and only then
    steps the vehicle, so the final record is the state that reached the end.
    """
    if tick_limit <= 0:
        raise TeleDriveOutOfRangeError(f"tick_limit must be positive, got {tick_limit}.")
    driver.reset(seed)
    episode = Episode(terrain_id=terrain.terrain_id, driver_id=driver.driver_id, seed=seed)
    state = VehicleState.at_start(terrain)
    in_contact = False
    for tick in range(tick_limit):
        points = lidar_scan(terrain, state, lidar)
        control = driver.act(Observation(tick=tick, state=state, terrain=terrain, lidar_points=points))
        episode.records.append(TimestepRecord(tick, control, state, points))
        if terrain.reached_end(state.position):
            episode.completed = True
            break
        moved = step_vehicle(state, control, vehicle=vehicle, terrain=terrain)
        state, contact = resolve_wall_contact(terrain, moved, vehicle)
        if contact and not in_contact:
            episode.collision_count += 1
            if logger is not None:
                logger.debug(f"{driver.driver_id} touched a wall on {terrain.terrain_id} at tick {tick}")
        in_contact = contact
    return episode
