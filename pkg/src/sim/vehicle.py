import dataclasses
import math
import typing as t

import numpy as np

from src.config import VehicleConfig
from src.exceptions import TeleDriveOutOfRangeError

if t.TYPE_CHECKING:
    from .terrain import Terrain

__all__: tuple[str, ...] = ("TICK_SECONDS", "RawControl", "VehicleState", "step_vehicle", "heading_vector")

TICK_SECONDS: float = 0.1


def _clamp(value: float, low: float, high: float) -> float:
    return min(max(float(value), low), high)


@dataclasses.dataclass(frozen=True)
class RawControl:
    """Controller inputs; out-of-range values are clamped on construction."""

    steer: float = 0.0
    accel: float = 0.0
    brake: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "steer", _clamp(self.steer, -1.0, 1.0))
        object.__setattr__(self, "accel", _clamp(self.accel, 0.0, 1.0))
        object.__setattr__(self, "brake", _clamp(self.brake, 0.0, 1.0))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.steer, self.accel, self.brake


@dataclasses.dataclass(frozen=True)
class VehicleState:
    """
    Pose and speed of the vehicle.

    ``yaw`` is a clockwise heading in degrees measured from world +x, so the
    vehicle moves along ``(cos yaw, -sin yaw)``.
    """

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    speed: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return self.x, self.y

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return self.x, self.y, self.yaw, self.roll, self.pitch, self.speed

    @classmethod
    def at_start(cls, terrain: "Terrain") -> "VehicleState":
        """Standing still at the start of the centerline, aligned with it."""
        x, y = terrain.start
        roll, pitch = terrain.roll_pitch(x, y)
        yaw = (-math.degrees(float(terrain.heading[0]))) % 360.0
        return cls(x=x, y=y, yaw=yaw, roll=roll % 360.0, pitch=pitch % 360.0, speed=0.0)


def heading_vector(yaw: float) -> tuple[float, float]:
    rad = math.radians(yaw)
    return math.cos(rad), -math.sin(rad)


def step_vehicle(
    state: VehicleState,
    control: RawControl,
    dt: float = TICK_SECONDS,
    *,
    vehicle: VehicleConfig = VehicleConfig(),
    terrain: t.Optional["Terrain"] = None,
) -> VehicleState:
    """
    Advance a kinematic bicycle by ``dt`` seconds.

    The position moves at the incoming speed along the updated heading; roll and
    pitch follow the terrain roughness when a terrain is given.
    """
    if not dt > 0.0:
        raise TeleDriveOutOfRangeError(f"dt must be positive, got {dt}.")
    steer_angle = math.radians(control.steer * vehicle.max_steer_deg)
    yaw_rate = state.speed / vehicle.wheelbase * math.tan(steer_angle)
    yaw = (state.yaw + math.degrees(yaw_rate * dt)) % 360.0
    accel = control.accel * vehicle.max_accel - control.brake * vehicle.max_brake - vehicle.drag * state.speed
    speed = float(np.clip(state.speed + accel * dt, 0.0, vehicle.max_speed))
    hx, hy = heading_vector(yaw)
    x = state.x + state.speed * dt * hx
    y = state.y + state.speed * dt * hy
    roll, pitch = state.roll, state.pitch
    if terrain is not None:
        roll, pitch = terrain.roll_pitch(x, y)
        roll, pitch = roll % 360.0, pitch % 360.0
    return VehicleState(x=x, y=y, yaw=yaw, roll=roll, pitch=pitch, speed=speed)
