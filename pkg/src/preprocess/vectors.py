import numpy as np

from src.config import PreprocessConfig
from src.numeric import Array
from src.sim import RawControl, TimestepRecord, VehicleState

__all__: tuple[str, ...] = (
    "ENVIRONMENT_DIM",
    "STATE_DIM",
    "PERCEPTION_DIM",
    "CONTROL_DIM",
    "STEP_DIM",
    "normalize_control",
    "normalize_state",
    "to_cylindrical",
    "from_cylindrical",
    "azimuth_bucket",
    "detect_obstacles",
    "build_environment_vector",
    "observe",
    "perception_vector",
    "step_vector",
)

ENVIRONMENT_DIM: int = 180
STATE_DIM: int = 4
PERCEPTION_DIM: int = ENVIRONMENT_DIM + STATE_DIM
CONTROL_DIM: int = 2
STEP_DIM: int = PERCEPTION_DIM + CONTROL_DIM

_VERTICAL_RUN = 1e-6
_SLOPE_DECIMALS = 9


def normalize_control(raw: RawControl) -> Array:
    """``(steer_n, pedal_n)``, both mapped from [-1, 1] to [0, 1]; pedal is accel minus brake."""
    pedal = raw.accel - raw.brake
    return np.array([(raw.steer + 1.0) / 2.0, (pedal + 1.0) / 2.0], dtype=np.float64)


def normalize_state(state: VehicleState, max_speed: float = 30.0) -> Array:
    """``(speed_n, yaw_n, roll_n, pitch_n)``; speed clamps, angles wrap into [0, 1)."""
    angles = np.array([state.yaw, state.roll, state.pitch], dtype=np.float64) % 360.0 / 360.0
    speed = min(max(state.speed / max_speed, 0.0), 1.0)
    return np.concatenate([[speed], np.minimum(angles, np.nextafter(1.0, 0.0))])


def to_cylindrical(points: Array) -> Array:
    """Vehicle-frame ``(x, y, z)`` to ``(azimuth deg, horizontal range, height)``; azimuth 0 is right, 90 forward."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    azimuth = np.degrees(np.arctan2(points[:, 1], points[:, 0]))
    distance = np.hypot(points[:, 0], points[:, 1])
    return np.stack([azimuth, distance, points[:, 2]], axis=1)


def from_cylindrical(cylindrical: Array) -> Array:
    cylindrical = np.asarray(cylindrical, dtype=np.float64).reshape(-1, 3)
    angle = np.radians(cylindrical[:, 0])
    return np.stack(
        [cylindrical[:, 1] * np.cos(angle), cylindrical[:, 1] * np.sin(angle), cylindrical[:, 2]], axis=1
    )


def azimuth_bucket(azimuth: Array) -> Array:
    """Integer degree bucket in 0..179; azimuth 180 joins bucket 179."""
    return np.clip(np.floor(azimuth), 0, ENVIRONMENT_DIM - 1).astype(np.int64)


def detect_obstacles(cylindrical: Array, threshold_deg: float = 45.0) -> Array:
    """
    Points whose slope from the previous point of the same azimuth bucket exceeds ``threshold_deg``.

    Within a bucket points are ordered by range, then height. A rise over a
    horizontal run below 1e-6 m counts as vertical. The output is sorted the
    same way, so it does not depend on the input order.
    """
    cylindrical = np.asarray(cylindrical, dtype=np.float64).reshape(-1, 3)
    if len(cylindrical) < 2:
        return np.zeros((0, 3))
    bucket = azimuth_bucket(cylindrical[:, 0])
    order = np.lexsort((cylindrical[:, 2], cylindrical[:, 1], bucket))
    ordered, bucket = cylindrical[order], bucket[order]
    rise = np.diff(ordered[:, 2])
    run = np.diff(ordered[:, 1])
    slope = np.round(np.degrees(np.arctan2(rise, run)), _SLOPE_DECIMALS)
    slope = np.where((run < _VERTICAL_RUN) & (rise > 0.0), 90.0, slope)
    marked = (bucket[1:] == bucket[:-1]) & (slope > threshold_deg)
    return ordered[1:][marked]


def build_environment_vector(obstacles: Array, max_distance: float = 50.0) -> Array:
    """Per-degree nearest obstacle range, clamped to ``max_distance`` and scaled to [0, 1]; empty buckets read 1."""
    obstacles = np.asarray(obstacles, dtype=np.float64).reshape(-1, 3)
    nearest = np.full(ENVIRONMENT_DIM, max_distance)
    if len(obstacles):
        np.minimum.at(nearest, azimuth_bucket(obstacles[:, 0]), np.minimum(obstacles[:, 1], max_distance))
    return nearest / max_distance


def observe(points: Array, state: VehicleState, config: PreprocessConfig = PreprocessConfig()) -> Array:
    """Environment vector followed by state vector, from one LiDAR sweep and the vehicle state."""
    obstacles = detect_obstacles(to_cylindrical(points), config.slope_threshold_deg)
    environment = build_environment_vector(obstacles, config.max_distance)
    return np.concatenate([environment, normalize_state(state, config.max_speed)])


def perception_vector(record: TimestepRecord, config: PreprocessConfig = PreprocessConfig()) -> Array:
    return observe(record.lidar_points, record.vehicle_state, config)


def step_vector(record: TimestepRecord, config: PreprocessConfig = PreprocessConfig()) -> Array:
    """One 186-wide window entry: perception then control."""
    return np.concatenate([perception_vector(record, config), normalize_control(record.raw_control)])
