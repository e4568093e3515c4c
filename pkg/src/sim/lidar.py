import math

import numpy as np

from src.config import LidarConfig
from src.numeric import Array

from .terrain import Terrain
from .vehicle import VehicleState

__all__: tuple[str, ...] = ("lidar_bearings", "lidar_elevations", "lidar_scan")

_PARALLEL = 1e-12


def lidar_bearings(config: LidarConfig = LidarConfig()) -> Array:
    """Ray bearings in degrees relative to the heading, positive to the left, one ray at the centre of each bucket."""
    count = int(round(180.0 / config.azimuth_step_deg))
    return (np.arange(count) + 0.5) * (180.0 / count) - 90.0


def lidar_elevations(config: LidarConfig = LidarConfig()) -> Array:
    return np.linspace(config.min_elevation_deg, config.max_elevation_deg, config.channels)


def _wall_segments(terrain: Terrain, origin: Array, reach: float) -> tuple[Array, Array]:
    starts, directions = [], []
    for wall in terrain.walls():
        a, d = wall[:-1], wall[1:] - wall[:-1]
        seg_len = np.linalg.norm(d, axis=1)
        near = np.linalg.norm(a - origin, axis=1) <= reach + seg_len
        starts.append(a[near])
        directions.append(d[near])
    return np.concatenate(starts), np.concatenate(directions)


def _horizontal_wall_range(origin: Array, rays: Array, starts: Array, directions: Array) -> Array:
    """Horizontal distance along each ray to the nearest wall segment, ``inf`` when none is hit."""
    if len(starts) == 0:
        return np.full(len(rays), np.inf)
    denom = rays[:, None, 0] * directions[None, :, 1] - rays[:, None, 1] * directions[None, :, 0]
    rel = starts - origin
    with np.errstate(divide="ignore", invalid="ignore"):
        along = (rel[None, :, 0] * directions[None, :, 1] - rel[None, :, 1] * directions[None, :, 0]) / denom
        frac = (rel[None, :, 0] * rays[:, None, 1] - rel[None, :, 1] * rays[:, None, 0]) / denom
    valid = (np.abs(denom) > _PARALLEL) & (along > 0.0) & (frac >= 0.0) & (frac <= 1.0)
    return np.min(np.where(valid, along, np.inf), axis=1)


def lidar_scan(terrain: Terrain, state: VehicleState, config: LidarConfig = LidarConfig()) -> Array:
    """
    Raycast the forward half-plane against the canyon walls and the flat ground.

    Returns an ``(K, 3)`` array of hit points in the vehicle frame: x to the
    right, y forward, z up, origin at the sensor ``mount_height`` above ground.
    Rays that pass over the walls or exceed ``max_range`` produce no return.
    """
    origin = np.array(state.position, dtype=np.float64)
    bearings = np.radians(lidar_bearings(config))
    heading = -math.radians(state.yaw)
    angles = heading + bearings
    rays = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    starts, directions = _wall_segments(terrain, origin, config.max_range)
    wall_range = _horizontal_wall_range(origin, rays, starts, directions)

    points: list[Array] = []
    for elevation in np.radians(lidar_elevations(config)):
        slope = math.tan(elevation)
        horizontal = np.full(len(bearings), np.inf)
        height = np.zeros(len(bearings))
        wall_z = slope * wall_range
        wall_hit = np.isfinite(wall_range) & (wall_z + config.mount_height <= terrain.wall_height)
        wall_hit &= wall_z + config.mount_height >= 0.0
        horizontal[wall_hit] = wall_range[wall_hit]
        height[wall_hit] = wall_z[wall_hit]
        if elevation < 0.0:
            ground = config.mount_height / -slope
            ground_hit = ground < horizontal
            horizontal[ground_hit] = ground
            height[ground_hit] = -config.mount_height
        slant = horizontal / math.cos(elevation)
        keep = np.isfinite(horizontal) & (slant <= config.max_range)
        r, b = horizontal[keep], bearings[keep]
        points.append(np.stack([-r * np.sin(b), r * np.cos(b), height[keep]], axis=1))
    return np.concatenate(points) if points else np.zeros((0, 3))
