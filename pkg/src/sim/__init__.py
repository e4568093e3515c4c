from .episode import TICKS_PER_SECOND, Driver, Episode, Observation, TimestepRecord, resolve_wall_contact, run_episode
from .lidar import lidar_bearings, lidar_elevations, lidar_scan
from .logs import (
    EPISODE_FORMAT,
    LOG_VERSION,
    RECORD_FIELDS,
    TERRAIN_FORMAT,
    EpisodeHeader,
    TerrainFile,
    decode_episode,
    encode_episode,
    read_episode,
    read_terrain,
    write_episode,
    write_terrain,
)
from .terrain import DESTINATION_RADIUS, Projection, Terrain, generate_terrain, lateral_offset, section_index
from .vehicle import TICK_SECONDS, RawControl, VehicleState, heading_vector, step_vehicle

__all__: tuple[str, ...] = (
    "DESTINATION_RADIUS",
    "Projection",
    "Terrain",
    "generate_terrain",
    "lateral_offset",
    "section_index",
    "TICK_SECONDS",
    "RawControl",
    "VehicleState",
    "heading_vector",
    "step_vehicle",
    "lidar_bearings",
    "lidar_elevations",
    "lidar_scan",
    "TICKS_PER_SECOND",
    "TimestepRecord",
    "Episode",
    "Observation",
    "Driver",
    "resolve_wall_contact",
    "run_episode",
    "EPISODE_FORMAT",
    "TERRAIN_FORMAT",
    "LOG_VERSION",
    "RECORD_FIELDS",
    "EpisodeHeader",
    "TerrainFile",
    "encode_episode",
    "decode_episode",
    "write_episode",
    "read_episode",
    "write_terrain",
    "read_terrain",
)
