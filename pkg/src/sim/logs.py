import gzip
import io
import json
import pathlib
import typing as t

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict

from src.config import TerrainConfig
from src.exceptions import TeleDriveFileNotFoundError, TeleDriveFormatError

from .episode import Episode, TimestepRecord
from .terrain import Terrain, generate_terrain
from .vehicle import RawControl, VehicleState

__all__: tuple[str, ...] = (
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

EPISODE_FORMAT = "teledrive-episode"
TERRAIN_FORMAT = "teledrive-terrain"
LOG_VERSION = 1
RECORD_FIELDS: tuple[str, ...] = (
    "tick",
    "time",
    "steer",
    "accel",
    "brake",
    "x",
    "y",
    "yaw",
    "roll",
    "pitch",
    "speed",
    "point_count",
    "points",
)


class EpisodeHeader(BaseModel):
    """First line of an episode log."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    format: t.Literal["teledrive-episode"] = EPISODE_FORMAT
    version: t.Literal[1] = LOG_VERSION
    terrain_id: str
    driver_id: str
    seed: int
    completed: bool
    collision_count: int = pydantic.Field(ge=0)
    records: int = pydantic.Field(ge=0)
    fields: tuple[str, ...] = RECORD_FIELDS


class TerrainFile(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    format: t.Literal["teledrive-terrain"] = TERRAIN_FORMAT
    version: t.Literal[1] = LOG_VERSION
    seed: int
    vehicle_width: float
    config: TerrainConfig
    centerline: list[tuple[float, float]]
    half_width: list[float]


def _dumps(value: t.Any) -> str:
    return json.dumps(value, separators=(",", ":"), allow_nan=False)


def _record_line(record: TimestepRecord) -> str:
    points = record.lidar_points
    row: list[t.Any] = [record.tick_index, record.time, *record.raw_control.as_tuple()]
    row.extend(record.vehicle_state.as_tuple())
    row.extend([len(points), points.reshape(-1).tolist()])
    return _dumps(row)


def encode_episode(episode: Episode) -> str:
    """Line-delimited JSON: one header object, then one array per tick in ``RECORD_FIELDS`` order."""
    header = EpisodeHeader(
        terrain_id=episode.terrain_id,
        driver_id=episode.driver_id,
        seed=episode.seed,
        completed=episode.completed,
        collision_count=episode.collision_count,
        records=len(episode.records),
    )
    lines = [header.model_dump_json()]
    lines.extend(_record_line(record) for record in episode.records)
    return "\n".join(lines) + "\n"


def _parse_record(row: t.Any, line_no: int, label: str) -> TimestepRecord:
    if not isinstance(row, list) or len(t.cast(list[t.Any], row)) != len(RECORD_FIELDS):
        raise TeleDriveFormatError(f"{label}:{line_no}: expected {len(RECORD_FIELDS)} fields.")
    tick, _, steer, accel, brake, x, y, yaw, roll, pitch, speed, count, flat = t.cast(list[t.Any], row)
    points = np.asarray(flat, dtype=np.float64)
    if points.size != 3 * int(count):
        raise TeleDriveFormatError(f"{label}:{line_no}: point_count {count} does not match {points.size} values.")
    return TimestepRecord(
        tick_index=int(tick),
        raw_control=RawControl(steer=steer, accel=accel, brake=brake),
        vehicle_state=VehicleState(x=x, y=y, yaw=yaw, roll=roll, pitch=pitch, speed=speed),
        lidar_points=points.reshape(-1, 3),
    )


def decode_episode(text: str, label: str = "<episode>") -> Episode:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise TeleDriveFormatError(f"{label}: empty episode log.")
    try:
        header = EpisodeHeader.model_validate_json(lines[0])
    except pydantic.ValidationError as e:
        raise TeleDriveFormatError(f"{label}: bad episode header: {e.errors()[0]['msg']}") from None
    episode = Episode(
        terrain_id=header.terrain_id,
        driver_id=header.driver_id,
        seed=header.seed,
        completed=header.completed,
        collision_count=header.collision_count,
    )
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as e:
            raise TeleDriveFormatError(f"{label}:{line_no}: {e.msg}") from None
        record = _parse_record(row, line_no, label)
        if episode.records and record.tick_index <= episode.records[-1].tick_index:
            raise TeleDriveFormatError(f"{label}:{line_no}: tick indices must strictly increase.")
        episode.records.append(record)
    if len(episode.records) != header.records:
        raise TeleDriveFormatError(f"{label}: header announces {header.records} records, found {len(episode.records)}.")
    return episode


def write_episode(path: pathlib.Path, episode: Episode) -> None:
    """Write an episode log; a ``.gz`` suffix compresses it with a fixed gzip timestamp."""
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = encode_episode(episode).encode("utf-8")
    if path.suffix == ".gz":
        buffer = io.BytesIO()
        with gzip.GzipFile(filename="", mode="wb", fileobj=buffer, mtime=0) as stream:
            stream.write(payload)
        payload = buffer.getvalue()
    path.write_bytes(payload)


def read_episode(path: pathlib.Path) -> Episode:
    if not path.exists():
        raise TeleDriveFileNotFoundError(f"episode log {path} does not exist.")
    payload = path.read_bytes()
    if path.suffix == ".gz":
        try:
            payload = gzip.decompress(payload)
        except OSError as e:
            raise TeleDriveFormatError(f"{path}: {e}") from None
    return decode_episode(payload.decode("utf-8"), label=str(path))


def write_terrain(path: pathlib.Path, terrain: Terrain) -> None:
    document = TerrainFile(
        seed=terrain.seed,
        vehicle_width=terrain.vehicle_width,
        config=terrain.config,
        centerline=[(float(x), float(y)) for x, y in terrain.centerline],
        half_width=terrain.half_width.tolist(),
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=1) + "\n", encoding="utf-8")


def read_terrain(path: pathlib.Path) -> Terrain:
    """Regenerate a terrain from its stored seed and config, checking it against the stored samples."""
    if not path.exists():
        raise TeleDriveFileNotFoundError(f"terrain file {path} does not exist.")
    try:
        document = TerrainFile.model_validate_json(path.read_text(encoding="utf-8"))
    except pydantic.ValidationError as e:
        raise TeleDriveFormatError(f"{path}: bad terrain file: {e.errors()[0]['msg']}") from None
    terrain = generate_terrain(document.seed, document.config, vehicle_width=document.vehicle_width)
    stored = np.asarray(document.centerline, dtype=np.float64)
    if stored.shape != terrain.centerline.shape or not (
        np.allclose(stored, terrain.centerline, atol=1e-9)
        and np.allclose(document.half_width, terrain.half_width, atol=1e-9)
    ):
        raise TeleDriveFormatError(f"{path}: stored samples do not match the regenerated terrain.")
    return terrain
