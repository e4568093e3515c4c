import dataclasses
import enum
import math
import typing as t

import numpy as np

from src.exceptions import TeleDriveStatisticsError
from src.numeric import Array
from src.sim import TICK_SECONDS, Episode, Terrain, TimestepRecord

__all__: tuple[str, ...] = (
    "Metric",
    "DrivingMetrics",
    "compute_metrics",
    "episode_section_metrics",
    "section_metrics",
)


class Metric(enum.StrEnum):
    SDLP = "sdlp"
    SDS = "sds"
    AVG_SPEED = "avg_speed"
    DCT = "dct"


@dataclasses.dataclass(frozen=True)
class DrivingMetrics:
    """
    Lane keeping, speed keeping and completion time of one drive.

    ``sdlp`` and ``sds`` are population standard deviations. The raw values are
    reported as they are; no direction is treated as better.
    """

    sdlp: float
    sds: float
    avg_speed: float
    dct: float

    def __getitem__(self, metric: Metric | str) -> float:
        return float(getattr(self, Metric(metric).value))

    def as_dict(self) -> dict[str, float]:
        return {metric.value: self[metric] for metric in Metric}

    @classmethod
    def missing(cls) -> "DrivingMetrics":
        return cls(math.nan, math.nan, math.nan, math.nan)

    @property
    def is_missing(self) -> bool:
        return any(math.isnan(value) for value in self.as_dict().values())


def _offsets(records: t.Sequence[TimestepRecord], terrain: Terrain) -> Array:
    # projected offset stays defined when the last records roll past the destination
    return np.array([terrain.project(r.vehicle_state.position).offset for r in records], dtype=np.float64)


def _speeds(records: t.Sequence[TimestepRecord]) -> Array:
    return np.array([r.vehicle_state.speed for r in records], dtype=np.float64)


def compute_metrics(episode: Episode, terrain: Terrain) -> DrivingMetrics:
    """Whole-episode SDLP, SDS, average speed and DCT (last record time minus first)."""
    records = episode.records
    if len(records) < 2:
        raise TeleDriveStatisticsError(
            f"episode {episode.driver_id}#{episode.seed} has {len(records)} record(s); metrics need at least 2."
        )
    speeds = _speeds(records)
    return DrivingMetrics(
        sdlp=float(np.std(_offsets(records, terrain))),
        sds=float(np.std(speeds)),
        avg_speed=float(np.mean(speeds)),
        dct=records[-1].time - records[0].time,
    )


def episode_section_metrics(episode: Episode, terrain: Terrain) -> list[DrivingMetrics]:
    """
    Metrics within each section of one episode.

    A section's DCT is the time spent in it (in-section records times one tick);
    a section the episode never entered is returned as missing.
    """
    buckets: list[list[TimestepRecord]] = [[] for _ in range(terrain.section_count)]
    for record in episode.records:
        buckets[terrain.section_index(record.vehicle_state.position)].append(record)
    metrics: list[DrivingMetrics] = []
    for records in buckets:
        if not records:
            metrics.append(DrivingMetrics.missing())
            continue
        speeds = _speeds(records)
        metrics.append(
            DrivingMetrics(
                sdlp=float(np.std(_offsets(records, terrain))),
                sds=float(np.std(speeds)),
                avg_speed=float(np.mean(speeds)),
                dct=len(records) * TICK_SECONDS,
            )
        )
    return metrics


def section_metrics(episodes: t.Sequence[Episode], terrain: Terrain) -> list[DrivingMetrics]:
    """Per-section means over the episodes that entered the section; untraversed sections stay missing."""
    if not episodes:
        raise TeleDriveStatisticsError("section metrics need at least one episode.")
    for episode in episodes:
        if episode.terrain_id != terrain.terrain_id:
            raise TeleDriveStatisticsError(
                f"episode {episode.driver_id}#{episode.seed} ran on {episode.terrain_id}, not {terrain.terrain_id}."
            )
    table = np.array(
        [[list(m.as_dict().values()) for m in episode_section_metrics(e, terrain)] for e in episodes],
        dtype=np.float64,
    )
    means: list[DrivingMetrics] = []
    for section in range(terrain.section_count):
        rows = table[:, section, :]
        rows = rows[~np.isnan(rows).any(axis=1)]
        means.append(DrivingMetrics(*(float(v) for v in rows.mean(axis=0))) if len(rows) else DrivingMetrics.missing())
    return means
