import numpy as np

from src.sim import Episode, RawControl, TimestepRecord, VehicleState

__all__: tuple[str, ...] = ("make_episode", "centerline_run")


def make_episode(
    positions: list[tuple[float, float]],
    speeds: list[float],
    *,
    terrain_id: str = "terrain-1",
    start_tick: int = 0,
    seed: int = 0,
) -> Episode:
    """An episode built from explicit positions and speeds, heading along +x, no LiDAR points."""
    records = [
        TimestepRecord(
            tick_index=start_tick + i,
            raw_control=RawControl(),
            vehicle_state=VehicleState(x=x, y=y, speed=speed),
            lidar_points=np.zeros((0, 3)),
        )
        for i, ((x, y), speed) in enumerate(zip(positions, speeds))
    ]
    return Episode(terrain_id=terrain_id, driver_id="synthetic", seed=seed, records=records, completed=True)


def centerline_run(
    length: float, speed: float, *, offsets: list[float] | None = None, start_tick: int = 0, seed: int = 0
) -> Episode:
    """Constant-speed drive along the x axis, one record per tick, optionally cycling through lateral offsets."""
    step = speed * 0.1
    count = int(round(length / step)) + 1
    positions = [(min(i * step, length), 0.0 if offsets is None else offsets[i % len(offsets)]) for i in range(count)]
    return make_episode(positions, [speed] * count, start_tick=start_tick, seed=seed)
