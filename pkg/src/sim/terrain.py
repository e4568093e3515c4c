import dataclasses
import math
import typing as t

import numpy as np

from src.config import TerrainConfig
from src.exceptions import TeleDriveOutOfRangeError, TeleDriveTerrainError
from src.numeric import Array

__all__: tuple[str, ...] = (
    "Projection",
    "Terrain",
    "generate_terrain",
    "lateral_offset",
    "section_index",
    "DESTINATION_RADIUS",
)

DESTINATION_RADIUS: float = 5.0
_ROUGHNESS_WAVES = 3
_EDGE_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class Projection:
    """Closest centerline point to a query position."""

    arc_length: float
    offset: float
    segment: int
    before_start: bool
    beyond_end: bool
    closest: tuple[float, float]


@dataclasses.dataclass(frozen=True, eq=False)
class Terrain:
    """
    A procedural canyon: a sampled centerline with a per-sample corridor half-width.

    Headings are counter-clockwise radians from world +x; positive lateral
    offsets lie to the left of the travel direction.
    """

    seed: int
    config: TerrainConfig
    vehicle_width: float
    centerline: Array
    half_width: Array
    curvature: Array
    heading: Array
    arc_length: Array
    roughness: Array

    @property
    def terrain_id(self) -> str:
        return f"terrain-{self.seed}"

    @property
    def length(self) -> float:
        return float(self.arc_length[-1])

    @property
    def wall_height(self) -> float:
        return self.config.wall_height

    @property
    def section_count(self) -> int:
        return self.config.section_count

    @property
    def section_boundaries(self) -> Array:
        """Arc lengths of the section edges, ``section_count + 1`` values from 0 to ``length``."""
        return np.linspace(0.0, self.length, self.section_count + 1)

    @property
    def start(self) -> tuple[float, float]:
        return float(self.centerline[0, 0]), float(self.centerline[0, 1])

    @property
    def end(self) -> tuple[float, float]:
        return float(self.centerline[-1, 0]), float(self.centerline[-1, 1])

    @property
    def normals(self) -> Array:
        return np.stack([-np.sin(self.heading), np.cos(self.heading)], axis=1)

    def walls(self) -> tuple[Array, Array]:
        """Left and right wall polylines."""
        offset = self.normals * self.half_width[:, None]
        return self.centerline + offset, self.centerline - offset

    def project(self, position: t.Sequence[float] | Array) -> Projection:
        point = np.asarray(position, dtype=np.float64)
        a = self.centerline[:-1]
        d = self.centerline[1:] - a
        seg_len2 = np.einsum("ij,ij->i", d, d)
        rel = point - a
        raw = np.einsum("ij,ij->i", rel, d) / seg_len2
        frac = np.clip(raw, 0.0, 1.0)
        closest = a + frac[:, None] * d
        dist2 = np.einsum("ij,ij->i", point - closest, point - closest)
        idx = int(np.argmin(dist2))
        cross = d[idx, 0] * rel[idx, 1] - d[idx, 1] * rel[idx, 0]
        offset = math.copysign(math.sqrt(float(dist2[idx])), cross) if dist2[idx] > 0.0 else 0.0
        arc = float(self.arc_length[idx] + frac[idx] * math.sqrt(float(seg_len2[idx])))
        return Projection(
            arc_length=arc,
            offset=offset,
            segment=idx,
            before_start=idx == 0 and raw[idx] < -_EDGE_TOLERANCE,
            beyond_end=idx == len(d) - 1 and raw[idx] > 1.0 + _EDGE_TOLERANCE,
            closest=(float(closest[idx, 0]), float(closest[idx, 1])),
        )

    def lateral_offset(self, position: t.Sequence[float] | Array) -> float:
        projection = self.project(position)
        if projection.before_start or projection.beyond_end:
            raise TeleDriveOutOfRangeError(
                f"position {tuple(float(v) for v in position)} lies beyond the ends of {self.terrain_id}."
            )
        return projection.offset

    def section_index(self, position: t.Sequence[float] | Array) -> int:
        arc = self.project(position).arc_length
        index = int(arc // (self.length / self.section_count))
        return min(max(index, 0), self.section_count - 1)

    def _interp(self, values: Array, arc: float) -> float:
        return float(np.interp(arc, self.arc_length, values))

    def point_at(self, arc: float) -> tuple[float, float]:
        arc = min(max(arc, 0.0), self.length)
        return self._interp(self.centerline[:, 0], arc), self._interp(self.centerline[:, 1], arc)

    def half_width_at(self, arc: float) -> float:
        return self._interp(self.half_width, arc)

    def max_curvature(self, start: float, distance: float) -> float:
        """Largest absolute curvature on the centerline between ``start`` and ``start + distance``."""
        mask = (self.arc_length >= start) & (self.arc_length <= start + distance)
        return float(np.max(np.abs(self.curvature[mask]))) if np.any(mask) else 0.0

    def reached_end(self, position: t.Sequence[float] | Array) -> bool:
        return math.dist(tuple(float(v) for v in position), self.end) <= DESTINATION_RADIUS

    def roll_pitch(self, x: float, y: float) -> tuple[float, float]:
        """Small seeded ground tilt in degrees at a world position."""
        waves = self.roughness
        phase = waves[:, 1] * x + waves[:, 2] * y + waves[:, 3]
        tilt = waves[:, 0] * np.sin(phase)
        amplitude = self.config.roughness_deg
        roll = amplitude * float(np.sum(tilt[:_ROUGHNESS_WAVES]))
        pitch = amplitude * float(np.sum(tilt[_ROUGHNESS_WAVES:]))
        return roll, pitch


def _curvature_profile(rng: np.random.Generator, config: TerrainConfig, steps: int, ds: float) -> Array:
    """Alternating straights and constant-radius curves that swing the heading left and right."""
    kappa = np.zeros(steps)
    heading = 0.0
    sign = float(rng.choice([-1.0, 1.0]))
    low, high = config.straight_length
    if not 0.0 < low <= high:
        raise TeleDriveTerrainError(f"straight_length must satisfy 0 < low <= high, got {config.straight_length}.")
    i = 0
    while i < steps:
        i += max(1, round(rng.uniform(low, high) / ds))
        if config.curviness == 0.0 or i >= steps:
            continue
        target = sign * config.curviness * rng.uniform(0.4, 1.0) * math.radians(config.max_turn_deg)
        radius = rng.uniform(config.min_radius, 2.0 * config.min_radius)
        delta = target - heading
        count = min(round(abs(delta) * radius / ds), steps - i)
        kappa[i : i + count] = math.copysign(1.0 / radius, delta)
        heading += math.copysign(count * ds / radius, delta)
        i += count
        sign = -sign
    return kappa


def _check_corridor(terrain_points: Array, arc: Array, half_width: Array, curvature: Array, seed: int) -> None:
    widest = float(np.max(half_width))
    sharpest = float(np.max(np.abs(curvature)))
    if sharpest > 0.0 and widest >= 1.0 / sharpest:
        raise TeleDriveTerrainError(
            f"terrain seed {seed}: curve radius {1.0 / sharpest:.1f} m is not larger than the corridor "
            f"half-width {widest:.1f} m, so the walls would fold over."
        )
    stride = max(1, int(2.0 / max(float(arc[1] - arc[0]), 1e-9)))
    pts, s = terrain_points[::stride], arc[::stride]
    gap = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    apart = np.abs(s[:, None] - s[None, :]) > 4.0 * widest
    if np.any(apart & (gap < 2.0 * widest)):
        raise TeleDriveTerrainError(f"terrain seed {seed}: corridor self-intersects.")


def generate_terrain(seed: int, config: TerrainConfig = TerrainConfig(), *, vehicle_width: float = 2.0) -> Terrain:
    """Deterministically build a canyon corridor from ``seed``; starts with a straight heading along +x."""
    rng = np.random.default_rng(seed)
    steps = max(1, math.ceil(config.length / config.sample_spacing))
    ds = config.length / steps
    kappa = _curvature_profile(rng, config, steps, ds)
    headings = np.concatenate([[0.0], np.cumsum(kappa * ds)])
    mid = headings[:-1] + 0.5 * kappa * ds
    moves = ds * np.stack([np.cos(mid), np.sin(mid)], axis=1)
    centerline = np.vstack([np.zeros((1, 2)), np.cumsum(moves, axis=0)])
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(moves, axis=1))])
    curvature = np.concatenate([[kappa[0]], kappa])

    wavelength = rng.uniform(150.0, 300.0)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    half_width = 0.5 * config.width + 0.5 * config.width_variation * np.sin(2.0 * math.pi * arc / wavelength + phase)
    narrowest = 0.5 * (config.width - config.width_variation)
    if narrowest < vehicle_width + 1.0:
        raise TeleDriveTerrainError(
            f"corridor half-width can drop to {narrowest:.2f} m, "
            f"below vehicle width + 1 m ({vehicle_width + 1.0:.2f} m)."
        )
    _check_corridor(centerline, arc, half_width, curvature, seed)

    amplitudes = rng.uniform(0.2, 0.5, size=2 * _ROUGHNESS_WAVES)
    wave_numbers = rng.uniform(-0.15, 0.15, size=(2 * _ROUGHNESS_WAVES, 2))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=2 * _ROUGHNESS_WAVES)
    roughness = np.column_stack([amplitudes, wave_numbers, phases])

    return Terrain(
        seed=seed,
        config=config,
        vehicle_width=vehicle_width,
        centerline=centerline,
        half_width=half_width,
        curvature=curvature,
        heading=headings,
        arc_length=arc,
        roughness=roughness,
    )


def lateral_offset(terrain: Terrain, position: t.Sequence[float] | Array) -> float:
    """Signed distance from the centerline, positive to the left of travel."""
    return terrain.lateral_offset(position)


def section_index(terrain: Terrain, position: t.Sequence[float] | Array) -> int:
    return terrain.section_index(position)
