import math

from src.config import DriverProfile, DriversConfig, VehicleConfig
from src.sim import Terrain, VehicleState

__all__: tuple[str, ...] = ("lookahead_point", "pure_pursuit_steer", "target_speed", "speed_control")


def lookahead_point(terrain: Terrain, arc_length: float) -> tuple[float, float]:
    """Centerline point at ``arc_length``, extended straight past the end of the corridor."""
    if arc_length <= terrain.length:
        return terrain.point_at(arc_length)
    excess = arc_length - terrain.length
    heading = float(terrain.heading[-1])
    x, y = terrain.end
    return x + excess * math.cos(heading), y + excess * math.sin(heading)


def pure_pursuit_steer(
    state: VehicleState, terrain: Terrain, lookahead: float, vehicle: VehicleConfig = VehicleConfig()
) -> float:
    """
    Steer toward the centerline point ``lookahead`` metres ahead; positive steers right.

    Uses the pure-pursuit curvature ``2 sin(alpha) / distance`` converted to a
    bicycle steering angle and scaled by the maximum steering angle.
    """
    arc = terrain.project(state.position).arc_length
    tx, ty = lookahead_point(terrain, arc + lookahead)
    dx, dy = tx - state.x, ty - state.y
    yaw = math.radians(state.yaw)
    forward = dx * math.cos(yaw) - dy * math.sin(yaw)
    right = -dx * math.sin(yaw) - dy * math.cos(yaw)
    distance = math.hypot(forward, right)
    if distance == 0.0:
        return 0.0
    alpha = math.atan2(right, forward)
    curvature = 2.0 * math.sin(alpha) / distance
    steer_angle = math.degrees(math.atan(vehicle.wheelbase * curvature))
    return min(max(steer_angle / vehicle.max_steer_deg, -1.0), 1.0)


def target_speed(state: VehicleState, terrain: Terrain, profile: DriverProfile, drivers: DriversConfig) -> float:
    """``profile.target_speed`` lowered so the sharpest curve in the preview window stays comfortable."""
    arc = terrain.project(state.position).arc_length
    preview = max(profile.lookahead, state.speed * drivers.preview_seconds)
    curvature = terrain.max_curvature(arc, preview)
    if curvature == 0.0:
        return profile.target_speed
    return min(profile.target_speed, math.sqrt(drivers.lateral_accel / curvature))


def speed_control(
    state: VehicleState,
    terrain: Terrain,
    profile: DriverProfile,
    drivers: DriversConfig = DriversConfig(),
    vehicle: VehicleConfig = VehicleConfig(),
) -> tuple[float, float]:
    """
    Proportional speed control with drag feed-forward.

    Returns ``(accel, brake)``; at most one of them is non-zero.
    """
    error = target_speed(state, terrain, profile, drivers) - state.speed
    command = vehicle.drag * state.speed / vehicle.max_accel + drivers.speed_gain * error
    if command >= 0.0:
        return min(command, 1.0), 0.0
    return 0.0, min(-command * vehicle.max_accel / vehicle.max_brake, 1.0)
