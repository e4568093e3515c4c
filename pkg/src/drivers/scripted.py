import dataclasses
import typing as t

import numpy as np

from src.config import DriverProfile, DriversConfig, Population, VehicleConfig
from src.sim import Observation, RawControl, Terrain, VehicleState

from .controllers import pure_pursuit_steer, speed_control

__all__: tuple[str, ...] = ("Intent", "noisy_intent", "lag_alpha", "act", "ScriptedDriver", "build_population")


@dataclasses.dataclass(frozen=True)
class Intent:
    """Steer and fused pedal (accel minus brake) before the reaction-lag filter."""

    steer: float
    pedal: float

    def to_control(self) -> RawControl:
        return RawControl(steer=self.steer, accel=max(self.pedal, 0.0), brake=max(-self.pedal, 0.0))


def lag_alpha(reaction_lag: int) -> float:
    """Smoothing factor of the first-order low-pass; lag 0 passes the input through."""
    return 1.0 / (1.0 + reaction_lag)


def noisy_intent(
    profile: DriverProfile,
    state: VehicleState,
    terrain: Terrain,
    tick: int,
    *,
    episode_seed: int = 0,
    drivers: DriversConfig = DriversConfig(),
    vehicle: VehicleConfig = VehicleConfig(),
) -> Intent:
    """Deterministic controller output plus Gaussian noise drawn from ``(profile.seed, episode_seed, tick)``."""
    steer = pure_pursuit_steer(state, terrain, profile.lookahead, vehicle)
    accel, brake = speed_control(state, terrain, profile, drivers, vehicle)
    pedal = accel - brake
    if profile.steer_noise_sd > 0.0 or profile.pedal_noise_sd > 0.0:
        rng = np.random.default_rng([profile.seed, episode_seed, tick])
        steer += float(rng.normal(0.0, profile.steer_noise_sd))
        pedal += float(rng.normal(0.0, profile.pedal_noise_sd))
    return Intent(steer=min(max(steer, -1.0), 1.0), pedal=min(max(pedal, -1.0), 1.0))


class ScriptedDriver:
    """
    A parameterized human stand-in: pure pursuit plus speed control, perturbed by
    noise and smoothed by a reaction-lag filter that persists across ticks of one episode.
    """

    def __init__(
        self,
        profile: DriverProfile,
        *,
        drivers: DriversConfig = DriversConfig(),
        vehicle: VehicleConfig = VehicleConfig(),
    ) -> None:
        self.profile = profile
        self.drivers = drivers
        self.vehicle = vehicle
        self._alpha = lag_alpha(profile.reaction_lag)
        self._episode_seed = 0
        self._filtered: t.Optional[Intent] = None

    def __repr__(self) -> str:
        return f"ScriptedDriver({self.profile.name!r})"

    @property
    def driver_id(self) -> str:
        return self.profile.name

    def reset(self, seed: int) -> None:
        self._episode_seed = seed
        self._filtered = None

    def control(self, state: VehicleState, terrain: Terrain, tick: int) -> RawControl:
        intent = noisy_intent(
            self.profile,
            state,
            terrain,
            tick,
            episode_seed=self._episode_seed,
            drivers=self.drivers,
            vehicle=self.vehicle,
        )
        previous = self._filtered
        if previous is not None:
            intent = Intent(
                steer=previous.steer + self._alpha * (intent.steer - previous.steer),
                pedal=previous.pedal + self._alpha * (intent.pedal - previous.pedal),
            )
        self._filtered = intent
        return intent.to_control()

    def act(self, observation: Observation) -> RawControl:
        return self.control(observation.state, observation.terrain, observation.tick)


def act(
    profile: DriverProfile,
    state: VehicleState,
    terrain: Terrain,
    tick: int,
    *,
    drivers: DriversConfig = DriversConfig(),
    vehicle: VehicleConfig = VehicleConfig(),
) -> RawControl:
    """Single-tick control of a freshly reset driver; the lag filter has no history yet."""
    return ScriptedDriver(profile, drivers=drivers, vehicle=vehicle).control(state, terrain, tick)


def build_population(
    population: Population, drivers: DriversConfig = DriversConfig(), vehicle: VehicleConfig = VehicleConfig()
) -> list[ScriptedDriver]:
    return [ScriptedDriver(profile, drivers=drivers, vehicle=vehicle) for profile in drivers.population(population)]
