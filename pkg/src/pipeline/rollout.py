import concurrent.futures
import typing as t

import numpy as np

from src.config import Role, TeleDriveConfig
from src.drivers import ScriptedDriver
from src.exceptions import TeleDriveNonFiniteError
from src.logger import Logger
from src.model import CvaeModel
from src.numeric import Array
from src.preprocess import CONTROL_DIM, PERCEPTION_DIM, WINDOW_LENGTH, normalize_control, observe
from src.seeding import SeedTree
from src.sim import Episode, Observation, RawControl, Terrain, run_episode

__all__: tuple[str, ...] = ("denormalize_control", "ModelDriver", "rollout", "run_rollouts")


def denormalize_control(vector: Array | t.Sequence[float]) -> RawControl:
    """Inverse of control normalization; the fused pedal is split into accel and brake by sign."""
    steer_n, pedal_n = (float(v) for v in np.asarray(vector, dtype=np.float64).reshape(CONTROL_DIM))
    if not (np.isfinite(steer_n) and np.isfinite(pedal_n)):
        raise TeleDriveNonFiniteError(f"cannot denormalize non-finite control ({steer_n}, {pedal_n}).")
    pedal = 2.0 * pedal_n - 1.0
    return RawControl(steer=2.0 * steer_n - 1.0, accel=max(pedal, 0.0), brake=max(-pedal, 0.0))


class ModelDriver:
    """
    Drives with the inverse model once the history window is full.

    The first ``warmup`` ticks are driven by a noiseless scripted driver. After
    that the current perception comes from the simulator, or from the forward
    model when ``forward`` is given.
    """

    def __init__(
        self,
        inverse: CvaeModel,
        warmup_driver: ScriptedDriver,
        *,
        config: TeleDriveConfig,
        forward: t.Optional[CvaeModel] = None,
    ) -> None:
        self.inverse = inverse.expect_role(Role.INVERSE)
        self.forward = forward.expect_role(Role.FORWARD) if forward is not None else None
        self.warmup_driver = warmup_driver
        self.config = config
        self.warmup = max(config.rollout.warmup_ticks, WINDOW_LENGTH)
        self._history: list[Array] = []
        self._rng = np.random.default_rng(0)

    @property
    def driver_id(self) -> str:
        return "model-hallucinated" if self.forward is not None else "model"

    def reset(self, seed: int) -> None:
        self.warmup_driver.reset(seed)
        self._history = []
        self._rng = SeedTree(seed).rng("rollout")

    def _window(self, current: Array) -> Array:
        return np.stack([*self._history[-(WINDOW_LENGTH - 1) :], current])

    def _perceive(self, observation: Observation) -> Array:
        if self.forward is None or observation.tick < self.warmup:
            return observe(observation.lidar_points, observation.state, self.config.preprocess)
        last_control = self._history[-1][PERCEPTION_DIM:]
        current = np.concatenate([np.zeros(PERCEPTION_DIM), last_control])
        return self.forward.generate(self._window(current), self._rng)

    def act(self, observation: Observation) -> RawControl:
        perception = self._perceive(observation)
        if observation.tick < self.warmup:
            control = self.warmup_driver.act(observation)
        else:
            window = self._window(np.concatenate([perception, np.zeros(CONTROL_DIM)]))
            try:
                control = denormalize_control(self.inverse.generate(window, self._rng))
            except TeleDriveNonFiniteError as e:
                raise TeleDriveNonFiniteError(f"rollout aborted at tick {observation.tick}: {e.message}") from None
        self._history.append(np.concatenate([perception, normalize_control(control)]))
        return control


def rollout(
    inverse: CvaeModel,
    terrain: Terrain,
    seed: int,
    config: TeleDriveConfig,
    *,
    forward: t.Optional[CvaeModel] = None,
    logger: t.Optional[Logger] = None,
) -> Episode:
    """Closed-loop drive of the inverse model; logged exactly like a scripted episode."""
    warmup = ScriptedDriver(config.drivers.oracle, drivers=config.drivers, vehicle=config.vehicle)
    driver = ModelDriver(inverse, warmup, config=config, forward=forward)
    return run_episode(
        terrain,
        driver,
        seed,
        config.rollout.tick_limit,
        vehicle=config.vehicle,
        lidar=config.lidar,
        logger=logger,
    )


def run_rollouts(
    inverse: CvaeModel,
    terrain: Terrain,
    config: TeleDriveConfig,
    *,
    logger: Logger,
    forward: t.Optional[CvaeModel] = None,
    threads: int = 1,
) -> list[Episode]:
    """``config.rollout.runs`` independent rollouts, each with its own derived seed, in run order."""
    seeds = SeedTree(config.seed)
    run_seeds = [seeds.seed("rollout", i) for i in range(config.rollout.runs)]

    def _one(run: int) -> Episode:
        episode = rollout(inverse, terrain, run_seeds[run], config, forward=forward, logger=logger)
        logger.progress(
            f"rollout {run}: {len(episode)} ticks, completed={episode.completed}, "
            f"collisions={episode.collision_count}"
        )
        return episode

    if threads <= 1:
        return [_one(run) for run in range(len(run_seeds))]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(_one, range(len(run_seeds))))
