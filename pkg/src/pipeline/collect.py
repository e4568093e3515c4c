import concurrent.futures
import dataclasses
import pathlib
import threading
import typing as t

from src.config import Population, TeleDriveConfig
from src.drivers import ScriptedDriver, build_population
from src.logger import Logger
from src.numeric import Array
from src.preprocess import preprocess_episode
from src.seeding import SeedTree
from src.sim import Driver, Episode, Terrain, generate_terrain, run_episode, write_episode

__all__: tuple[str, ...] = ("EpisodeJob", "CollectedEpisode", "TerrainCache", "Collector", "population_terrains")


@dataclasses.dataclass(frozen=True)
class EpisodeJob:
    driver: Driver
    terrain_seed: int
    seed: int
    repeat: int = 0

    @property
    def name(self) -> str:
        return f"terrain-{self.terrain_seed}_{self.driver.driver_id}_r{self.repeat}"


@dataclasses.dataclass(frozen=True, eq=False)
class CollectedEpisode:
    """An episode without its LiDAR sweeps, plus the preprocessed per-tick steps."""

    episode: Episode
    steps: Array
    log_path: t.Optional[pathlib.Path] = None


class TerrainCache:
    """Generates each terrain once; safe to share between worker threads."""

    def __init__(self, config: TeleDriveConfig) -> None:
        self.config = config
        self._terrains: dict[int, Terrain] = {}
        self._lock = threading.Lock()

    def get(self, seed: int) -> Terrain:
        with self._lock:
            if seed not in self._terrains:
                vehicle_width = self.config.vehicle.width
                self._terrains[seed] = generate_terrain(seed, self.config.terrain, vehicle_width=vehicle_width)
            return self._terrains[seed]


def population_terrains(config: TeleDriveConfig, population: Population) -> tuple[list[int], int]:
    """Terrain seeds a population drives and how many times each driver repeats a terrain."""
    if population is Population.INEXPERIENCED:
        return list(config.collection.inexperienced_terrains), config.collection.repeats
    return list(config.collection.experienced_terrains), 1


class Collector:
    """Runs scripted drivers over their terrains in parallel and writes one log per episode."""

    def __init__(
        self,
        config: TeleDriveConfig,
        *,
        logger: Logger,
        threads: int = 1,
        terrains: t.Optional[TerrainCache] = None,
    ) -> None:
        self.config = config
        self.logger = logger
        self.threads = max(1, threads)
        self.terrains = terrains or TerrainCache(config)

    def jobs(
        self, population: Population, drivers: t.Optional[t.Sequence[ScriptedDriver]] = None
    ) -> list[EpisodeJob]:
        """One job per (terrain, driver, repeat), each seeded independently of the other jobs."""
        seeds = SeedTree(self.config.seed)
        terrain_seeds, repeats = population_terrains(self.config, population)
        if drivers is None:
            drivers = build_population(population, self.config.drivers, self.config.vehicle)
        jobs: list[EpisodeJob] = []
        for terrain_seed in terrain_seeds:
            for driver in drivers:
                component = f"episode-{population}-terrain-{terrain_seed}-{driver.driver_id}"
                for repeat in range(repeats):
                    jobs.append(EpisodeJob(driver, terrain_seed, seeds.seed(component, repeat), repeat))
        return jobs

    def _run(self, job: EpisodeJob, out_dir: t.Optional[pathlib.Path]) -> CollectedEpisode:
        terrain = self.terrains.get(job.terrain_seed)
        episode = run_episode(
            terrain,
            job.driver,
            job.seed,
            self.config.collection.tick_limit,
            vehicle=self.config.vehicle,
            lidar=self.config.lidar,
            logger=self.logger,
        )
        path = None
        if out_dir is not None:
            path = out_dir / f"{job.name}.jsonl.gz"
            write_episode(path, episode)
        steps = preprocess_episode(episode, self.config.preprocess)
        self.logger.progress(
            f"{job.name}: {len(episode)} ticks, completed={episode.completed}, collisions={episode.collision_count}"
        )
        return CollectedEpisode(episode=episode.without_points(), steps=steps, log_path=path)

    def run(self, jobs: t.Sequence[EpisodeJob], out_dir: t.Optional[pathlib.Path] = None) -> list[CollectedEpisode]:
        """
        Run ``jobs`` and return their results in job order.

        Scripted drivers are copied per job on the thread pool so concurrent jobs never
        share a lag filter.
        """
        if self.threads == 1 or len(jobs) < 2:
            return [self._run(job, out_dir) for job in jobs]
        results: list[t.Optional[CollectedEpisode]] = [None] * len(jobs)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.threads) as executor:
            futures = {executor.submit(self._run, self._own(job), out_dir): i for i, job in enumerate(jobs)}
            for future in concurrent.futures.as_completed(futures):
                results[futures[future]] = future.result()
        return [result for result in results if result is not None]

    def _own(self, job: EpisodeJob) -> EpisodeJob:
        driver = job.driver
        if isinstance(driver, ScriptedDriver):
            driver = ScriptedDriver(driver.profile, drivers=driver.drivers, vehicle=driver.vehicle)
        return dataclasses.replace(job, driver=driver)

    def collect(self, population: Population, out_dir: t.Optional[pathlib.Path] = None) -> list[CollectedEpisode]:
        jobs = self.jobs(population)
        self.logger.info(f"collecting {len(jobs)} {population} episodes on {self.threads} thread(s)")
        return self.run(jobs, out_dir)
