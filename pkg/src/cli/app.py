import argparse
import csv
import json
import logging
import pathlib
import sys
import time
import typing as t

from src.config import Population, Role, TeleDriveConfig, config_hash, parse_config, resolve_threads
from src.evaluation import compare_populations, write_report
from src.exceptions import (
    TeleDriveConfigError,
    TeleDriveErrorTypes,
    TeleDriveException,
    TeleDriveFileNotFoundError,
    TeleDriveRoleError,
)
from src.logger import Logger
from src.model import CvaeModel, load_model, save_model, sidecar_path
from src.pipeline import Collector, build_datasets, load_episode_steps, run_rollouts, train_forward, train_inverse
from src.pipeline.training import write_history
from src.preprocess import read_dataset, write_dataset
from src.sim import Episode, Terrain, generate_terrain, read_episode, read_terrain, write_episode, write_terrain

from .gradcheck import gradient_suite
from .manifest import RunManifest, fingerprints

__all__: tuple[str, ...] = ("TeleDrive", "build_parser", "run_command", "main")

EPISODE_PATTERNS: tuple[str, ...] = ("*.jsonl.gz", "*.jsonl")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=pathlib.Path, help="YAML configuration file; absent keys keep their defaults")
    common.add_argument("--seed", type=int, help="root seed, overrides the config file")
    common.add_argument("--out", type=pathlib.Path, default=pathlib.Path("out"), help="output directory")
    common.add_argument("--threads", type=int, help="worker threads (falls back to TDG_THREADS, then the config)")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    common.add_argument("--log-file", action="store_true", help="also log to a daily file under logs/")

    parser = argparse.ArgumentParser(
        prog="teledrive", description="Generative simulation of teleoperated driver behaviour."
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    terrain = commands.add_parser("gen-terrain", parents=[common], help="generate and store canyon terrains")
    terrain.add_argument(
        "--terrain-seed", type=int, action="append", help="terrain seed (repeatable; default: every configured terrain)"
    )

    collect = commands.add_parser("collect", parents=[common], help="drive scripted populations and log episodes")
    collect.add_argument(
        "--population", type=Population, choices=list(Population), default=Population.INEXPERIENCED
    )

    dataset = commands.add_parser("build-dataset", parents=[common], help="window episode logs into a dataset file")
    dataset.add_argument("--role", type=Role, choices=list(Role), required=True)
    dataset.add_argument("--episodes", type=pathlib.Path, nargs="+", required=True, help="episode logs or directories")

    train = commands.add_parser("train", parents=[common], help="train the forward or inverse model")
    train.add_argument("--role", type=Role, choices=list(Role), required=True)
    train.add_argument("--dataset", type=pathlib.Path, required=True)
    train.add_argument("--forward", type=pathlib.Path, help="forward model checkpoint (inverse role)")

    rollout = commands.add_parser("rollout", parents=[common], help="closed-loop drives of the inverse model")
    rollout.add_argument("--inverse", type=pathlib.Path, required=True)
    rollout.add_argument("--forward", type=pathlib.Path, help="forward model for hallucinated perception")
    rollout.add_argument("--terrain", type=pathlib.Path, help="terrain file (default: the evaluation terrain)")

    evaluate = commands.add_parser("evaluate", parents=[common], help="compare driver and model populations")
    evaluate.add_argument("--drivers", type=pathlib.Path, nargs="+", required=True)
    evaluate.add_argument("--model", type=pathlib.Path, nargs="+", required=True)
    evaluate.add_argument("--terrain", type=pathlib.Path, help="terrain file (default: the evaluation terrain)")

    commands.add_parser("gradcheck", parents=[common], help="finite-difference gradient suite")
    return parser


def _episode_paths(paths: t.Sequence[pathlib.Path]) -> list[pathlib.Path]:
    found: list[pathlib.Path] = []
    for path in paths:
        if path.is_dir():
            found.extend(sorted({p for pattern in EPISODE_PATTERNS for p in path.glob(pattern)}))
        elif path.is_file():
            found.append(path)
        else:
            raise TeleDriveFileNotFoundError(f"episode path {path} does not exist.")
    return found


class TeleDrive:
    """The command-line application; one instance handles one invocation."""

    def __init__(self, argv: t.Optional[t.Sequence[str]] = None) -> None:
        self.argv = list(sys.argv[1:] if argv is None else argv)
        self.parser = build_parser()
        self.logger = Logger(name="teledrive")
        self.config = TeleDriveConfig()
        self.threads = 1
        self._inputs: list[pathlib.Path] = []
        self._outputs: list[pathlib.Path] = []

    def _setup(self, args: argparse.Namespace) -> None:
        self.logger = Logger(
            name="teledrive",
            level=logging.DEBUG if args.verbose else logging.INFO,
            file=args.log_file,
            folder=args.out / "logs",
        )
        config = parse_config(args.config)
        if args.config is not None:
            self._inputs.append(args.config)
        if args.seed is not None:
            config = config.model_copy(update={"seed": args.seed})
        self.config = config
        self.threads = resolve_threads(args.threads, config)

    def _evaluation_terrain(self, path: t.Optional[pathlib.Path]) -> Terrain:
        if path is not None:
            self._inputs.append(path)
            return read_terrain(path)
        seeds = self.config.collection.inexperienced_terrains
        if not seeds:
            raise TeleDriveConfigError("collection.inexperienced_terrains is empty; pass --terrain.")
        return generate_terrain(seeds[-1], self.config.terrain, vehicle_width=self.config.vehicle.width)

    def _load(self, path: pathlib.Path, role: Role) -> CvaeModel:
        model, _, _ = load_model(path, expected_role=role)
        self._inputs.extend([path, sidecar_path(path)])
        return model

    def _read_episodes(self, paths: t.Sequence[pathlib.Path]) -> list[Episode]:
        files = _episode_paths(paths)
        self._inputs.extend(files)
        return [read_episode(path) for path in files]

    def gen_terrain(self, args: argparse.Namespace) -> None:
        collection = self.config.collection
        seeds = args.terrain_seed or [*collection.experienced_terrains, *collection.inexperienced_terrains]
        for seed in dict.fromkeys(seeds):
            terrain = generate_terrain(seed, self.config.terrain, vehicle_width=self.config.vehicle.width)
            path = args.out / f"{terrain.terrain_id}.json"
            write_terrain(path, terrain)
            self._outputs.append(path)
            self.logger.info(f"wrote {path}: {terrain.length:.0f} m, {len(terrain.centerline)} samples")

    def collect(self, args: argparse.Namespace) -> None:
        collector = Collector(self.config, logger=self.logger, threads=self.threads)
        results = collector.collect(args.population, args.out)
        self._outputs.extend(result.log_path for result in results if result.log_path is not None)
        completed = sum(result.episode.completed for result in results)
        self.logger.info(f"{completed}/{len(results)} {args.population} episodes reached the destination")

    def build_dataset(self, args: argparse.Namespace) -> None:
        files = _episode_paths(args.episodes)
        self._inputs.extend(files)
        steps = load_episode_steps(files, self.config.preprocess)
        dataset = build_datasets(steps, args.role, logger=self.logger, config=self.config.preprocess)
        path = args.out / f"{args.role}.tdg"
        digest = write_dataset(path, dataset)
        self._outputs.append(path)
        self.logger.info(f"wrote {path} ({len(dataset)} windows, sha256 {digest[:12]})")

    def train(self, args: argparse.Namespace) -> None:
        dataset, digest = read_dataset(args.dataset, expected_role=args.role)
        self._inputs.append(args.dataset)
        settings, training, seed = self.config.model, self.config.training, self.config.seed
        if args.role is Role.FORWARD:
            result = train_forward(dataset, settings, training, seed=seed, logger=self.logger)
        else:
            forward = self._load(args.forward, Role.FORWARD) if args.forward is not None else None
            result = train_inverse(dataset, forward, settings, training, seed=seed, logger=self.logger)
        path = args.out / f"{args.role}.ckpt"
        args.out.mkdir(parents=True, exist_ok=True)
        save_model(
            path,
            result.model,
            result.state,
            dataset_fingerprint=digest,
            best_epoch=result.best_epoch,
            best_val_loss=result.best_val_loss,
        )
        history = args.out / f"{args.role}_history.csv"
        write_history(history, result.history)
        self._outputs.extend([path, sidecar_path(path), history])

    def rollout(self, args: argparse.Namespace) -> None:
        inverse = self._load(args.inverse, Role.INVERSE)
        forward = None
        if self.config.rollout.hallucinated_perception:
            if args.forward is None:
                raise TeleDriveRoleError("rollout.hallucinated_perception needs --forward.")
            forward = self._load(args.forward, Role.FORWARD)
        terrain = self._evaluation_terrain(args.terrain)
        episodes = run_rollouts(
            inverse, terrain, self.config, logger=self.logger, forward=forward, threads=self.threads
        )
        for run, episode in enumerate(episodes):
            path = args.out / f"rollout-{run:02d}.jsonl.gz"
            write_episode(path, episode)
            self._outputs.append(path)
        completed = sum(episode.completed for episode in episodes)
        collisions = sum(episode.collision_count for episode in episodes)
        self.logger.info(f"{completed}/{len(episodes)} rollouts completed, {collisions} collisions in total")

    def evaluate(self, args: argparse.Namespace) -> None:
        terrain = self._evaluation_terrain(args.terrain)
        drivers = self._read_episodes(args.drivers)
        on_terrain = [episode for episode in drivers if episode.terrain_id == terrain.terrain_id]
        if len(on_terrain) < len(drivers):
            self.logger.info(
                f"using {len(on_terrain)} of {len(drivers)} driver episodes, the ones driven on {terrain.terrain_id}"
            )
        model = self._read_episodes(args.model)
        report = compare_populations(on_terrain, model, terrain, logger=self.logger)
        self._outputs.extend(write_report(report, args.out))

    def gradcheck(self, args: argparse.Namespace) -> None:
        reports = gradient_suite(self.config.seed)
        path = args.out / "gradcheck.csv"
        args.out.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(("check", "max_error", "tolerance", "passed"))
            for report in reports:
                writer.writerow((report.name, repr(report.max_error), repr(report.tolerance), report.passed))
                self.logger.info(f"gradcheck {report.name}: max relative error {report.max_error:.3e}")
        self._outputs.append(path)
        failed = [report.name for report in reports if not report.passed]
        if failed:
            raise TeleDriveException(f"gradient check failed for {', '.join(failed)}.")

    def _dispatch(self, args: argparse.Namespace) -> None:
        handlers: dict[str, t.Callable[[argparse.Namespace], None]] = {
            "gen-terrain": self.gen_terrain,
            "collect": self.collect,
            "build-dataset": self.build_dataset,
            "train": self.train,
            "rollout": self.rollout,
            "evaluate": self.evaluate,
            "gradcheck": self.gradcheck,
        }
        handlers[args.command](args)

    def run(self) -> int:
        try:
            args = self.parser.parse_args(self.argv)
        except SystemExit as e:
            return e.code if isinstance(e.code, int) else (0 if e.code is None else 2)
        started = time.perf_counter()
        try:
            self._setup(args)
            self.logger.info(f"running {args.command} (seed {self.config.seed}, {self.threads} thread(s))")
            self._dispatch(args)
            manifest = RunManifest(
                command=args.command,
                argv=self.argv,
                config_hash=config_hash(self.config),
                seeds={"root": self.config.seed},
                inputs=fingerprints(self._inputs),
                outputs=fingerprints(self._outputs),
                duration_seconds=round(time.perf_counter() - started, 3),
            )
            self.logger.info(f"wrote {manifest.write(args.out)}")
        except TeleDriveException as e:
            self.logger.error(e)
            return self._fail(e.error_type, type(e).__name__, e.message)
        except Exception as e:
            self.logger.exception(f"{args.command} failed unexpectedly")
            error_type = TeleDriveErrorTypes.EX_IOERR if isinstance(e, OSError) else TeleDriveErrorTypes.EX_SOFTWARE
            return self._fail(error_type, type(e).__name__, str(e) or type(e).__name__)
        return 0

    @staticmethod
    def _fail(error_type: TeleDriveErrorTypes, kind: str, message: str) -> int:
        """Print the machine-readable error line on stderr."""
        print(json.dumps({"error": error_type.name, "type": kind, "message": message}), file=sys.stderr)
        return 1


def run_command(argv: t.Optional[t.Sequence[str]] = None) -> int:
    return TeleDrive(argv).run()


def main() -> int:
    return run_command()
