import pathlib

import pytest
import yaml

from src.config import (
    THREADS_ENV,
    Population,
    TeleDriveConfig,
    TrainingMode,
    config_hash,
    load_config,
    parse_config,
    resolve_threads,
    serialize_config,
)
from src.exceptions import TeleDriveConfigError, TeleDriveErrorTypes, TeleDriveFileNotFoundError


class TestDefaults:
    def test_no_file(self) -> None:
        config = parse_config(None)
        assert config == TeleDriveConfig()
        assert config.terrain.section_count == 9
        assert config.model.mode is TrainingMode.PAPER
        assert config.training.learning_rate == 1e-3
        assert config.rollout.runs == 28

    def test_empty_file(self, tmp_path: pathlib.Path) -> None:
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert parse_config(path) == TeleDriveConfig()

    def test_partial_file_keeps_defaults(self, tmp_path: pathlib.Path) -> None:
        path = tmp_path / "partial.yaml"
        path.write_text("seed: 11\ntraining:\n  epochs: 5\n")
        config = parse_config(path)
        assert config.seed == 11
        assert config.training.epochs == 5
        assert config.training.batch_size == 64

    def test_populations(self) -> None:
        drivers = TeleDriveConfig().drivers
        assert len(drivers.population(Population.INEXPERIENCED)) == 14
        assert len(drivers.population(Population.EXPERIENCED)) == 5
        assert drivers.population(Population.ORACLE) == [drivers.oracle]


class TestValidation:
    def test_error_names_the_key(self) -> None:
        with pytest.raises(TeleDriveConfigError, match="training.batch_size"):
            load_config({"training": {"batch_size": 0}})

    def test_unknown_keys(self) -> None:
        with pytest.raises(TeleDriveConfigError, match="terrain.bumpiness"):
            load_config({"terrain": {"bumpiness": 3}})

    def test_short_tick_limit(self) -> None:
        with pytest.raises(TeleDriveConfigError):
            load_config({"rollout": {"tick_limit": 100}})

    def test_missing_file(self, tmp_path: pathlib.Path) -> None:
        with pytest.raises(TeleDriveFileNotFoundError) as info:
            parse_config(tmp_path / "absent.yaml")
        assert info.value.error_type is TeleDriveErrorTypes.EX_NOINPUT

    @pytest.mark.parametrize("text", ["seed: [1,\n", "- 1\n- 2\n"])
    def test_malformed(self, tmp_path: pathlib.Path, text: str) -> None:
        path = tmp_path / "bad.yaml"
        path.write_text(text)
        with pytest.raises(TeleDriveConfigError) as info:
            parse_config(path)
        assert str(info.value).startswith("EX_CONFIG: ")


class TestSerialization:
    def test_round_trip(self) -> None:
        config = load_config({"seed": 3, "model": {"mode": "standard_cvae", "beta": 0.5}})
        assert load_config(yaml.safe_load(serialize_config(config))) == config

    def test_hash(self) -> None:
        assert config_hash(TeleDriveConfig()) == config_hash(TeleDriveConfig())
        assert config_hash(TeleDriveConfig()) != config_hash(TeleDriveConfig(seed=1))
        assert len(config_hash(TeleDriveConfig())) == 64


class TestThreads:
    def test_flag_wins(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(THREADS_ENV, "3")
        assert resolve_threads(2, TeleDriveConfig(threads=4)) == 2

    def test_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(THREADS_ENV, "3")
        assert resolve_threads(None, TeleDriveConfig(threads=4)) == 3

    def test_config(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_threads(None, TeleDriveConfig(threads=4)) == 4

    def test_bad_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(TeleDriveConfigError):
            resolve_threads(None, TeleDriveConfig())
