import hashlib
import pathlib
import typing as t

from pydantic import BaseModel, ConfigDict, Field

from src.numeric import CHECKPOINT_MAGIC
from src.preprocess import DATASET_MAGIC, DATASET_VERSION
from src.sim import LOG_VERSION

__all__: tuple[str, ...] = ("MANIFEST_FORMAT", "ARTIFACT_VERSIONS", "RunManifest", "fingerprint", "fingerprints")

MANIFEST_FORMAT = "teledrive-manifest"

ARTIFACT_VERSIONS: dict[str, str] = {
    "episode_log": str(LOG_VERSION),
    "terrain_file": str(LOG_VERSION),
    "dataset": f"{DATASET_MAGIC.decode('ascii')}/{DATASET_VERSION}",
    "checkpoint": CHECKPOINT_MAGIC.decode("ascii"),
    "model_sidecar": "1",
}


def fingerprint(path: pathlib.Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as stream:
        for chunk in iter(lambda: stream.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def fingerprints(paths: t.Iterable[pathlib.Path]) -> dict[str, str]:
    """SHA-256 of every existing file, keyed by its path, in sorted order."""
    return {str(path): fingerprint(path) for path in sorted(set(paths)) if path.is_file()}


class RunManifest(BaseModel):
    """Reproducibility record written next to the outputs of every command."""

    model_config = ConfigDict(extra="forbid")

    format: t.Literal["teledrive-manifest"] = MANIFEST_FORMAT
    version: t.Literal[1] = 1
    command: str
    argv: list[str]
    config_hash: str
    seeds: dict[str, int]
    inputs: dict[str, str] = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    artifact_versions: dict[str, str] = Field(default_factory=lambda: dict(ARTIFACT_VERSIONS))
    duration_seconds: float = 0.0

    def write(self, out_dir: pathlib.Path) -> pathlib.Path:
        path = out_dir / f"manifest-{self.command}.json"
        out_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path
