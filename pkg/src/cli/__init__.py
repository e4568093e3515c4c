from .app import TeleDrive, build_parser, main, run_command
from .gradcheck import gradient_suite, toy_cvae_config
from .manifest import ARTIFACT_VERSIONS, MANIFEST_FORMAT, RunManifest, fingerprint, fingerprints

__all__: tuple[str, ...] = (
    "TeleDrive",
    "build_parser",
    "run_command",
    "main",
    "gradient_suite",
    "toy_cvae_config",
    "ARTIFACT_VERSIONS",
    "MANIFEST_FORMAT",
    "RunManifest",
    "fingerprint",
    "fingerprints",
)
