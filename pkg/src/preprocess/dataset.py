import dataclasses
import hashlib
import pathlib
import struct
import typing as t

import numpy as np

from src.config import Role
from src.exceptions import TeleDriveDatasetError, TeleDriveFileNotFoundError, TeleDriveFormatError
from src.numeric import Array
from src.utils.cursor import ByteCursor

from .vectors import STEP_DIM
from .windows import WINDOW_LENGTH

__all__: tuple[str, ...] = (
    "DATASET_MAGIC",
    "DATASET_VERSION",
    "WindowDataset",
    "encode_dataset",
    "decode_dataset",
    "write_dataset",
    "read_dataset",
)

DATASET_MAGIC = b"TDGDATA1"
DATASET_VERSION = 1
_HEADER = struct.Struct("<IIIIQ")
_TARGET_IDS: dict[Role, int] = {Role.FORWARD: 0, Role.INVERSE: 1}


@dataclasses.dataclass(frozen=True, eq=False)
class WindowDataset:
    """
    Stacked condition windows for one model role.

    The role names the slice a model learns to generate at the current step:
    perception for the forward model, control for the inverse model.
    """

    windows: Array
    role: Role

    def __len__(self) -> int:
        return int(self.windows.shape[0])

    @property
    def window_length(self) -> int:
        return int(self.windows.shape[1])

    @property
    def step_dim(self) -> int:
        return int(self.windows.shape[2])

    @classmethod
    def concatenate(cls, parts: t.Sequence[Array], role: Role, step_dim: int = STEP_DIM) -> "WindowDataset":
        if not parts:
            raise TeleDriveDatasetError(f"no windows to build the {role} dataset from.")
        return cls(windows=np.concatenate(parts).reshape(-1, WINDOW_LENGTH, step_dim), role=role)


def encode_dataset(dataset: WindowDataset) -> bytes:
    header = _HEADER.pack(
        DATASET_VERSION, dataset.window_length, dataset.step_dim, _TARGET_IDS[dataset.role], len(dataset)
    )
    return DATASET_MAGIC + header + np.ascontiguousarray(dataset.windows, dtype="<f4").tobytes()


def decode_dataset(
    blob: bytes,
    label: str = "<dataset>",
    *,
    expected_role: t.Optional[Role] = None,
    expected_step_dim: t.Optional[int] = STEP_DIM,
) -> WindowDataset:
    """Parse a dataset blob and check its header against what the caller expects."""
    cursor = ByteCursor(blob, label=label)
    cursor.expect(DATASET_MAGIC)
    version, window_length, step_dim, target_id, count = cursor.unpack(_HEADER.format[1:])
    if version != DATASET_VERSION:
        raise TeleDriveFormatError(f"{label}: unsupported dataset version {version}.")
    if window_length != WINDOW_LENGTH:
        raise TeleDriveDatasetError(f"{label}: window length {window_length}, expected {WINDOW_LENGTH}.")
    if expected_step_dim is not None and step_dim != expected_step_dim:
        raise TeleDriveDatasetError(f"{label}: per-step dimension {step_dim}, expected {expected_step_dim}.")
    roles = {value: role for role, value in _TARGET_IDS.items()}
    if target_id not in roles:
        raise TeleDriveFormatError(f"{label}: unknown target slice id {target_id}.")
    role = roles[target_id]
    if expected_role is not None and role is not expected_role:
        raise TeleDriveDatasetError(f"{label}: dataset targets the {role} role, expected {expected_role}.")
    values = np.frombuffer(cursor.read(4 * count * window_length * step_dim), dtype="<f4")
    if not cursor.at_end:
        raise TeleDriveFormatError(cursor.error_highlight("trailing bytes after the last window"))
    return WindowDataset(windows=values.astype(np.float64).reshape(count, window_length, step_dim), role=role)


def write_dataset(path: pathlib.Path, dataset: WindowDataset) -> str:
    """Write the dataset and return the SHA-256 fingerprint of the bytes written."""
    blob = encode_dataset(dataset)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def read_dataset(
    path: pathlib.Path, *, expected_role: t.Optional[Role] = None, expected_step_dim: t.Optional[int] = STEP_DIM
) -> tuple[WindowDataset, str]:
    """Read a dataset file; returns it with its SHA-256 fingerprint."""
    if not path.exists():
        raise TeleDriveFileNotFoundError(f"dataset file {path} does not exist.")
    blob = path.read_bytes()
    dataset = decode_dataset(blob, str(path), expected_role=expected_role, expected_step_dim=expected_step_dim)
    return dataset, hashlib.sha256(blob).hexdigest()
