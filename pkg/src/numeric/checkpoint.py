import pathlib
import struct
import typing as t

from src.exceptions import TeleDriveFileNotFoundError, TeleDriveFormatError
from src.utils.cursor import ByteCursor

from .optim import OptimizerState
from .params import ParameterSet, decode_arrays, encode_arrays

__all__: tuple[str, ...] = (
    "CHECKPOINT_MAGIC",
    "encode_checkpoint",
    "decode_checkpoint",
    "write_checkpoint",
    "read_checkpoint",
)

CHECKPOINT_MAGIC = b"TDGCKPT1"
PARAMETER_SECTION = b"PARM"
OPTIMIZER_SECTION = b"OPTM"


def encode_checkpoint(params: ParameterSet, state: t.Optional[OptimizerState] = None) -> bytes:
    chunks = [CHECKPOINT_MAGIC, PARAMETER_SECTION, encode_arrays(params.arrays())]
    if state is not None:
        chunks += [OPTIMIZER_SECTION, struct.pack("<Q", state.step), encode_arrays(state.arrays())]
    return b"".join(chunks)


def decode_checkpoint(blob: bytes, label: str = "checkpoint") -> tuple[ParameterSet, t.Optional[OptimizerState]]:
    cursor = ByteCursor(blob, label=label)
    cursor.expect(CHECKPOINT_MAGIC)
    cursor.expect(PARAMETER_SECTION)
    params = ParameterSet.from_arrays(decode_arrays(cursor))
    state: t.Optional[OptimizerState] = None
    if not cursor.at_end:
        cursor.expect(OPTIMIZER_SECTION)
        (step,) = cursor.unpack("Q")
        state = OptimizerState.from_arrays(int(step), decode_arrays(cursor))
    if not cursor.at_end:
        raise TeleDriveFormatError(cursor.error_highlight("trailing bytes"))
    return params, state


def write_checkpoint(path: pathlib.Path, params: ParameterSet, state: t.Optional[OptimizerState] = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(params, state))


def read_checkpoint(path: pathlib.Path) -> tuple[ParameterSet, t.Optional[OptimizerState]]:
    if not path.exists():
        raise TeleDriveFileNotFoundError(f"checkpoint {path} does not exist.")
    return decode_checkpoint(path.read_bytes(), label=str(path))
