import struct
import typing as t

import numpy as np

from src.exceptions import TeleDriveDimensionError, TeleDriveException, TeleDriveFormatError
from src.utils.cursor import ByteCursor

from .layers import LinearParams, LstmParams
from .tensor import Array, Tensor

__all__: tuple[str, ...] = ("ParameterSet", "encode_arrays", "decode_arrays")

PARAMETER_MAGIC = b"TDGPARM1"


def encode_arrays(arrays: t.Mapping[str, Array]) -> bytes:
    """Count, then per entry: name length, name, rank, dimensions, little-endian float64 values."""
    chunks = [struct.pack("<I", len(arrays))]
    for name, array in arrays.items():
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    return b"".join(chunks)


def decode_arrays(cursor: ByteCursor) -> dict[str, Array]:
    (count,) = cursor.unpack("I")
    arrays: dict[str, Array] = {}
    for _ in range(count):
        (length,) = cursor.unpack("I")
        name = cursor.read(length).decode("utf-8")
        (rank,) = cursor.unpack("I")
        shape = tuple(int(d) for d in cursor.unpack(f"{rank}Q"))
        size = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(cursor.read(8 * size), dtype="<f8").astype(np.float64)
        if name in arrays:
            raise TeleDriveFormatError(cursor.error_highlight(f"duplicate entry {name!r}"))
        arrays[name] = values.reshape(shape)
    return arrays


class ParameterSet:
    """Ordered, uniquely named trainable tensors; shapes are fixed once added."""

    def __init__(self) -> None:
        self._tensors: dict[str, Tensor] = {}

    def __len__(self) -> int:
        return len(self._tensors)

    def __iter__(self) -> t.Iterator[str]:
        return iter(self._tensors)

    def __contains__(self, name: object) -> bool:
        return name in self._tensors

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParameterSet):
            return NotImplemented
        return list(self) == list(other) and all(
            self[name].shape == other[name].shape and np.array_equal(self[name].data, other[name].data) for name in self
        )

    def items(self) -> t.ItemsView[str, Tensor]:
        return self._tensors.items()

    def add(self, name: str, value: Array) -> Tensor:
        if name in self._tensors:
            raise TeleDriveException(f"parameter {name!r} already exists.")
        tensor = Tensor(value, requires_grad=True, name=name)
        self._tensors[name] = tensor
        return tensor

    def add_linear(self, prefix: str, in_features: int, out_features: int, rng: np.random.Generator) -> None:
        """Weights uniform in +-1/sqrt(fan_in), zero bias."""
        bound = 1.0 / np.sqrt(in_features)
        self.add(f"{prefix}.weight", rng.uniform(-bound, bound, size=(in_features, out_features)))
        self.add(f"{prefix}.bias", np.zeros(out_features))

    def add_lstm(self, prefix: str, input_size: int, hidden_size: int, rng: np.random.Generator) -> None:
        self.add(
            f"{prefix}.weight_ih",
            rng.uniform(-1.0 / np.sqrt(input_size), 1.0 / np.sqrt(input_size), size=(input_size, 4 * hidden_size)),
        )
        self.add(
            f"{prefix}.weight_hh",
            rng.uniform(-1.0 / np.sqrt(hidden_size), 1.0 / np.sqrt(hidden_size), size=(hidden_size, 4 * hidden_size)),
        )
        self.add(f"{prefix}.bias", np.zeros(4 * hidden_size))

    def linear(self, prefix: str) -> LinearParams:
        return LinearParams(self[f"{prefix}.weight"], self[f"{prefix}.bias"])

    def lstm(self, prefix: str) -> LstmParams:
        return LstmParams(self[f"{prefix}.weight_ih"], self[f"{prefix}.weight_hh"], self[f"{prefix}.bias"])

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def gradients(self) -> dict[str, Array]:
        """Gradient per parameter; parameters the loss never touched get exact zeros."""
        return {
            name: (tensor.grad.copy() if tensor.grad is not None else np.zeros(tensor.shape))
            for name, tensor in self._tensors.items()
        }

    def arrays(self) -> dict[str, Array]:
        return {name: tensor.data.copy() for name, tensor in self._tensors.items()}

    def assign(self, arrays: t.Mapping[str, Array]) -> None:
        """Overwrite values in place; names and shapes must match exactly."""
        if list(arrays) != list(self._tensors):
            raise TeleDriveFormatError(f"parameter names differ: {list(arrays)} vs {list(self._tensors)}.")
        for name, array in arrays.items():
            tensor = self._tensors[name]
            if array.shape != tensor.shape:
                raise TeleDriveDimensionError.mismatch(f"parameter {name!r}", tuple(array.shape), tensor.shape)
            tensor.data = np.array(array, dtype=np.float64)

    def copy(self) -> "ParameterSet":
        return ParameterSet.from_arrays(self.arrays())

    @classmethod
    def from_arrays(cls, arrays: t.Mapping[str, Array]) -> "ParameterSet":
        params = cls()
        for name, array in arrays.items():
            params.add(name, array)
        return params

    @property
    def size(self) -> int:
        return sum(tensor.data.size for tensor in self._tensors.values())

    def to_bytes(self) -> bytes:
        return PARAMETER_MAGIC + encode_arrays(self.arrays())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ParameterSet":
        cursor = ByteCursor(blob, label="parameter set")
        cursor.expect(PARAMETER_MAGIC)
        params = cls.from_arrays(decode_arrays(cursor))
        if not cursor.at_end:
            raise TeleDriveFormatError(cursor.error_highlight("trailing bytes"))
        return params
