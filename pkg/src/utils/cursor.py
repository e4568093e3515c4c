import dataclasses
import struct
import typing as t

from src.exceptions import TeleDriveFormatError

__all__: tuple[str, ...] = ("ByteCursor",)


@dataclasses.dataclass
class ByteCursor:
    """
    A cursor for tracking the current position while decoding a binary file.
    """

    source: bytes = b""
    current: int = 0
    label: str = "<bytes>"

    def read(self, count: int) -> bytes:
        """
        Advance the cursor by ``count`` bytes.
        :return: The bytes that were passed over.
        """
        if count < 0 or self.current + count > len(self.source):
            raise TeleDriveFormatError(self.error_highlight(f"truncated: wanted {count} bytes"))
        chunk = self.source[self.current : self.current + count]
        self.current += count
        return chunk

    def unpack(self, fmt: str) -> tuple[t.Any, ...]:
        """
        Read one little-endian struct record.
        :param fmt: A struct format without the byte-order prefix.
        """
        layout = struct.Struct("<" + fmt)
        return layout.unpack(self.read(layout.size))

    def expect(self, tag: bytes) -> None:
        """
        Match the next bytes against a fixed tag (magic strings, section markers).
        """
        found = self.read(len(tag))
        if found != tag:
            raise TeleDriveFormatError(self.error_highlight(f"expected {tag!r}, found {found!r}"))

    def error_highlight(self, message: str) -> str:
        """
        Describe a decoding error together with where it happened.
        """
        return f"{self.label}: {message} at byte offset {self.current} of {len(self.source)}."

    @property
    def at_end(self) -> bool:
        return self.current >= len(self.source)
