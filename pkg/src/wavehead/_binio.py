"""Little-endian binary cursor helpers for the WEMB/WCHK file formats.

The reader tracks its byte offset so malformed files can be rejected with
the exact position, and refuses trailing bytes.
"""

import struct

import numpy as np

from .errors import FormatError


class Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise FormatError(
                f"truncated file: need {n} bytes for {what}", offset=self.pos
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def _unpack(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))[0]

    def u8(self, what: str) -> int:
        return self._unpack("<B", what)

    def u16(self, what: str) -> int:
        return self._unpack("<H", what)

    def u32(self, what: str) -> int:
        return self._unpack("<I", what)

    def u64(self, what: str) -> int:
        return self._unpack("<Q", what)

    def f64(self, what: str) -> float:
        return self._unpack("<d", what)

    def string(self, what: str) -> str:
        n = self.u32(f"{what} length")
        start = self.pos
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"invalid UTF-8 in {what}: {exc}", offset=start)

    def f32_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4").astype(np.float32)

    def f64_array(self, count: int, what: str) -> np.ndarray:
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64)

    def expect_eof(self) -> None:
        if self.pos != len(self.data):
            raise FormatError(
                f"{len(self.data) - self.pos} trailing bytes after payload",
                offset=self.pos,
            )


class Writer:
    def __init__(self):
        self.buf = bytearray()

    def raw(self, data: bytes):
        self.buf += data

    def u8(self, v: int):
        self.buf += struct.pack("<B", v)

    def u16(self, v: int):
        self.buf += struct.pack("<H", v)

    def u32(self, v: int):
        self.buf += struct.pack("<I", v)

    def u64(self, v: int):
        self.buf += struct.pack("<Q", v)

    def f64(self, v: float):
        self.buf += struct.pack("<d", v)

    def string(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.buf += raw

    def f32_array(self, arr: np.ndarray):
        self.buf += np.ascontiguousarray(arr, dtype="<f4").tobytes()

    def f64_array(self, arr: np.ndarray):
        self.buf += np.ascontiguousarray(arr, dtype="<f8").tobytes()

    def getvalue(self) -> bytes:
        return bytes(self.buf)
