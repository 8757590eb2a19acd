"""Writer for the WEMB v1 embedding file format.

Layout (little-endian, no padding):

    magic 'WEMB' | version u16 = 1 | flags u16 = 0 | N u64 | d u32
    | tag table: count u32, then count x (len u32 + UTF-8 bytes)
    | N records: id (len u32 + UTF-8) | tag index u32 | label u8 | d x f32

Tag table entry 0 is reserved for the preprocessing descriptor of the run
(encoder id + canonical preprocessing); per-record source tags follow.
"""

import struct

import numpy as np

MAGIC = b"WEMB"
VERSION = 1


class WembWriteError(ValueError):
    pass


def _string(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def write_wemb(path, records, d: int, preprocessing: str) -> None:
    """Serialize records of (id, source, label, vector) to a WEMB v1 file.

    ``preprocessing`` lands in tag-table entry 0 so every file carries the
    exact encoder + preprocessing that produced it.
    """
    ids = [r[0] for r in records]
    if len(set(ids)) != len(ids):
        raise WembWriteError("record ids must be unique")
    table: dict[str, int] = {preprocessing: 0}
    for _, source, _, _ in records:
        if source not in table:
            table[source] = len(table)
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HHQI", VERSION, 0, len(records), d)
    out += struct.pack("<I", len(table))
    for tag in table:
        out += _string(tag)
    for rid, source, label, vec in records:
        if label not in (0, 1):
            raise WembWriteError(f"label for {rid!r} must be 0/1, got {label}")
        arr = np.ascontiguousarray(vec, dtype="<f4")
        if arr.shape != (d,):
            raise WembWriteError(
                f"embedding for {rid!r} has shape {arr.shape}, expected ({d},)"
            )
        if not np.isfinite(arr).all():
            raise WembWriteError(f"embedding for {rid!r} has non-finite values")
        out += _string(rid)
        out += struct.pack("<IB", table[source], label)
        out += arr.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(out))
