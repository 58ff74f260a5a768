"""Bit-exact binary checkpoints.

Layout (all integers little-endian):

    magic   "CLVE"              4 bytes
    version u32                 currently 1
    tensors, names sorted lexicographically, each:
        name length  u16
        name         UTF-8 bytes
        dtype tag    u8   (0 = float32, the only defined tag)
        rank         u8
        dims         u32 * rank
        payload      row-major little-endian float32
    crc32   u32   of every preceding byte

Round-trips preserve every float bit. Structural damage surfaces as a
truncation error; byte damage as a CRC error.
"""

from __future__ import annotations

import datetime
import json
import struct
import zlib

import numpy as np

from .errors import (
    BadMagicError,
    CrcMismatchError,
    TruncatedCheckpointError,
    ValidationError,
    VersionMismatchError,
)

MAGIC = b"CLVE"
VERSION = 1
DTYPE_F32 = 0


def save(tensors: dict[str, np.ndarray], path) -> None:
    """Write named float32 tensors. Deterministic bytes for equal
    inputs: names are sorted and the layout has no timestamps."""
    names = list(tensors)
    if len(set(names)) != len(names):
        raise ValidationError("duplicate tensor names")
    body = bytearray()
    body += MAGIC
    body += struct.pack("<I", VERSION)
    for name in sorted(names):
        arr = np.asarray(tensors[name])
        if arr.dtype != np.float32:
            raise ValidationError(f"tensor {name!r} must be float32, got {arr.dtype}")
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValidationError(f"tensor name too long: {name!r}")
        body += struct.pack("<H", len(encoded))
        body += encoded
        body += struct.pack("<BB", DTYPE_F32, arr.ndim)
        for dim in arr.shape:
            body += struct.pack("<I", dim)
        body += arr.astype("<f4", copy=False).tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(bytes(body))


def load(path) -> dict[str, np.ndarray]:
    """Read a checkpoint back into {name: float32 array}."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < 4:
        raise TruncatedCheckpointError("file shorter than the magic header")
    if buf[:4] != MAGIC:
        raise BadMagicError(f"bad magic {buf[:4]!r}")
    if len(buf) < 8:
        raise TruncatedCheckpointError("file ends inside the version field")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != VERSION:
        raise VersionMismatchError(f"unsupported checkpoint version {version}")
    if len(buf) < 12:
        raise TruncatedCheckpointError("file too short to hold a checksum")

    payload_end = len(buf) - 4
    tensors: dict[str, np.ndarray] = {}
    pos = 8
    while pos < payload_end:
        if pos + 2 > payload_end:
            raise TruncatedCheckpointError("file ends inside a name length")
        (name_len,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        if pos + name_len + 2 > payload_end:
            raise TruncatedCheckpointError("file ends inside a tensor header")
        name = buf[pos : pos + name_len].decode("utf-8")
        pos += name_len
        dtype_tag, rank = struct.unpack_from("<BB", buf, pos)
        pos += 2
        if dtype_tag != DTYPE_F32:
            raise ValidationError(f"unknown dtype tag {dtype_tag} for tensor {name!r}")
        if pos + 4 * rank > payload_end:
            raise TruncatedCheckpointError("file ends inside tensor dimensions")
        dims = struct.unpack_from(f"<{rank}I", buf, pos) if rank else ()
        pos += 4 * rank
        count = 1
        for dim in dims:
            count *= dim
        nbytes = 4 * count
        if pos + nbytes > payload_end:
            raise TruncatedCheckpointError(f"file ends inside the payload of {name!r}")
        arr = np.frombuffer(buf, dtype="<f4", count=count, offset=pos).reshape(dims)
        pos += nbytes
        if name in tensors:
            raise ValidationError(f"duplicate tensor name {name!r}")
        tensors[name] = arr.astype(np.float32, copy=True)

    (stored_crc,) = struct.unpack_from("<I", buf, payload_end)
    actual_crc = zlib.crc32(buf[:payload_end]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise CrcMismatchError(
            f"checksum mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )
    return tensors


def write_metadata(path, info: dict) -> None:
    """Run-metadata sidecar next to a checkpoint or report file."""
    meta = dict(info)
    meta.setdefault("created", datetime.datetime.now(datetime.timezone.utc).isoformat())
    with open(f"{path}.meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metadata(path) -> dict:
    with open(f"{path}.meta.json", "r", encoding="utf-8") as fh:
        return json.load(fh)
