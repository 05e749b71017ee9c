"""Binary checkpoint container for trained networks.

Little-endian layout::

    magic       4 bytes  b"GFCK"
    version     u32      container format version (currently 1)
    header_len  u32      byte length of the JSON header
    header      UTF-8 JSON: topology, class count, metadata, and per-tensor
                {name, shape, offset, size} records (offsets relative to the
                payload start, sizes in float32 elements)
    payload     raw float32 data, concatenated in header order
    crc32       u32      CRC-32 of every preceding byte

Round-trips are bit-exact: parameters and batch-norm running statistics are
written raw and reloaded without conversion.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    CheckpointChecksumError,
    CheckpointFormatError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)
from .nn import Network, build_from_topology

MAGIC = b"GFCK"
FORMAT_VERSION = 1


def save_checkpoint(net: Network, path: str | Path, metadata: dict | None = None) -> None:
    tensors = []
    chunks = []
    offset = 0
    for name, data in net.state_dict().items():
        arr = np.ascontiguousarray(data, dtype="<f4")
        tensors.append(
            {"name": name, "shape": list(arr.shape), "offset": offset, "size": arr.size}
        )
        chunks.append(arr.tobytes())
        offset += arr.size

    header = {
        "format_version": FORMAT_VERSION,
        "class_count": net.class_count,
        "input_shape": list(net.input_shape),
        "topology": net.topology(),
        "tensors": tensors,
        "metadata": metadata or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", FORMAT_VERSION, len(header_bytes))
    blob += header_bytes
    for chunk in chunks:
        blob += chunk
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    Path(path).write_bytes(bytes(blob))


def load_checkpoint(path: str | Path) -> tuple[Network, dict]:
    """Rebuild the network and return it with the stored metadata."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise CheckpointTruncatedError(f"{path}: file shorter than the fixed header")
    if data[:4] != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {data[:4]!r}")
    version, header_len = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    header_end = 12 + header_len
    if len(data) < header_end + 4:
        raise CheckpointTruncatedError(f"{path}: header extends past end of file")

    stored_crc = struct.unpack_from("<I", data, len(data) - 4)[0]
    if zlib.crc32(data[:-4]) != stored_crc:
        raise CheckpointChecksumError(f"{path}: CRC32 mismatch")

    try:
        header = json.loads(data[12:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: unreadable header: {exc}") from exc

    payload = data[header_end:-4]
    expected = sum(t["size"] for t in header["tensors"]) * 4
    if len(payload) != expected:
        raise CheckpointTruncatedError(
            f"{path}: payload is {len(payload)} bytes, header promises {expected}"
        )

    net = build_from_topology(header["topology"], header["class_count"])
    state = {}
    for t in header["tensors"]:
        start = t["offset"] * 4
        arr = np.frombuffer(payload, dtype="<f4", count=t["size"], offset=start)
        state[t["name"]] = arr.reshape(t["shape"])
    net.load_state_dict(state)
    return net, header.get("metadata", {})
