"""Reader for FTS1 feature-stack files.

Layout: 4-byte magic "FTS1", uint32 n, uint32 plane count (always 8),
both little-endian, then the planes as little-endian float32,
plane-major, each n x n.  This module owns its own copy of the parser:
the file format is the contract between the packages, not any library
code.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"FTS1"
PLANES = 8


class StackFormatError(ValueError):
    pass


def read_stack(path) -> np.ndarray:
    """Return the (8, n, n) float32 plane stack stored at path."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise StackFormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 12:
        raise StackFormatError(f"{path}: truncated header")
    n, planes = struct.unpack("<II", data[4:12])
    want = 12 + planes * n * n * 4
    if planes != PLANES or len(data) != want:
        raise StackFormatError(f"{path}: expected {want} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype="<f4", offset=12)
    return arr.reshape(PLANES, n, n).astype(np.float32)
