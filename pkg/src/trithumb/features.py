"""8-channel feature stack: the neural decoder's input tensor.

Planes (all N x N float32 in [0, 1]):
  0      edge mask: 1 on the midpoint-line rasterization of every
         triangulation edge
  1      vertex mask: 1 at the pixel containing each vertex's mapped point
  2..4   the interpolated RGB reconstruction, render(mesh, N) / 255
  5..7   vertex palette color / 255 at vertex pixels, 0 elsewhere
         (the vertex mask disambiguates pure-black vertex colors)

Serialized as FTS1: magic "FTS1", uint32 N, uint32 plane count (8), then
the planes as little-endian float32, plane-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .codec import CompressedMesh, vertex_pixel
from .raster import render

MAGIC = b"FTS1"
PLANES = 8


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureStack:
    n: int
    planes: np.ndarray  # (8, n, n) float32

    def __post_init__(self):
        if self.planes.shape != (PLANES, self.n, self.n) \
                or self.planes.dtype != np.float32:
            raise FeatureError("planes must be float32 with shape (8, n, n)")


def _line_pixels(a: tuple[int, int], b: tuple[int, int]):
    """Integer midpoint line from pixel a to pixel b, inclusive."""
    (r0, c0), (r1, c1) = a, b
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dc - dr
    while True:
        yield r0, c0
        if (r0, c0) == (r1, c1):
            return
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c0 += sc
        if e2 < dc:
            err += dc
            r0 += sr


def build_features(mesh: CompressedMesh, n: int) -> FeatureStack:
    if n < mesh.grid_dim:
        raise FeatureError(f"feature size {n} smaller than grid {mesh.grid_dim}")
    m = mesh.grid_dim
    tri = mesh.triangulation()
    planes = np.zeros((PLANES, n, n), dtype=np.float32)

    pix = [vertex_pixel(v, m, n) for v, _ in mesh.vertices]
    for i, j in (tri.edges()):
        for r, c in _line_pixels(pix[i], pix[j]):
            planes[0, r, c] = 1.0
    for (_, ci), (r, c) in zip(mesh.vertices, pix):
        planes[1, r, c] = 1.0
        planes[5:8, r, c] = np.float32(
            np.asarray(mesh.palette[ci], dtype=np.float32) / 255.0)
    planes[2:5] = (render(mesh, n).astype(np.float32) / 255.0).transpose(2, 0, 1)
    return FeatureStack(n, planes)


def export_features(stack: FeatureStack, path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", stack.n, PLANES))
        fh.write(stack.planes.astype("<f4").tobytes())


def import_features(path) -> FeatureStack:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise FeatureError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 12:
        raise FeatureError(f"{path}: truncated header")
    n, planes = struct.unpack("<II", data[4:12])
    want = 12 + planes * n * n * 4
    if planes != PLANES or len(data) != want:
        raise FeatureError(f"{path}: expected {want} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype="<f4", offset=12).reshape(PLANES, n, n)
    return FeatureStack(n, arr.astype(np.float32))
