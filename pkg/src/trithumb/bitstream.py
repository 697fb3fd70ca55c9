"""Bit-exact mesh serialization (the .tmc wire format).

Layout, MSB-first within each byte:

    version   4 bits, value 1
    M         8 bits (grid dimension)
    K         8 bits (palette size)
    palette   K x 24 bits (R, G, B)
    V        16 bits (vertex count)
    gaps      Elias-gamma codes over sorted linear indices r*M + c:
              g0 = i0 + 1, then g_t = i_t - i_{t-1}
    colors    V x ceil(log2 K) bits (absent when K = 1)
    padding   zero bits to the next byte boundary

Gamma gap coding beats an occupancy bitmap (M^2/8 = 136 bytes at M = 33)
by a wide margin on sparse meshes.  The stream is canonical: equal meshes
give equal bytes, and the reader rejects anything serialize cannot emit.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .codec import CompressedMesh


class BitstreamError(ValueError):
    pass


class TruncatedStreamError(BitstreamError):
    pass


class BadVersionError(BitstreamError):
    pass


class NonCanonicalError(BitstreamError):
    pass


class PaddingError(BitstreamError):
    pass


VERSION = 1


class BitWriter:
    """Accumulates values MSB-first; zero-pads the final byte."""

    def __init__(self):
        self._acc = 0
        self._nbits = 0

    def put(self, value: int, nbits: int) -> None:
        if value < 0 or value >> nbits:
            raise BitstreamError(f"value {value} does not fit in {nbits} bits")
        self._acc = (self._acc << nbits) | value
        self._nbits += nbits

    def put_gamma(self, value: int) -> None:
        if value < 1:
            raise BitstreamError(f"gamma code requires value >= 1, got {value}")
        n = value.bit_length()
        self.put(0, n - 1)
        self.put(value, n)

    def __len__(self) -> int:
        return self._nbits

    def getvalue(self) -> bytes:
        pad = -self._nbits % 8
        return ((self._acc << pad)).to_bytes((self._nbits + pad) // 8, "big")


class BitReader:
    """Reads MSB-first; raises TruncatedStreamError past the end."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def get(self, nbits: int) -> int:
        end = self._pos + nbits
        if end > 8 * len(self._data):
            raise TruncatedStreamError("bitstream ended early")
        out = 0
        pos = self._pos
        for _ in range(nbits):
            out = (out << 1) | ((self._data[pos >> 3] >> (7 - (pos & 7))) & 1)
            pos += 1
        self._pos = end
        return out

    def get_gamma(self) -> int:
        zeros = 0
        while self.get(1) == 0:
            zeros += 1
            if zeros > 32:
                raise NonCanonicalError("gamma code longer than 32 bits")
        return (1 << zeros) | self.get(zeros)

    @property
    def bit_pos(self) -> int:
        return self._pos


def gamma_length(value: int) -> int:
    """Bit length of the Elias-gamma code of value >= 1: 2*floor(log2 v) + 1."""
    if value < 1:
        raise BitstreamError(f"gamma code requires value >= 1, got {value}")
    return 2 * value.bit_length() - 1


def _color_bits(k: int) -> int:
    return (k - 1).bit_length()


def _header_bits(k: int) -> int:
    return 4 + 8 + 8 + 24 * k + 16


def size_bytes(mesh: "CompressedMesh") -> int:
    """Exact length of serialize(mesh) without building the bytes."""
    m = mesh.grid_dim
    bits = _header_bits(len(mesh.palette))
    prev = -1
    for (r, c), _ in mesh.vertices:
        li = r * m + c
        bits += gamma_length(li - prev)
        prev = li
    bits += len(mesh.vertices) * _color_bits(len(mesh.palette))
    return (bits + 7) // 8


def serialize(mesh: "CompressedMesh") -> bytes:
    w = BitWriter()
    w.put(VERSION, 4)
    w.put(mesh.grid_dim, 8)
    w.put(len(mesh.palette), 8)
    for r, g, b in mesh.palette:
        w.put(r, 8)
        w.put(g, 8)
        w.put(b, 8)
    w.put(len(mesh.vertices), 16)
    m = mesh.grid_dim
    prev = -1
    for (r, c), _ in mesh.vertices:
        li = r * m + c
        w.put_gamma(li - prev)
        prev = li
    cb = _color_bits(len(mesh.palette))
    if cb:
        for _, ci in mesh.vertices:
            w.put(ci, cb)
    return w.getvalue()


def deserialize(data: bytes) -> "CompressedMesh":
    from .codec import CodecError, CompressedMesh

    r = BitReader(data)
    version = r.get(4)
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    m = r.get(8)
    k = r.get(8)
    if m < 2:
        raise NonCanonicalError(f"grid dim {m} out of range")
    if k < 1:
        raise NonCanonicalError("empty palette")
    palette = tuple((r.get(8), r.get(8), r.get(8)) for _ in range(k))
    v = r.get(16)
    verts = []
    li = -1
    for _ in range(v):
        li += r.get_gamma()
        if li >= m * m:
            raise NonCanonicalError(f"vertex index {li} outside {m}x{m} grid")
        verts.append(divmod(li, m))
    cb = _color_bits(k)
    colors = [r.get(cb) if cb else 0 for _ in range(v)]
    if any(ci >= k for ci in colors):
        raise NonCanonicalError("color index out of palette range")
    pad = -r.bit_pos % 8
    if r.get(pad) != 0:
        raise PaddingError("nonzero padding bits")
    if r.bit_pos != 8 * len(data):
        raise NonCanonicalError("trailing bytes after padding")
    try:
        return CompressedMesh(m, palette, tuple(zip(verts, colors)))
    except CodecError as e:
        raise NonCanonicalError(str(e)) from e
