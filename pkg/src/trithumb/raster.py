"""Deterministic software rasterizer for grid triangle meshes.

Grid vertex (row, col) maps to pixel-space point
(col * N / (M-1), row * N / (M-1)), so the mesh spans the full image
[0, N] x [0, N].  The pixel at image[j, i] has center (i + 0.5, j + 0.5).

Inside tests use exact integers throughout: vertices are scaled by 2N and
pixel centers by 2(M-1), putting both on one integer lattice.  A pixel
center on a shared edge is owned by exactly one of the two triangles via
an antisymmetric edge rule, and hull edges never pass through pixel
centers (vertex lattice values are even, center values odd-times-(M-1)
but strictly between 0 and 2N(M-1)), so every pixel is written exactly
once per full render.

Interpolated colors are barycentric blends of the vertex colors, rounded
half-up to uint8 with integer arithmetic, so a pixel's value depends only
on which triangle owns it, never on traversal or vertex order.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:
    from .codec import CompressedMesh


class RasterError(ValueError):
    pass


# -- image I/O: binary PPM always, PNG behind the same calls ---------------

def read_image(path) -> np.ndarray:
    """Load a P6 PPM or PNG as a uint8 array of shape (height, width, 3)."""
    path = str(path)
    if path.lower().endswith(".png"):
        from PIL import Image

        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise RasterError(f"{path}: not a binary P6 PPM")
    # header = magic, width, height, maxval; '#' comments allowed between
    pos, fields = 2, []
    while len(fields) < 3:
        m = re.match(rb"(?:\s+|#[^\n]*\n)*(\d+)", data[pos:])
        if not m:
            raise RasterError(f"{path}: malformed PPM header")
        fields.append(int(m.group(1)))
        pos += m.end()
    w, h, maxval = fields
    if maxval != 255:
        raise RasterError(f"{path}: maxval {maxval} unsupported (want 255)")
    pos += 1  # single whitespace byte after maxval
    raw = data[pos:pos + w * h * 3]
    if len(raw) != w * h * 3:
        raise RasterError(f"{path}: truncated pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy()


def write_image(path, image: np.ndarray) -> None:
    """Write uint8 (height, width, 3) to P6 PPM or PNG, chosen by extension."""
    image = ensure_image(image)
    path = str(path)
    if path.lower().endswith(".png"):
        from PIL import Image

        Image.fromarray(image, "RGB").save(path)
        return
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(image.tobytes())


def ensure_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.dtype != np.uint8 or image.ndim != 3 or image.shape[2] != 3:
        raise RasterError("image must be uint8 with shape (h, w, 3)")
    return image


# -- geometry of the grid-to-pixel mapping ----------------------------------

def vertex_to_pixel(v: tuple[int, int], grid_dim: int, n: int) -> tuple[Fraction, Fraction]:
    """Exact pixel-space (x, y) of grid vertex (row, col)."""
    r, c = v
    return (Fraction(c * n, grid_dim - 1), Fraction(r * n, grid_dim - 1))


def barycentric(tri, p) -> tuple[float, float, float]:
    """Normalized barycentric weights of pixel point p in triangle tri.

    tri is three (x, y) pixel-space points (ints, Fractions or floats),
    p likewise.  Exact arithmetic when inputs are exact; the weights are
    the edge-function ratios the renderer uses, as float64.
    """
    (ax, ay), (bx, by), (cx, cy) = tri
    px, py = p

    def cross(ox, oy, ux, uy, wx, wy):
        return (ux - ox) * (wy - oy) - (uy - oy) * (wx - ox)

    wa = cross(bx, by, cx, cy, px, py)
    wb = cross(cx, cy, ax, ay, px, py)
    wc = cross(ax, ay, bx, by, px, py)
    total = cross(ax, ay, bx, by, cx, cy)
    if total == 0:
        raise RasterError("degenerate triangle")
    return (float(Fraction(wa) / Fraction(total)),
            float(Fraction(wb) / Fraction(total)),
            float(Fraction(wc) / Fraction(total)))


def _edge_closed(du: int, dv: int) -> bool:
    # Antisymmetric ownership rule for pixel centers lying on an edge:
    # the edge with decreasing row direction owns; horizontal edges own
    # when they point toward increasing column.
    return du < 0 or (du == 0 and dv > 0)


def _tri_fragments(m: int, n: int, pts, rgb) -> Iterator[tuple]:
    """Pixels owned by one triangle: yields (row slice, col slice, mask, colors).

    pts: three (row, col) grid vertices in ccw order; rgb: three palette
    colors.  Everything up to the final blend stays in exact integers.
    """
    s = m - 1
    su = [2 * n * p[0] for p in pts]
    sv = [2 * n * p[1] for p in pts]
    # pixel j is covered when its center (2j+1)*s falls in the scaled bbox
    j0 = max(0, -((s - min(su)) // (2 * s)))
    j1 = min(n - 1, (max(su) - s) // (2 * s))
    i0 = max(0, -((s - min(sv)) // (2 * s)))
    i1 = min(n - 1, (max(sv) - s) // (2 * s))
    if j0 > j1 or i0 > i1:
        return
    pu = (2 * np.arange(j0, j1 + 1, dtype=np.int64)[:, None] + 1) * s
    pv = (2 * np.arange(i0, i1 + 1, dtype=np.int64)[None, :] + 1) * s
    ws = []
    mask = None
    for k in range(3):
        a, b = (k + 1) % 3, (k + 2) % 3  # edge opposite vertex k
        du, dv = su[b] - su[a], sv[b] - sv[a]
        e = du * (pv - sv[a]) - dv * (pu - su[a])
        keep = (e > 0) | ((e == 0) & _edge_closed(du, dv))
        mask = keep if mask is None else (mask & keep)
        ws.append(e)
    if not mask.any():
        return
    # Exact blend: round-half-up((e0*c0 + e1*c1 + e2*c2) / total) per channel,
    # all in int64 (|e| < 2^45 for n <= 8192, so numerators stay well inside).
    total = int(ws[0][0, 0] + ws[1][0, 0] + ws[2][0, 0])
    e0, e1, e2 = (w[mask] for w in ws)
    colors = np.empty((e0.shape[0], 3), dtype=np.uint8)
    for ch in range(3):
        num = e0 * rgb[0][ch] + e1 * rgb[1][ch] + e2 * rgb[2][ch]
        colors[:, ch] = (2 * num + total) // (2 * total)
    yield slice(j0, j1 + 1), slice(i0, i1 + 1), mask, colors


def _paint(image: np.ndarray, fragments: Iterable[tuple]) -> None:
    for sy, sx, mask, colors in fragments:
        image[sy, sx][mask] = colors


def render(mesh: "CompressedMesh", n: int) -> np.ndarray:
    """Decode a mesh to an n x n RGB image."""
    if n < 1:
        raise RasterError(f"image size {n} must be positive")
    tri = mesh.triangulation()
    out = np.zeros((n, n, 3), dtype=np.uint8)
    pal = mesh.palette
    for t in tri.triangles:
        pts = [tri.vertices[i] for i in t]
        rgb = [pal[mesh.vertices[i][1]] for i in t]
        _paint(out, _tri_fragments(mesh.grid_dim, n, pts, rgb))
    return out


def render_region(mesh: "CompressedMesh", n: int,
                  triangles: Sequence[int], target: np.ndarray) -> np.ndarray:
    """Copy of target with the pixels owned by the listed triangles redrawn.

    triangles indexes mesh.triangulation().triangles; all other pixels are
    left untouched, so a full-index call equals render(mesh, n).
    """
    target = ensure_image(target)
    if target.shape != (n, n, 3):
        raise RasterError(f"target shape {target.shape} != ({n}, {n}, 3)")
    tri = mesh.triangulation()
    out = target.copy()
    pal = mesh.palette
    for idx in triangles:
        if not 0 <= idx < len(tri.triangles):
            raise RasterError(f"triangle index {idx} out of range")
        t = tri.triangles[idx]
        pts = [tri.vertices[i] for i in t]
        rgb = [pal[mesh.vertices[i][1]] for i in t]
        _paint(out, _tri_fragments(mesh.grid_dim, n, pts, rgb))
    return out
