"""Triangle-mesh thumbnail encoder.

The compressed form is a colored vertex set on an MxM grid plus a small
RGB color table; decoding is Delaunay triangulation followed by
barycentric color interpolation.  Encoding is stochastic hillclimbing:
propose a random mutation, re-render only the triangles it disturbs,
keep it when the rendered MSE strictly drops and the byte budget holds.

The mesh engine stays at its canonical triangulation after every edit,
so rejected proposals are undone by applying the inverse edit and the
running raster is patched only through triangle-local repaints.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import bitstream
from .geometry import MeshEngine, Triangulation, delaunay_triangulate
from .raster import _tri_fragments, ensure_image, render

Vertex = tuple[int, int]
RGB = tuple[int, int, int]


class CodecError(ValueError):
    pass


class InfeasibleBudgetError(CodecError):
    pass


def _corner_set(m: int) -> set[Vertex]:
    return {(0, 0), (0, m - 1), (m - 1, 0), (m - 1, m - 1)}


@dataclass(frozen=True)
class CompressedMesh:
    """grid_dim, color table, and (vertex, color index) pairs sorted by
    linear index row*grid_dim + col.  Must contain the four grid corners."""

    grid_dim: int
    palette: tuple[RGB, ...]
    vertices: tuple[tuple[Vertex, int], ...]

    def __post_init__(self):
        m = self.grid_dim
        if not 2 <= m <= 255:
            raise CodecError(f"grid_dim {m} out of range [2, 255]")
        if not 1 <= len(self.palette) <= 255:
            raise CodecError(f"palette size {len(self.palette)} out of [1, 255]")
        for entry in self.palette:
            if len(entry) != 3 or any(not 0 <= ch <= 255 for ch in entry):
                raise CodecError(f"bad palette entry {entry}")
        if not 3 <= len(self.vertices) <= 65535:
            raise CodecError(f"vertex count {len(self.vertices)} out of range")
        k = len(self.palette)
        prev = -1
        for (r, c), ci in self.vertices:
            if not (0 <= r < m and 0 <= c < m):
                raise CodecError(f"vertex {(r, c)} outside grid")
            li = r * m + c
            if li <= prev:
                raise CodecError("vertices not strictly increasing by index")
            prev = li
            if not 0 <= ci < k:
                raise CodecError(f"color index {ci} >= palette size {k}")
        if not _corner_set(m) <= {v for v, _ in self.vertices}:
            raise CodecError("mesh must contain all four grid corners")

    def triangulation(self) -> Triangulation:
        return self._tri

    @cached_property
    def _tri(self) -> Triangulation:
        return delaunay_triangulate([v for v, _ in self.vertices], self.grid_dim)

    @cached_property
    def index_set(self) -> frozenset[int]:
        m = self.grid_dim
        return frozenset(r * m + c for (r, c), _ in self.vertices)

    def color_of(self, li: int) -> int:
        return self._color_map[li]

    @cached_property
    def _color_map(self) -> dict[int, int]:
        m = self.grid_dim
        return {r * m + c: ci for (r, c), ci in self.vertices}


@dataclass(frozen=True)
class EncoderConfig:
    grid_dim: int = 33
    palette_size: int = 32
    byte_budget: int = 200
    proposals: int = 10_000
    seed: int = 0
    size: int = 256
    # AddVertex, RemoveVertex, MoveVertex, RecolorVertex, PerturbPaletteEntry
    move_weights: tuple[float, float, float, float, float] = (
        0.25, 0.15, 0.25, 0.25, 0.10)

    def validate(self) -> None:
        if not 2 <= self.grid_dim <= 255:
            raise CodecError(f"grid_dim {self.grid_dim} out of [2, 255]")
        if not 1 <= self.palette_size <= 255:
            raise CodecError(f"palette_size {self.palette_size} out of [1, 255]")
        if self.proposals < 0:
            raise CodecError("proposals must be >= 0")
        if self.size < 2:
            raise CodecError("output size must be >= 2")
        if len(self.move_weights) != 5 or min(self.move_weights) < 0 \
                or sum(self.move_weights) <= 0:
            raise CodecError("move_weights must be 5 nonnegative numbers")
        if self.byte_budget < _minimal_size(self.grid_dim, self.palette_size):
            raise InfeasibleBudgetError(
                f"budget {self.byte_budget} below minimal "
                f"{_minimal_size(self.grid_dim, self.palette_size)}-byte mesh")


# -- moves -------------------------------------------------------------------

@dataclass(frozen=True)
class AddVertex:
    vertex: Vertex
    color: int


@dataclass(frozen=True)
class RemoveVertex:
    vertex: Vertex


@dataclass(frozen=True)
class MoveVertex:
    vertex: Vertex
    dest: Vertex


@dataclass(frozen=True)
class RecolorVertex:
    vertex: Vertex
    color: int


@dataclass(frozen=True)
class PerturbPaletteEntry:
    entry: int
    delta: tuple[int, int, int]


Move = AddVertex | RemoveVertex | MoveVertex | RecolorVertex | PerturbPaletteEntry

_CHEB2 = tuple((dr, dc) for dr in range(-2, 3) for dc in range(-2, 3)
               if (dr, dc) != (0, 0))


def propose_move(state, rng: random.Random) -> Move:
    """Draw one legal move.

    state exposes grid_dim, palette length via `palette`, the occupied
    linear-index set via `index_set`, and `color_of(li)`; both
    CompressedMesh and the encoder's internal state qualify.  Illegal
    draws (e.g. removing when only corners remain) are retried a bounded
    number of times.
    """
    m = state.grid_dim
    k = len(state.palette)
    occupied = state.index_set
    corner_lis = {0, m - 1, m * (m - 1), m * m - 1}
    weights = getattr(state, "move_weights", (0.25, 0.15, 0.25, 0.25, 0.10))
    total = sum(weights)
    for _ in range(1000):
        u = rng.random() * total
        kind = 0
        acc = weights[0]
        while u >= acc and kind < 4:
            kind += 1
            acc += weights[kind]
        if kind == 0:
            if len(occupied) >= m * m or len(occupied) >= 65535:
                continue
            while True:
                li = rng.randrange(m * m)
                if li not in occupied:
                    break
            return AddVertex(divmod(li, m), rng.randrange(k))
        if kind == 1 or kind == 2:
            removable = sorted(occupied - corner_lis)
            if not removable:
                continue
            li = removable[rng.randrange(len(removable))]
            v = divmod(li, m)
            if kind == 1:
                return RemoveVertex(v)
            free = [(v[0] + dr, v[1] + dc) for dr, dc in _CHEB2
                    if 0 <= v[0] + dr < m and 0 <= v[1] + dc < m
                    and (v[0] + dr) * m + v[1] + dc not in occupied]
            if not free:
                continue
            return MoveVertex(v, free[rng.randrange(len(free))])
        if kind == 3:
            if k < 2:
                continue
            lis = sorted(occupied)
            li = lis[rng.randrange(len(lis))]
            cur = state.color_of(li)
            c = rng.randrange(k - 1)
            if c >= cur:
                c += 1
            return RecolorVertex(divmod(li, m), c)
        entry = rng.randrange(k)
        delta = tuple(rng.choice((-1, 1)) * rng.randint(1, 8) for _ in range(3))
        return PerturbPaletteEntry(entry, delta)
    raise CodecError("no legal move found after bounded retries")


# -- palette -----------------------------------------------------------------

def init_palette(image: np.ndarray, k: int) -> tuple[RGB, ...]:
    """Median-cut color table with exactly k entries, lexicographically
    sorted; short tables are padded by repeating the last entry."""
    if k < 1:
        raise CodecError("palette size must be >= 1")
    image = ensure_image(image)
    colors, counts = np.unique(image.reshape(-1, 3), axis=0, return_counts=True)
    boxes = [(colors.astype(np.int64), counts.astype(np.int64))]
    while len(boxes) < k:
        best = None
        for bi, (cs, ns) in enumerate(boxes):
            if len(cs) < 2:
                continue
            ranges = cs.max(axis=0) - cs.min(axis=0)
            ch = int(np.argmax(ranges))
            key = (int(ranges[ch]), int(ns.sum()), -bi)
            if best is None or key > best[0]:
                best = (key, bi, ch)
        if best is None:
            break
        _, bi, ch = best
        cs, ns = boxes[bi]
        order = np.argsort(cs[:, ch], kind="stable")
        cs, ns = cs[order], ns[order]
        cum = np.cumsum(ns)
        # split between distinct values at the weighted median
        j = int(np.searchsorted(cum, cum[-1] / 2))
        j = min(max(j, 0), len(cs) - 2)
        boxes[bi: bi + 1] = [(cs[: j + 1], ns[: j + 1]), (cs[j + 1:], ns[j + 1:])]
    reps = []
    for cs, ns in boxes:
        t = int(ns.sum())
        reps.append(tuple(int((2 * int((cs[:, ch] * ns).sum()) + t) // (2 * t))
                          for ch in range(3)))
    reps.sort()
    while len(reps) < k:
        reps.append(reps[-1])
    return tuple(reps)


def nearest_index(palette, rgb) -> int:
    """Lowest palette index minimizing squared RGB distance."""
    pal = np.asarray(palette, dtype=np.int64)
    d = ((pal - np.asarray(rgb, dtype=np.int64)) ** 2).sum(axis=1)
    return int(np.argmin(d))


def vertex_pixel(v: Vertex, m: int, n: int) -> tuple[int, int]:
    """Image (row, col) of the pixel containing the vertex's mapped point."""
    return (min(v[0] * n // (m - 1), n - 1), min(v[1] * n // (m - 1), n - 1))


def _minimal_size(m: int, k: int) -> int:
    corners = sorted((0, m - 1, m * (m - 1), m * m - 1))
    bits = bitstream._header_bits(k) + 4 * bitstream._color_bits(k)
    prev = -1
    for li in corners:
        bits += bitstream.gamma_length(li - prev)
        prev = li
    return (bits + 7) // 8


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a = ensure_image(a)
    b = ensure_image(b)
    if a.shape != b.shape:
        raise CodecError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a.astype(np.int64) - b.astype(np.int64)
    return float((d * d).sum() / d.size)


def init_mesh(image: np.ndarray, config: EncoderConfig) -> CompressedMesh:
    """Corners plus the densest uniform grid subsample fitting the budget,
    each vertex colored by the nearest palette entry to its source pixel."""
    config.validate()
    image = ensure_image(image)
    n = image.shape[0]
    m = config.grid_dim
    palette = init_palette(image, config.palette_size)
    pal = np.asarray(palette, dtype=np.int64)
    for stride in range(1, m + 1):
        axis = sorted(set(range(0, m, stride)) | {m - 1})
        verts = [(r, c) for r in axis for c in axis]
        if len(verts) > 65535:
            continue
        pairs = []
        for v in verts:
            j, i = vertex_pixel(v, m, n)
            d = ((pal - image[j, i].astype(np.int64)) ** 2).sum(axis=1)
            pairs.append((v, int(np.argmin(d))))
        mesh = CompressedMesh(m, palette, tuple(pairs))
        if bitstream.size_bytes(mesh) <= config.byte_budget:
            return mesh
    raise InfeasibleBudgetError(
        f"budget {config.byte_budget} cannot fit even the corner mesh")


def decode(mesh: CompressedMesh, n: int) -> np.ndarray:
    return render(mesh, n)


# -- the hillclimb -----------------------------------------------------------

class _EncodeState:
    """Mutable mirror of a CompressedMesh shared with propose_move."""

    def __init__(self, mesh: CompressedMesh, config: EncoderConfig):
        self.grid_dim = mesh.grid_dim
        self.palette = [tuple(p) for p in mesh.palette]
        self.move_weights = config.move_weights
        m = mesh.grid_dim
        self.colors = {r * m + c: ci for (r, c), ci in mesh.vertices}
        self.engine = MeshEngine(m, [v for v, _ in mesh.vertices])

    @property
    def index_set(self):
        return self.colors.keys()

    def color_of(self, li: int) -> int:
        return self.colors[li]

    def size_bytes(self, extra: int | None = None,
                   without: int | None = None) -> int:
        lis = sorted(self.colors)
        if without is not None:
            lis.remove(without)
        if extra is not None:
            import bisect

            bisect.insort(lis, extra)
        bits = bitstream._header_bits(len(self.palette))
        bits += len(lis) * bitstream._color_bits(len(self.palette))
        prev = -1
        for li in lis:
            bits += bitstream.gamma_length(li - prev)
            prev = li
        return (bits + 7) // 8

    def to_mesh(self) -> CompressedMesh:
        m = self.grid_dim
        pairs = tuple((divmod(li, m), ci) for li, ci in sorted(self.colors.items()))
        return CompressedMesh(m, tuple(self.palette), pairs)


def encode(image: np.ndarray,
           config: EncoderConfig) -> tuple[CompressedMesh, list[tuple[int, float]]]:
    """Hillclimb a mesh toward the image.

    Returns the final mesh and the accepted-step trace [(proposal index,
    mse)], whose entry 0 is the initial mesh's score.  Only strictly
    improving, budget-respecting proposals are kept, so the trace is
    monotone non-increasing and fully determined by (image, config).
    """
    config.validate()
    image = ensure_image(image)
    n = config.size
    if image.shape != (n, n, 3):
        raise CodecError(f"image shape {image.shape} != ({n}, {n}, 3)")

    st = _EncodeState(init_mesh(image, config), config)
    rng = random.Random(config.seed)
    orig = image.astype(np.int64)
    raster = np.zeros((n, n, 3), dtype=np.uint8)
    for tid in st.engine.tris:
        for frag in _frags_of(st, tid, n):
            _apply(raster, frag)
    samples = 3 * n * n
    sse = int(((raster.astype(np.int64) - orig) ** 2).sum())
    trace = [(0, sse / samples)]

    for step in range(1, config.proposals + 1):
        move = propose_move(st, rng)
        delta = _evaluate(st, move, raster, orig, n, config.byte_budget)
        if delta is None:
            continue
        dsse, paints, commit = delta
        if dsse < 0:
            for frag in paints:
                _apply(raster, frag)
            sse += dsse
            commit()
            trace.append((step, sse / samples))
        else:
            _revert(st, move)

    sse = _prune(st, raster, orig, n, sse)
    if trace[-1][1] > sse / samples:
        trace.append((config.proposals, sse / samples))
    _compact_palette(st)
    return st.to_mesh(), trace


def _frags_of(st: _EncodeState, tid: int, n: int):
    a, b, c = st.engine.tris[tid]
    pts = (st.engine.points[a], st.engine.points[b], st.engine.points[c])
    rgb = (st.palette[st.colors[a]], st.palette[st.colors[b]],
           st.palette[st.colors[c]])
    return _tri_fragments(st.grid_dim, n, pts, rgb)


def _apply(raster: np.ndarray, frag) -> None:
    sy, sx, mask, vals = frag
    raster[sy, sx][mask] = vals


def _delta_sse(st: _EncodeState, tids, raster, orig, n):
    """Repaint cost of the listed triangles against the current raster."""
    delta = 0
    paints = []
    for tid in sorted(tids):
        for frag in _frags_of(st, tid, n):
            sy, sx, mask, vals = frag
            o = orig[sy, sx][mask]
            cur = raster[sy, sx][mask].astype(np.int64)
            nv = vals.astype(np.int64)
            delta += int(((nv - o) ** 2).sum() - ((cur - o) ** 2).sum())
            paints.append(frag)
    return delta, paints


def _evaluate(st, move, raster, orig, n, budget):
    """Apply move speculatively; None means rejected before scoring.

    Returns (delta sse, pending paints, commit) with the state already
    mutated; the caller either paints + commits or calls _revert.
    """
    m = st.grid_dim
    if isinstance(move, AddVertex):
        li = move.vertex[0] * m + move.vertex[1]
        if st.size_bytes(extra=li) > budget:
            return None
        with st.engine.transaction() as log:
            st.engine.insert(move.vertex)
        st.colors[li] = move.color
        dsse, paints = _delta_sse(st, log.added, raster, orig, n)
        return dsse, paints, lambda: None
    if isinstance(move, RemoveVertex):
        li = move.vertex[0] * m + move.vertex[1]
        old = st.colors[li]
        with st.engine.transaction() as log:
            st.engine.delete(move.vertex)
        st._undo = old
        dsse, paints = _delta_sse(st, log.added, raster, orig, n)
        return dsse, paints, lambda: st.colors.pop(li)
    if isinstance(move, MoveVertex):
        li = move.vertex[0] * m + move.vertex[1]
        ld = move.dest[0] * m + move.dest[1]
        if st.size_bytes(extra=ld, without=li) > budget:
            return None
        ci = st.colors[li]
        with st.engine.transaction() as log:
            st.engine.delete(move.vertex)
            st.engine.insert(move.dest)
        st.colors[ld] = ci
        del st.colors[li]
        dsse, paints = _delta_sse(st, log.added, raster, orig, n)
        return dsse, paints, lambda: None
    if isinstance(move, RecolorVertex):
        li = move.vertex[0] * m + move.vertex[1]
        old = st.colors[li]
        if old == move.color:
            return None
        tids = [tid for tid, _ in st.engine.star_of(move.vertex)]
        st.colors[li] = move.color
        st._undo = old
        dsse, paints = _delta_sse(st, tids, raster, orig, n)
        return dsse, paints, lambda: None
    old = st.palette[move.entry]
    new = tuple(min(255, max(0, old[ch] + move.delta[ch])) for ch in range(3))
    if new == old:
        return None
    tids = set()
    for li, ci in st.colors.items():
        if ci == move.entry:
            tids.update(st.engine.star[li])
    if not tids:
        return None
    st.palette[move.entry] = new
    st._undo = old
    dsse, paints = _delta_sse(st, tids, raster, orig, n)
    return dsse, paints, lambda: None


def _revert(st: _EncodeState, move: Move) -> None:
    m = st.grid_dim
    if isinstance(move, AddVertex):
        st.engine.delete(move.vertex)
        del st.colors[move.vertex[0] * m + move.vertex[1]]
    elif isinstance(move, RemoveVertex):
        st.engine.insert(move.vertex)
        st.colors[move.vertex[0] * m + move.vertex[1]] = st._undo
    elif isinstance(move, MoveVertex):
        st.engine.delete(move.dest)
        st.engine.insert(move.vertex)
        st.colors[move.vertex[0] * m + move.vertex[1]] = st.colors.pop(
            move.dest[0] * m + move.dest[1])
    elif isinstance(move, RecolorVertex):
        st.colors[move.vertex[0] * m + move.vertex[1]] = st._undo
    else:
        st.palette[move.entry] = st._undo


def _prune(st: _EncodeState, raster, orig, n: int, sse: int) -> int:
    """Drop vertices whose removal does not hurt MSE (constant regions);
    every removal strictly shrinks the stream."""
    m = st.grid_dim
    corner_lis = {0, m - 1, m * (m - 1), m * m - 1}
    changed = True
    while changed:
        changed = False
        for li in sorted(set(st.colors) - corner_lis):
            v = divmod(li, m)
            move = RemoveVertex(v)
            dsse, paints, commit = _evaluate(st, move, raster, orig, n, 10 ** 9)
            if dsse <= 0:
                for frag in paints:
                    _apply(raster, frag)
                sse += dsse
                commit()
                changed = True
            else:
                _revert(st, move)
    return sse


def _compact_palette(st: _EncodeState) -> None:
    """Merge duplicate palette values and drop unused entries."""
    used = sorted(set(st.colors.values()))
    first: dict[RGB, int] = {}
    remap: dict[int, int] = {}
    kept: list[RGB] = []
    for ci in used:
        val = st.palette[ci]
        if val in first:
            remap[ci] = first[val]
        else:
            first[val] = len(kept)
            remap[ci] = len(kept)
            kept.append(val)
    st.palette = kept
    for li in st.colors:
        st.colors[li] = remap[st.colors[li]]
