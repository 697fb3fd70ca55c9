"""Exact Delaunay triangulation of points on a small integer grid.

Vertices are (row, col) pairs with 0 <= row, col < grid_dim and
grid_dim <= 255, so every predicate below is evaluated in exact integer
arithmetic; there is no epsilon anywhere.  Orientation is taken in the
(row, col) frame: orient((0,0),(1,0),(1,1)) > 0 is counter-clockwise.

Cocircular point sets make the Delaunay triangulation ambiguous.  We
resolve ties with a fixed rule: between two diagonals of a cocircular
quad, keep the one whose endpoint pair (min(i,j), max(i,j)) of linear
indices row*grid_dim+col is lexicographically smaller.  Repeatedly
flipping edges that are either non-Delaunay or tie-break-reducible has a
unique fixpoint (each maximal cocircular family ends up fanned from its
smallest-index vertex), so the result is a pure function of the vertex
set.  The incremental engine legalizes after every insert/delete and
therefore sits at that fixpoint at all times, which is what makes
insert/delete/undo usable inside a proposal loop without rebuilds.
"""

from __future__ import annotations

from typing import Iterable, Sequence

Vertex = tuple[int, int]
Triangle = tuple[int, int, int]


class GeometryError(ValueError):
    pass


class DegenerateTriangleError(GeometryError):
    pass


class MissingCornerError(GeometryError):
    pass


def orient(a: Vertex, b: Vertex, c: Vertex) -> int:
    """Sign of twice the signed area of (a, b, c): +1 ccw, 0 collinear, -1 cw."""
    d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (d > 0) - (d < 0)


def incircle(a: Vertex, b: Vertex, c: Vertex, d: Vertex) -> int:
    """+1 if d is strictly inside the circumcircle of ccw triangle (a, b, c),
    0 if cocircular, -1 if strictly outside.

    (a, b, c) must be counter-clockwise; a zero-area triangle is rejected.
    Exact: the 3x3 determinant of differences never leaves Python ints.
    """
    o = orient(a, b, c)
    if o == 0:
        raise DegenerateTriangleError(f"zero-area triangle {a}, {b}, {c}")
    if o < 0:
        raise GeometryError(f"triangle {a}, {b}, {c} is clockwise")
    adx = a[0] - d[0]
    ady = a[1] - d[1]
    bdx = b[0] - d[0]
    bdy = b[1] - d[1]
    cdx = c[0] - d[0]
    cdy = c[1] - d[1]
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd2 - cdy * bd2)
        - ady * (bdx * cd2 - cdx * bd2)
        + ad2 * (bdx * cdy - cdx * bdy)
    )
    return (det > 0) - (det < 0)


def _corner_indices(m: int) -> tuple[int, int, int, int]:
    return (0, m - 1, m * (m - 1), m * m - 1)


class Triangulation:
    """Immutable result of triangulating a vertex set.

    vertices: sorted tuple of (row, col); triangles: canonically sorted
    tuple of index triples into `vertices`, each rotated so its smallest
    index comes first while keeping ccw order.
    """

    __slots__ = ("grid_dim", "vertices", "triangles", "_index")

    def __init__(self, grid_dim: int, vertices: Sequence[Vertex],
                 triangles: Sequence[Triangle]):
        self.grid_dim = grid_dim
        self.vertices = tuple(vertices)
        self.triangles = tuple(triangles)
        self._index = {v: i for i, v in enumerate(self.vertices)}

    def index_of(self, v: Vertex) -> int:
        return self._index[v]

    def edges(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for a, b, c in self.triangles:
            out.add((a, b) if a < b else (b, a))
            out.add((b, c) if b < c else (c, b))
            out.add((a, c) if a < c else (c, a))
        return out

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Triangulation)
                and self.grid_dim == other.grid_dim
                and self.vertices == other.vertices
                and self.triangles == other.triangles)

    def __hash__(self) -> int:
        return hash((self.grid_dim, self.vertices, self.triangles))

    def __repr__(self) -> str:
        return (f"Triangulation(grid_dim={self.grid_dim}, "
                f"|V|={len(self.vertices)}, |T|={len(self.triangles)})")


class MeshEngine:
    """Mutable Delaunay triangulation with canonical tie-breaking.

    Keeps directed-edge and vertex-star maps so insert/delete run in time
    proportional to the disturbed region.  Every public mutation leaves
    the mesh at the unique canonical Delaunay state for its vertex set,
    so `snapshot()` after any op equals `delaunay_triangulate` from
    scratch on the same vertices.
    """

    def __init__(self, grid_dim: int, vertices: Iterable[Vertex]):
        if not 2 <= grid_dim <= 255:
            raise GeometryError(f"grid_dim {grid_dim} out of range [2, 255]")
        self.m = grid_dim
        verts = set(vertices)
        for v in verts:
            self._check_vertex(v)
        corners = {(0, 0), (0, self.m - 1), (self.m - 1, 0),
                   (self.m - 1, self.m - 1)}
        if not corners <= verts:
            raise MissingCornerError("all four grid corners are required")
        self.points: dict[int, Vertex] = {}
        self.tris: dict[int, Triangle] = {}        # tid -> ccw linear triple
        self.edge: dict[tuple[int, int], int] = {}  # directed edge -> tid
        self.star: dict[int, set[int]] = {}         # linear index -> tids
        self._next_tid = 0
        self._last_tid = -1
        self._log: list[tuple[str, int, Triangle]] | None = None

        m = self.m
        c00, c01, c10, c11 = 0, m - 1, m * (m - 1), m * m - 1
        for li in (c00, c01, c10, c11):
            self.points[li] = divmod(li, m)
            self.star[li] = set()
        # Canonical seed: diagonal (c00, c11) beats (c01, c10) on the
        # (min, max) index tie-break; both corner tris are ccw.
        self._add_tri(c00, c10, c11)
        self._add_tri(c00, c11, c01)
        for v in sorted(verts - corners):
            self.insert(v)

    # -- basic bookkeeping ------------------------------------------------

    def _check_vertex(self, v: Vertex) -> None:
        r, c = v
        if not (0 <= r < self.m and 0 <= c < self.m):
            raise GeometryError(f"vertex {v} outside grid of dim {self.m}")

    def _li(self, v: Vertex) -> int:
        return v[0] * self.m + v[1]

    def _add_tri(self, a: int, b: int, c: int) -> int:
        pa, pb, pc = self.points[a], self.points[b], self.points[c]
        if orient(pa, pb, pc) <= 0:
            raise DegenerateTriangleError(
                f"refusing non-ccw triangle {pa}, {pb}, {pc}")
        tid = self._next_tid
        self._next_tid += 1
        tri = (a, b, c)
        self.tris[tid] = tri
        self.edge[(a, b)] = tid
        self.edge[(b, c)] = tid
        self.edge[(c, a)] = tid
        self.star[a].add(tid)
        self.star[b].add(tid)
        self.star[c].add(tid)
        self._last_tid = tid
        if self._log is not None:
            self._log.append(("add", tid, tri))
        return tid

    def _rm_tri(self, tid: int) -> None:
        a, b, c = tri = self.tris.pop(tid)
        del self.edge[(a, b)]
        del self.edge[(b, c)]
        del self.edge[(c, a)]
        self.star[a].discard(tid)
        self.star[b].discard(tid)
        self.star[c].discard(tid)
        if self._log is not None:
            self._log.append(("rm", tid, tri))

    def vertex_count(self) -> int:
        return len(self.points)

    def has_vertex(self, v: Vertex) -> bool:
        return self._li(v) in self.points

    def occupied(self) -> set[int]:
        return set(self.points)

    # -- point location ---------------------------------------------------

    def _locate(self, p: Vertex) -> int:
        """tid of a triangle containing p (interior or boundary).

        Straight walk from the most recently touched triangle; falls back
        to a linear scan if the walk runs long (possible only on adversarial
        co-linear walks, never observed, but the scan keeps it total).
        """
        tid = self._last_tid
        if tid not in self.tris:
            tid = next(iter(self.tris))
        limit = 4 * len(self.tris) + 16
        pts = self.points
        for _ in range(limit):
            a, b, c = self.tris[tid]
            pa, pb, pc = pts[a], pts[b], pts[c]
            if orient(pa, pb, p) < 0:
                nxt = self.edge.get((b, a))
            elif orient(pb, pc, p) < 0:
                nxt = self.edge.get((c, b))
            elif orient(pc, pa, p) < 0:
                nxt = self.edge.get((a, c))
            else:
                self._last_tid = tid
                return tid
            if nxt is None:
                break  # walked off the hull; p is outside -> impossible here
            tid = nxt
        for tid, (a, b, c) in self.tris.items():
            if (orient(pts[a], pts[b], p) >= 0
                    and orient(pts[b], pts[c], p) >= 0
                    and orient(pts[c], pts[a], p) >= 0):
                self._last_tid = tid
                return tid
        raise GeometryError(f"point {p} not inside any triangle")

    # -- legalization -----------------------------------------------------

    def _should_flip(self, u: int, v: int, a: int, b: int) -> bool:
        """Flip rule for edge (u, v) between ccw tris (u,v,a) and (v,u,b)."""
        pts = self.points
        s = incircle(pts[u], pts[v], pts[a], pts[b])
        if s > 0:
            return True
        if s == 0:
            old = (u, v) if u < v else (v, u)
            new = (a, b) if a < b else (b, a)
            return new < old
        return False

    def _legalize(self, seed_edges: Iterable[tuple[int, int]]) -> None:
        queue = list(seed_edges)
        while queue:
            u, v = queue.pop()
            t1 = self.edge.get((u, v))
            t2 = self.edge.get((v, u))
            if t1 is None or t2 is None:
                continue  # hull edge, or stale entry from an earlier flip
            tri1 = self.tris[t1]
            tri2 = self.tris[t2]
            a = tri1[tri1.index(u) - 1]  # apex opposite (u, v) in t1
            b = tri2[tri2.index(v) - 1]
            if not self._should_flip(u, v, a, b):
                continue
            self._rm_tri(t1)
            self._rm_tri(t2)
            self._add_tri(a, u, b)
            self._add_tri(b, v, a)
            queue.extend(((u, b), (b, v), (v, a), (a, u)))

    # -- mutations ----------------------------------------------------------

    def insert(self, v: Vertex) -> None:
        """Add vertex v (Bowyer-Watson cavity + legalization)."""
        self._check_vertex(v)
        li = self._li(v)
        if li in self.points:
            raise GeometryError(f"vertex {v} already present")
        t0 = self._locate(v)
        pts = self.points
        # Cavity: all triangles whose circumcircle strictly contains v.
        cavity = {t0}
        stack = [t0]
        while stack:
            for du, dv in self._tri_dir_edges(stack.pop()):
                twin = self.edge.get((dv, du))
                if twin is None or twin in cavity:
                    continue
                a, b, c = self.tris[twin]
                if incircle(pts[a], pts[b], pts[c], v) > 0:
                    cavity.add(twin)
                    stack.append(twin)
        boundary = []
        for tid in cavity:
            for du, dv in self._tri_dir_edges(tid):
                if self.edge.get((dv, du)) not in cavity:
                    boundary.append((du, dv))
        self.points[li] = v
        self.star[li] = set()
        new_edges: list[tuple[int, int]] = []
        for tid in sorted(cavity):
            self._rm_tri(tid)
        for du, dv in boundary:
            side = orient(pts[du], pts[dv], v)
            if side == 0:
                continue  # v lies on this hull segment; no sliver triangle
            if side < 0:
                raise GeometryError("cavity boundary not star-shaped")
            self._add_tri(du, dv, li)
            new_edges.append((du, dv))
        self._legalize(new_edges)

    def delete(self, v: Vertex) -> None:
        """Remove vertex v; the star polygon is re-triangulated and legalized."""
        li = self._li(v)
        if li not in self.points:
            raise GeometryError(f"vertex {v} not present")
        if li in _corner_indices(self.m):
            raise GeometryError("corner vertices cannot be removed")
        pts = self.points
        star = sorted(self.star[li])
        # Directed link edges (u, w) with li on the left form a ccw chain.
        succ: dict[int, int] = {}
        indeg: set[int] = set()
        for tid in star:
            a, b, c = self.tris[tid]
            if a == li:
                u, w = b, c
            elif b == li:
                u, w = c, a
            else:
                u, w = a, b
            succ[u] = w
            indeg.add(w)
        starts = [u for u in succ if u not in indeg]
        if len(starts) > 1:
            raise GeometryError("disconnected vertex link")
        if starts:
            # Open chain: v sits on the hull line.  The implicit closing
            # edge end->start runs along that line and is vertex-free.
            poly = [starts[0]]
            while poly[-1] in succ:
                poly.append(succ[poly[-1]])
        else:
            start = min(succ)  # closed loop around an interior vertex
            poly = [start]
            while succ[poly[-1]] != start:
                poly.append(succ[poly[-1]])
        for tid in star:
            self._rm_tri(tid)
        del self.points[li]
        del self.star[li]
        new_edges = self._fill_polygon(poly)
        self._legalize(new_edges)

    def move(self, src: Vertex, dst: Vertex) -> None:
        self.delete(src)
        self.insert(dst)

    def _fill_polygon(self, poly: list[int]) -> list[tuple[int, int]]:
        """Ear-clip a ccw simple polygon of linear indices; returns new edges."""
        pts = self.points
        new_edges: list[tuple[int, int]] = []
        work = list(poly)
        while len(work) > 3:
            n = len(work)
            clipped = False
            for i in range(n):
                a, b, c = work[i - 1], work[i], work[(i + 1) % n]
                pa, pb, pc = pts[a], pts[b], pts[c]
                if orient(pa, pb, pc) <= 0:
                    continue
                blocked = False
                for q in work:
                    if q in (a, b, c):
                        continue
                    pq = pts[q]
                    if (orient(pa, pb, pq) >= 0 and orient(pb, pc, pq) >= 0
                            and orient(pc, pa, pq) >= 0):
                        blocked = True
                        break
                if blocked:
                    continue
                self._add_tri(a, b, c)
                new_edges.extend(((a, b), (b, c), (c, a)))
                del work[i]
                clipped = True
                break
            if not clipped:
                raise GeometryError("no ear found; polygon not simple")
        a, b, c = work
        self._add_tri(a, b, c)
        new_edges.extend(((a, b), (b, c), (c, a)))
        return new_edges

    # -- queries ------------------------------------------------------------

    def _tri_dir_edges(self, tid: int):
        a, b, c = self.tris[tid]
        return ((a, b), (b, c), (c, a))

    def star_of(self, v: Vertex) -> list[tuple[int, Triangle]]:
        li = self._li(v)
        return [(tid, self.tris[tid]) for tid in sorted(self.star.get(li, ()))]

    def transaction(self) -> "_TriLog":
        """Context manager recording net added/removed triangles."""
        return _TriLog(self)

    def snapshot(self) -> Triangulation:
        verts = sorted(self.points.values())
        index = {self._li(v): i for i, v in enumerate(verts)}
        tris = []
        for a, b, c in self.tris.values():
            ia, ib, ic = index[a], index[b], index[c]
            # rotate so the smallest vertex index leads; ccw is preserved
            if ia <= ib and ia <= ic:
                tris.append((ia, ib, ic))
            elif ib <= ia and ib <= ic:
                tris.append((ib, ic, ia))
            else:
                tris.append((ic, ia, ib))
        tris.sort()
        return Triangulation(self.m, verts, tris)


class _TriLog:
    """Records the net triangle churn of a block of engine mutations."""

    def __init__(self, eng: MeshEngine):
        self.eng = eng
        self.added: dict[int, Triangle] = {}
        self.removed: dict[int, Triangle] = {}

    def __enter__(self) -> "_TriLog":
        self._events: list[tuple[str, int, Triangle]] = []
        self.eng._log = self._events
        return self

    def __exit__(self, *exc) -> None:
        self.eng._log = None
        for kind, tid, tri in self._events:
            if kind == "add":
                self.added[tid] = tri
            elif tid in self.added:
                del self.added[tid]  # born and killed inside the block
            else:
                self.removed[tid] = tri


def delaunay_triangulate(vertices: Iterable[Vertex], grid_dim: int) -> Triangulation:
    """Canonical Delaunay triangulation of a grid vertex set.

    Requires at least 3 non-collinear vertices including all four grid
    corners.  Equal vertex sets always produce identical outputs.
    """
    verts = set(vertices)
    if len(verts) < 3:
        raise GeometryError("need at least 3 vertices")
    it = sorted(verts)
    a0 = it[0]
    if all(orient(a0, it[1], q) == 0 for q in it[2:]):
        raise GeometryError("vertices are collinear")
    return MeshEngine(grid_dim, verts).snapshot()


def vertex_star(tri: Triangulation, v: Vertex) -> set[int]:
    """Indices into tri.triangles of all triangles incident to vertex v."""
    if v not in tri._index:
        raise GeometryError(f"vertex {v} not in triangulation")
    i = tri.index_of(v)
    return {k for k, t in enumerate(tri.triangles) if i in t}
