from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from trithumb.codec import CompressedMesh
from trithumb.raster import (
    RasterError,
    barycentric,
    read_image,
    render,
    render_region,
    vertex_to_pixel,
    write_image,
)

from oracles import point_in_triangle_exact


def corners_mesh(m: int, palette, corner_colors) -> CompressedMesh:
    verts = sorted([(0, 0), (0, m - 1), (m - 1, 0), (m - 1, m - 1)])
    return CompressedMesh(m, tuple(palette),
                          tuple(zip(verts, corner_colors)))


def random_mesh(rng: random.Random, m: int, extra: int, k: int = 4) -> CompressedMesh:
    cells = [(r, c) for r in range(m) for c in range(m)]
    verts = {(0, 0), (0, m - 1), (m - 1, 0), (m - 1, m - 1)}
    verts |= set(rng.sample(cells, extra))
    palette = tuple(tuple(rng.randrange(256) for _ in range(3)) for _ in range(k))
    pairs = tuple((v, rng.randrange(k)) for v in sorted(verts))
    return CompressedMesh(m, palette, pairs)


class TestMapping:
    def test_vertex_to_pixel_examples(self):
        assert vertex_to_pixel((16, 16), 33, 256) == (128, 128)
        assert vertex_to_pixel((32, 32), 33, 256) == (256, 256)
        assert vertex_to_pixel((0, 0), 33, 256) == (0, 0)

    def test_vertex_to_pixel_exact_fraction(self):
        x, y = vertex_to_pixel((1, 2), 9, 100)
        assert (x, y) == (Fraction(200, 8), Fraction(100, 8))


class TestBarycentric:
    def test_weights_sum_to_one(self):
        rng = random.Random(2)
        for _ in range(100):
            tri = [(rng.uniform(0, 64), rng.uniform(0, 64)) for _ in range(3)]
            ax, ay = tri[0]
            bx, by = tri[1]
            cx, cy = tri[2]
            if abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) < 1e-6:
                continue
            p = (rng.uniform(0, 64), rng.uniform(0, 64))
            w = barycentric(tri, p)
            assert abs(sum(w) - 1.0) < 1e-12

    def test_vertex_gets_unit_weight(self):
        tri = [(0, 0), (8, 0), (0, 8)]
        assert barycentric(tri, (0, 0)) == (1.0, 0.0, 0.0)
        assert barycentric(tri, (8, 0)) == (0.0, 1.0, 0.0)

    def test_midpoint_of_edge(self):
        tri = [(0, 0), (8, 0), (0, 8)]
        assert barycentric(tri, (4, 4)) == (0.0, 0.5, 0.5)

    def test_degenerate_raises(self):
        with pytest.raises(RasterError):
            barycentric([(0, 0), (1, 1), (2, 2)], (0, 1))


class TestRender:
    def test_constant_mesh_renders_constant(self):
        mesh = corners_mesh(33, [(9, 77, 200)], [0, 0, 0, 0])
        out = render(mesh, 32)
        assert np.array_equal(out, np.full((32, 32, 3), (9, 77, 200), np.uint8))

    def test_center_pixel_is_half_blend(self):
        # diagonal runs corner-to-corner; colors black and white at its
        # endpoints make the exact-center pixel a 50/50 blend
        mesh = corners_mesh(2, [(0, 0, 0), (255, 255, 255)], [0, 1, 1, 1])
        n = 15  # odd: pixel (7,7) has center (7.5,7.5), the image midpoint
        out = render(mesh, n)
        assert tuple(out[7, 7]) == (128, 128, 128)
        a = vertex_to_pixel((0, 0), 2, n)
        b = vertex_to_pixel((1, 1), 2, n)
        c = vertex_to_pixel((1, 0), 2, n)
        w = barycentric([a, c, b], (7.5, 7.5))
        assert w == (0.5, 0.0, 0.5)

    def test_determinism(self):
        mesh = random_mesh(random.Random(3), 9, 12)
        assert np.array_equal(render(mesh, 64), render(mesh, 64))

    @pytest.mark.parametrize("seed,m,n", [(0, 9, 64), (1, 5, 6), (2, 17, 33),
                                          (3, 33, 256), (4, 4, 7)])
    def test_coverage_exactly_once(self, seed, m, n):
        # includes m=5, n=6 where vertex positions can coincide with
        # pixel centers, exercising multi-edge ownership ties
        from trithumb.raster import _tri_fragments

        rng = random.Random(seed)
        mesh = random_mesh(rng, m, min(12, m * m - 4))
        tri = mesh.triangulation()
        count = np.zeros((n, n), dtype=np.int32)
        for t in tri.triangles:
            pts = [tri.vertices[i] for i in t]
            for sy, sx, mask, _ in _tri_fragments(m, n, pts, [(0, 0, 0)] * 3):
                count[sy, sx] += mask
        assert count.min() == 1 and count.max() == 1

    def test_ownership_agrees_with_exact_interior(self):
        rng = random.Random(9)
        mesh = random_mesh(rng, 5, 6)
        tri = mesh.triangulation()
        n = 16
        from trithumb.raster import _tri_fragments

        for t in tri.triangles:
            pts = [tri.vertices[i] for i in t]
            owned = np.zeros((n, n), dtype=bool)
            for sy, sx, mask, _ in _tri_fragments(5, n, pts, [(0, 0, 0)] * 3):
                owned[sy, sx] |= mask
            for j in range(n):
                for i in range(n):
                    loc = point_in_triangle_exact(pts, n, 5, j, i)
                    if loc == "in":
                        assert owned[j, i]
                    elif loc == "out":
                        assert not owned[j, i]

    def test_render_region_full_equals_render(self):
        mesh = random_mesh(random.Random(5), 9, 10)
        n = 48
        base = render(mesh, n)
        blank = np.zeros((n, n, 3), dtype=np.uint8)
        full = render_region(mesh, n, range(len(mesh.triangulation().triangles)), blank)
        assert np.array_equal(full, base)
        assert blank.sum() == 0  # input untouched

    def test_render_region_partial(self):
        mesh = random_mesh(random.Random(6), 9, 10)
        n = 48
        base = render(mesh, n)
        noise = np.random.RandomState(0).randint(0, 255, (n, n, 3)).astype(np.uint8)
        out = render_region(mesh, n, [0], noise)
        from trithumb.raster import _tri_fragments

        tri = mesh.triangulation()
        pts = [tri.vertices[i] for i in tri.triangles[0]]
        owned = np.zeros((n, n), dtype=bool)
        for sy, sx, mask, _ in _tri_fragments(9, n, pts, [(0, 0, 0)] * 3):
            owned[sy, sx] |= mask
        assert np.array_equal(out[owned], base[owned])
        assert np.array_equal(out[~owned], noise[~owned])

    def test_render_region_bad_index(self):
        mesh = corners_mesh(9, [(0, 0, 0)], [0, 0, 0, 0])
        with pytest.raises(RasterError):
            render_region(mesh, 16, [99], np.zeros((16, 16, 3), np.uint8))

    def test_bad_size(self):
        mesh = corners_mesh(9, [(0, 0, 0)], [0, 0, 0, 0])
        with pytest.raises(RasterError):
            render(mesh, 0)


class TestImageIO:
    def test_ppm_round_trip(self, tmp_path):
        img = np.random.RandomState(1).randint(0, 256, (20, 31, 3)).astype(np.uint8)
        p = tmp_path / "x.ppm"
        write_image(p, img)
        assert np.array_equal(read_image(p), img)

    def test_ppm_header_comments(self, tmp_path):
        img = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
        p = tmp_path / "c.ppm"
        p.write_bytes(b"P6\n# a comment\n2 # inline\n2\n255\n" + img.tobytes())
        assert np.array_equal(read_image(p), img)

    def test_ppm_bad_magic(self, tmp_path):
        p = tmp_path / "bad.ppm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes(12))
        with pytest.raises(RasterError):
            read_image(p)

    def test_ppm_bad_maxval(self, tmp_path):
        p = tmp_path / "m.ppm"
        p.write_bytes(b"P6\n2 2\n65535\n" + bytes(24))
        with pytest.raises(RasterError):
            read_image(p)

    def test_ppm_truncated(self, tmp_path):
        p = tmp_path / "t.ppm"
        p.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
        with pytest.raises(RasterError):
            read_image(p)

    def test_png_round_trip(self, tmp_path):
        img = np.random.RandomState(2).randint(0, 256, (16, 16, 3)).astype(np.uint8)
        p = tmp_path / "x.png"
        write_image(p, img)
        assert np.array_equal(read_image(p), img)
