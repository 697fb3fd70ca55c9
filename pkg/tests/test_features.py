from __future__ import annotations

import random

import numpy as np
import pytest

from trithumb.codec import CompressedMesh, vertex_pixel
from trithumb.features import (
    FeatureError,
    FeatureStack,
    build_features,
    export_features,
    import_features,
)
from trithumb.raster import render

PALETTE = ((0, 0, 0), (255, 255, 255), (10, 200, 30), (128, 64, 32))


def corners_mesh(m: int, colors=(0, 1, 2, 3)) -> CompressedMesh:
    verts = (((0, 0), colors[0]), ((0, m - 1), colors[1]),
             ((m - 1, 0), colors[2]), ((m - 1, m - 1), colors[3]))
    return CompressedMesh(m, PALETTE, verts)


def random_mesh(rng: random.Random, m: int, extra: int) -> CompressedMesh:
    cells = [(r, c) for r in range(m) for c in range(m)]
    verts = {(0, 0), (0, m - 1), (m - 1, 0), (m - 1, m - 1)}
    verts |= set(rng.sample(cells, extra))
    pairs = tuple((v, rng.randrange(len(PALETTE))) for v in sorted(verts))
    return CompressedMesh(m, PALETTE, pairs)


class TestBuild:
    def test_corner_masks(self):
        st = build_features(corners_mesh(2), 4)
        assert st.planes.shape == (8, 4, 4)
        vm = st.planes[1]
        assert vm.sum() == 4
        assert all(vm[p] == 1.0 for p in [(0, 0), (0, 3), (3, 0), (3, 3)])
        # border lines plus the (0,0)-(3,3) diagonal drawn by midpoint steps
        em = st.planes[0]
        expect = np.zeros((4, 4), np.float32)
        expect[0, :] = expect[-1, :] = expect[:, 0] = expect[:, -1] = 1.0
        expect[1, 1] = expect[2, 2] = 1.0
        assert np.array_equal(em, expect)

    def test_masks_are_binary_and_nested(self):
        rng = random.Random(0)
        mesh = random_mesh(rng, 9, 14)
        st = build_features(mesh, 32)
        for p in (0, 1):
            assert set(np.unique(st.planes[p])) <= {0.0, 1.0}
        # every vertex lies on some incident edge line
        assert np.all(st.planes[0][st.planes[1] == 1.0] == 1.0)

    def test_vertex_count_when_pixels_distinct(self):
        rng = random.Random(3)
        mesh = random_mesh(rng, 9, 20)
        st = build_features(mesh, 32)  # n >= 2m: vertex pixels injective
        assert int(st.planes[1].sum()) == len(mesh.vertices)

    def test_render_planes_match_render(self):
        rng = random.Random(1)
        mesh = random_mesh(rng, 5, 6)
        n = 24
        st = build_features(mesh, n)
        img = render(mesh, n)
        back = np.round(st.planes[2:5].transpose(1, 2, 0) * 255.0)
        assert np.array_equal(back.astype(np.uint8), img)

    def test_color_planes_at_vertices(self):
        rng = random.Random(2)
        mesh = random_mesh(rng, 9, 10)
        n = 40
        st = build_features(mesh, n)
        for (v, ci) in mesh.vertices:
            r, c = vertex_pixel(v, 9, n)
            want = np.asarray(PALETTE[ci], np.float32) / 255.0
            assert np.allclose(st.planes[5:8, r, c], want)
        # color planes vanish off the vertex mask
        off = st.planes[1] == 0.0
        assert np.all(st.planes[5:8][:, off] == 0.0)

    def test_edge_plane_ignores_colors(self):
        mesh_a = corners_mesh(5, (0, 1, 2, 3))
        mesh_b = corners_mesh(5, (3, 2, 1, 0))
        a = build_features(mesh_a, 16).planes[0]
        b = build_features(mesh_b, 16).planes[0]
        assert np.array_equal(a, b)

    def test_too_small_raises(self):
        with pytest.raises(FeatureError):
            build_features(corners_mesh(9), 8)

    def test_stack_shape_validated(self):
        with pytest.raises(FeatureError):
            FeatureStack(4, np.zeros((8, 4, 4), np.float64))
        with pytest.raises(FeatureError):
            FeatureStack(4, np.zeros((7, 4, 4), np.float32))


class TestFileFormat:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = random.Random(9)
        mesh = random_mesh(rng, 9, 25)
        st = build_features(mesh, 48)
        p = tmp_path / "x.fts"
        export_features(st, p)
        back = import_features(p)
        assert back.n == 48
        assert np.array_equal(back.planes, st.planes)
        assert back.planes.dtype == np.float32

    def test_file_size(self, tmp_path):
        st = build_features(corners_mesh(2), 16)
        p = tmp_path / "s.fts"
        export_features(st, p)
        assert p.stat().st_size == 12 + 8 * 16 * 16 * 4

    def test_header_layout(self, tmp_path):
        st = build_features(corners_mesh(2), 5)
        p = tmp_path / "h.fts"
        export_features(st, p)
        data = p.read_bytes()
        assert data[:4] == b"FTS1"
        assert int.from_bytes(data[4:8], "little") == 5
        assert int.from_bytes(data[8:12], "little") == 8

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.fts"
        p.write_bytes(b"NOPE" + b"\x00" * 100)
        with pytest.raises(FeatureError):
            import_features(p)

    def test_truncated_payload(self, tmp_path):
        st = build_features(corners_mesh(2), 8)
        p = tmp_path / "t.fts"
        export_features(st, p)
        p.write_bytes(p.read_bytes()[:-7])
        with pytest.raises(FeatureError):
            import_features(p)

    def test_trailing_garbage(self, tmp_path):
        st = build_features(corners_mesh(2), 8)
        p = tmp_path / "g.fts"
        export_features(st, p)
        p.write_bytes(p.read_bytes() + b"\x00")
        with pytest.raises(FeatureError):
            import_features(p)
