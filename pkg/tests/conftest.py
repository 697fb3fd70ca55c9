from __future__ import annotations

import time
from pathlib import Path

import pytest

ASSETS = Path(__file__).parent / "assets"
CORPUS = ASSETS / "corpus"
GOLDEN = Path(__file__).parent / "golden"

DESK = dict(grid_dim=33, palette_size=32, byte_budget=200,
            proposals=20_000, seed=0, size=256)


@pytest.fixture(scope="session")
def desk_run():
    """Encode the whole 24-image corpus at benchmark settings once.

    Returns (rows, encode_wall_seconds); each row carries the source
    image, the mesh, the accepted-step trace, and the reconstruction.
    """
    from trithumb.codec import EncoderConfig, decode, encode
    from trithumb.metrics import psnr, ssim
    from trithumb.raster import read_image
    from trithumb.bitstream import size_bytes

    cfg = EncoderConfig(**DESK)
    paths = sorted(CORPUS.glob("*.ppm"))
    assert len(paths) == 24, "benchmark corpus must hold 24 images"
    rows = []
    wall = 0.0
    for path in paths:
        img = read_image(path)
        t0 = time.monotonic()
        mesh, trace = encode(img, cfg)
        wall += time.monotonic() - t0
        recon = decode(mesh, cfg.size)
        rows.append({
            "name": path.stem,
            "img": img,
            "mesh": mesh,
            "trace": trace,
            "recon": recon,
            "bytes": size_bytes(mesh),
            "psnr": psnr(img, recon),
            "ssim": ssim(img, recon),
        })
    return rows, wall
