"""Shared fixtures: a 16-image synthetic corpus encoded through the
primary CLI, one desk-preset training run, and staged eval directories.

Everything the secondary package consumes is produced by shelling out
to `trithumb` (bench/blur), never by importing it.
"""

from __future__ import annotations

import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from trithumb_nn.fts import read_stack
from trithumb_nn.images import read_image, write_ppm
from trithumb_nn.infer import infer
from trithumb_nn.model import desk_config
from trithumb_nn.train import save_weights, train

SIZE = 64
COUNT = 16
ENCODE_FLAGS = ["--grid", "17", "--palette", "16", "--budget", "200",
                "--proposals", "3000", "--seed", "0", "--size", str(SIZE)]


def primary_cmd() -> list[str]:
    exe = shutil.which("trithumb")
    return [exe] if exe else [sys.executable, "-m", "trithumb.cli"]


def nn_cmd() -> list[str]:
    exe = shutil.which("trithumb-nn")
    return [exe] if exe else [sys.executable, "-m", "trithumb_nn.cli"]


def synthetic_image(seed: int, n: int = SIZE) -> np.ndarray:
    """Gradient background with a few random flat shapes; encodes well
    as a triangle mesh yet varies enough to be worth learning."""
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, 256, (2, 3))
    ramp = np.linspace(0.0, 1.0, n)
    w = (ramp[:, None] + ramp[None, :]) / 2.0
    img = a[None, None, :] * (1 - w[..., None]) + b[None, None, :] * w[..., None]
    yy, xx = np.mgrid[0:n, 0:n]
    for _ in range(rng.integers(2, 5)):
        kind = rng.integers(0, 3)
        color = rng.integers(0, 256, 3)
        if kind == 0:
            cy, cx = rng.integers(8, n - 8, 2)
            r = rng.integers(5, 18)
            m = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        elif kind == 1:
            y0, x0 = rng.integers(0, n - 16, 2)
            h, w2 = rng.integers(8, 24, 2)
            m = (yy >= y0) & (yy < y0 + h) & (xx >= x0) & (xx < x0 + w2)
        else:
            period = rng.integers(6, 16)
            m = ((yy + xx) // period) % 2 == 0
            m &= (yy > rng.integers(0, n // 2)) & (xx > rng.integers(0, n // 2))
        img[m] = color
    return img.clip(0, 255).astype(np.uint8)


def mean_psnr(pairs_of_images) -> float:
    vals = []
    for orig, recon in pairs_of_images:
        mse = np.mean((recon.astype(np.float64) - orig.astype(np.float64)) ** 2)
        vals.append(99.0 if mse == 0 else 10.0 * np.log10(65025.0 / mse))
    return float(sum(vals) / len(vals))


@pytest.fixture(scope="session")
def encoded(tmp_path_factory):
    """Corpus PPMs plus the primary `bench` products (.fts/.orig/.recon).

    Returns dict with corpus_dir, enc_dir, and the sorted stems.
    """
    root = tmp_path_factory.mktemp("encoded")
    corpus = root / "corpus"
    corpus.mkdir()
    for i in range(COUNT):
        write_ppm(corpus / f"img{i:02d}.ppm", synthetic_image(100 + i))
    enc = root / "enc"
    proc = subprocess.run(
        primary_cmd() + ["bench", str(corpus), "--out", str(enc)] + ENCODE_FLAGS,
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    stems = sorted(p.stem for p in enc.glob("*.fts"))
    assert len(stems) == COUNT
    return {"corpus_dir": corpus, "enc_dir": enc, "stems": stems}


@pytest.fixture(scope="session")
def pairs(encoded):
    """(stack, original) training pairs in stem order."""
    enc = encoded["enc_dir"]
    out = []
    for stem in encoded["stems"]:
        out.append((read_stack(enc / f"{stem}.fts"),
                    read_image(enc / f"{stem}.orig.ppm")))
    return out


@pytest.fixture(scope="session")
def trained_model(pairs):
    """One desk-preset fit of the 16-image set: (model, log, wall seconds)."""
    cfg = desk_config()
    t0 = time.time()
    model, log = train(pairs, cfg)
    return model, log, time.time() - t0


@pytest.fixture(scope="session")
def weights_file(trained_model, pairs, tmp_path_factory):
    model, log, _ = trained_model
    path = tmp_path_factory.mktemp("weights") / "desk.pt"
    save_weights(path, model, desk_config(), log)
    return path


@pytest.fixture(scope="session")
def staged_dirs(encoded, trained_model, tmp_path_factory):
    """Per-variant directories with matching stems: orig/, interp/, nn/."""
    model, _, _ = trained_model
    root = tmp_path_factory.mktemp("staged")
    dirs = {name: root / name for name in ("orig", "interp", "nn")}
    for d in dirs.values():
        d.mkdir()
    enc = encoded["enc_dir"]
    for stem in encoded["stems"]:
        shutil.copy(enc / f"{stem}.orig.ppm", dirs["orig"] / f"{stem}.ppm")
        shutil.copy(enc / f"{stem}.recon.ppm", dirs["interp"] / f"{stem}.ppm")
        write_ppm(dirs["nn"] / f"{stem}.ppm",
                  infer(model, read_stack(enc / f"{stem}.fts")))
    return dirs
