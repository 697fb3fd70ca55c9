"""Command-line entry points.

    trithumb encode INPUT [--out X.tmc] [config flags]
    trithumb decode X.tmc --size N [--out Y.ppm]
    trithumb features X.tmc --size N [--out Y.fts]
    trithumb metrics ORIG RECON
    trithumb blur INPUT --radius R --passes P [--out Y.ppm]
    trithumb bench CORPUS_DIR --out DIR [config flags] [--nn-dir DIR]

Config precedence: command-line flags beat --config JSON, which beats
defaults.  Exit codes: 0 success, 1 usage error, 2 data error.
Non-square inputs are center-cropped to a square and resized to --size.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bitstream, features, metrics
from .codec import CodecError, EncoderConfig, decode, encode
from .raster import RasterError, read_image, write_image

DATA_ERRORS = (CodecError, RasterError, bitstream.BitstreamError,
               features.FeatureError, metrics.MetricError, OSError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass
class RunManifest:
    config: dict
    rows: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    def compute_aggregates(self) -> None:
        ok = [r for r in self.rows if "error" not in r]
        agg: dict = {"images": len(self.rows), "failures": len(self.rows) - len(ok)}
        for key in ("psnr", "ssim", "bytes"):
            vals = [r[key] for r in ok]
            agg[f"mean_{key}"] = statistics.fmean(vals) if vals else None
            agg[f"median_{key}"] = statistics.median(vals) if vals else None
        if any("nn_psnr" in r for r in ok):
            scored = [r for r in ok if "nn_psnr" in r]
            agg["improved_fraction"] = (
                sum(1 for r in scored if r["nn_psnr"] > r["psnr"]) / len(scored))
            agg["mean_nn_psnr"] = statistics.fmean(r["nn_psnr"] for r in scored)
            agg["mean_nn_ssim"] = statistics.fmean(r["nn_ssim"] for r in scored)
        self.aggregates = agg


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, help="mesh grid dimension M")
    p.add_argument("--palette", type=int, help="color table size K")
    p.add_argument("--budget", type=int, help="byte budget")
    p.add_argument("--proposals", type=int, help="hillclimb iterations")
    p.add_argument("--seed", type=int, help="rng seed")
    p.add_argument("--size", type=int, help="working image resolution N")
    p.add_argument("--config", type=Path, help="JSON file with the same keys")


def _build_config(args) -> EncoderConfig:
    merged = {}
    if args.config is not None:
        with open(args.config) as fh:
            merged.update(json.load(fh))
    names = {"grid": "grid_dim", "palette": "palette_size", "budget": "byte_budget",
             "proposals": "proposals", "seed": "seed", "size": "size"}
    fields = {names.get(k, k): v for k, v in merged.items()}
    for flag, fname in names.items():
        v = getattr(args, flag, None)
        if v is not None:
            fields[fname] = v
    cfg = EncoderConfig(**fields)
    cfg.validate()
    return cfg


def _load_square(path, n: int) -> np.ndarray:
    """Read an image, center-crop to square, resize to n x n."""
    img = read_image(path)
    h, w = img.shape[:2]
    side = min(h, w)
    r0 = (h - side) // 2
    c0 = (w - side) // 2
    img = img[r0:r0 + side, c0:c0 + side]
    if side != n:
        from PIL import Image

        img = np.asarray(
            Image.fromarray(img, "RGB").resize((n, n), Image.LANCZOS),
            dtype=np.uint8)
    return img


def cmd_encode(args) -> int:
    cfg = _build_config(args)
    img = _load_square(args.input, cfg.size)
    mesh, trace = encode(img, cfg)
    data = bitstream.serialize(mesh)
    out = args.out or Path(args.input).with_suffix(".tmc")
    with open(out, "wb") as fh:
        fh.write(data)
    recon = decode(mesh, cfg.size)
    print(f"bytes {len(data)} psnr {metrics.psnr(img, recon):.2f} "
          f"ssim {metrics.ssim(img, recon):.4f}")
    return 0


def cmd_decode(args) -> int:
    with open(args.input, "rb") as fh:
        mesh = bitstream.deserialize(fh.read())
    out = args.out or Path(args.input).with_suffix(".ppm")
    write_image(out, decode(mesh, args.size))
    return 0


def cmd_features(args) -> int:
    with open(args.input, "rb") as fh:
        mesh = bitstream.deserialize(fh.read())
    stack = features.build_features(mesh, args.size)
    out = args.out or Path(args.input).with_suffix(".fts")
    features.export_features(stack, out)
    return 0


def cmd_metrics(args) -> int:
    a = read_image(args.original)
    b = read_image(args.reconstruction)
    print(json.dumps({"psnr": metrics.psnr(a, b), "ssim": metrics.ssim(a, b)}))
    return 0


def cmd_blur(args) -> int:
    img = read_image(args.input)
    out = args.out or Path(args.input).with_suffix(".blur.ppm")
    write_image(out, metrics.gaussian_blur(img, args.radius, args.passes))
    return 0


def _bench_one(path: Path, cfg: EncoderConfig, outdir: Path,
               nn_dir: Path | None, comparisons: bool) -> dict:
    img = _load_square(path, cfg.size)
    mesh, trace = encode(img, cfg)
    data = bitstream.serialize(mesh)
    recon = decode(mesh, cfg.size)
    stem = path.stem
    (outdir / f"{stem}.tmc").write_bytes(data)
    write_image(outdir / f"{stem}.orig.ppm", img)
    write_image(outdir / f"{stem}.recon.ppm", recon)
    features.export_features(features.build_features(mesh, cfg.size),
                             outdir / f"{stem}.fts")
    with open(outdir / f"{stem}.trace.json", "w") as fh:
        json.dump(trace, fh)
    row = {
        "name": path.name,
        "bytes": len(data),
        "vertices": len(mesh.vertices),
        "initial_mse": trace[0][1],
        "mse": trace[-1][1],
        "psnr": metrics.psnr(img, recon),
        "ssim": metrics.ssim(img, recon),
    }
    panels = [img, recon]
    if nn_dir is not None:
        for ext in (".ppm", ".png"):
            cand = nn_dir / f"{stem}{ext}"
            if cand.exists():
                nn = read_image(cand)
                row["nn_psnr"] = metrics.psnr(img, nn)
                row["nn_ssim"] = metrics.ssim(img, nn)
                panels.append(nn)
                break
    if comparisons:
        write_image(outdir / f"{stem}.cmp.ppm", np.hstack(panels))
    return row


def cmd_bench(args) -> int:
    cfg = _build_config(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = sorted(p for p in Path(args.corpus).iterdir()
                   if p.suffix.lower() in (".ppm", ".png"))
    manifest = RunManifest(config=vars(cfg).copy() | {"corpus": str(args.corpus)})
    manifest.config["move_weights"] = list(cfg.move_weights)
    for path in paths:
        try:
            row = _bench_one(path, cfg, outdir, args.nn_dir, args.comparisons)
        except DATA_ERRORS as e:
            row = {"name": path.name, "error": str(e)}
            print(f"{path.name}: FAILED: {e}", file=sys.stderr)
        manifest.rows.append(row)
    manifest.compute_aggregates()
    with open(outdir / "rows.jsonl", "w") as fh:
        for row in manifest.rows:
            fh.write(json.dumps(row) + "\n")
    cols = ["name", "bytes", "vertices", "initial_mse", "mse", "psnr", "ssim",
            "nn_psnr", "nn_ssim", "error"]
    with open(outdir / "summary.csv", "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        wr.writeheader()
        wr.writerows(manifest.rows)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump({"config": manifest.config, "rows": manifest.rows,
                   "aggregates": manifest.aggregates}, fh, indent=2)
    agg = manifest.aggregates
    if agg["mean_psnr"] is not None:
        print(f"{agg['images']} images  mean psnr {agg['mean_psnr']:.2f}  "
              f"mean ssim {agg['mean_ssim']:.4f}  mean bytes {agg['mean_bytes']:.0f}")
    else:
        print("0 images")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="trithumb", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress an image to a .tmc mesh")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path)
    _add_config_flags(p)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="render a .tmc mesh to an image")
    p.add_argument("input", type=Path)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--out", type=Path)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("features", help="export the 8-channel FTS1 stack")
    p.add_argument("input", type=Path)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--out", type=Path)
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("metrics", help="print PSNR/SSIM of a reconstruction")
    p.add_argument("original", type=Path)
    p.add_argument("reconstruction", type=Path)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("blur", help="gaussian-blur an image")
    p.add_argument("input", type=Path)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(fn=cmd_blur)

    p = sub.add_parser("bench", help="encode a corpus directory and report")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--nn-dir", type=Path)
    p.add_argument("--comparisons", action="store_true",
                   help="write original|interp|neural strips")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except DATA_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
