"""Command-line entry points.

    trithumb-nn train DATA_DIR --weights W.pt [--log L.json] [net flags]
    trithumb-nn infer DATA_DIR --weights W.pt --out DIR
    trithumb-nn eval --orig DIR --interp DIR [--nn DIR] [--blur] \
                     [--model stub:0] --out table.json

`train` expects NAME.fts stacks next to NAME.orig.ppm targets (the
layout the primary benchmark harness writes).  `infer` decodes every
NAME.fts in DATA_DIR to DIR/NAME.ppm, the layout the primary harness
scores via --nn-dir.  `eval` writes a semantic-similarity table; with
--blur it shells out to the `trithumb` CLI to add blur x1 / x5 rows
computed from the interpolated images.

Exit codes: 0 success, 1 usage error, 2 data/model error.
"""

from __future__ import annotations

import argparse
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

from .fts import StackFormatError, read_stack
from .images import read_image, write_ppm
from .infer import infer
from .model import HourglassConfig, ModelConfigError, desk_config
from .semantic import SemanticModelError, evaluate_dirs
from .train import TrainingError, load_weights, train, write_log

DATA_ERRORS = (StackFormatError, ModelConfigError, TrainingError,
               SemanticModelError, OSError, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _net_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=["full", "desk"], default="desk")
    p.add_argument("--size", type=int, help="input resolution")
    p.add_argument("--filters", type=int, help="base channel width")
    p.add_argument("--stacks", type=int, help="hourglasses to stack")
    p.add_argument("--levels", type=int, help="octaves per hourglass")
    p.add_argument("--batch", type=int, help="batch size")
    p.add_argument("--steps", type=int, help="training steps")
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--seed", type=int, help="init/sampling seed")
    p.add_argument("--zero-planes", type=str, default=None,
                   help="comma-separated stack planes to zero, e.g. 2,3,4")


def _build_config(args) -> HourglassConfig:
    fields = {}
    names = {"size": "input_size", "filters": "base_filters",
             "stacks": "stacks", "levels": "levels", "batch": "batch_size",
             "steps": "steps", "lr": "learning_rate", "seed": "seed"}
    for flag, fname in names.items():
        v = getattr(args, flag, None)
        if v is not None:
            fields[fname] = v
    if args.zero_planes is not None:
        fields["zero_planes"] = tuple(
            int(s) for s in args.zero_planes.split(",") if s)
    if args.preset == "desk":
        return desk_config(**fields)
    cfg = HourglassConfig(**fields)
    cfg.validate()
    return cfg


def _load_pairs(data_dir: Path):
    pairs = []
    for fts in sorted(Path(data_dir).glob("*.fts")):
        orig = fts.parent / f"{fts.stem}.orig.ppm"
        if not orig.exists():
            raise TrainingError(f"no target {orig.name} for {fts.name}")
        pairs.append((read_stack(fts), read_image(orig)))
    if not pairs:
        raise TrainingError(f"no .fts stacks in {data_dir}")
    return pairs


def cmd_train(args) -> int:
    cfg = _build_config(args)
    pairs = _load_pairs(args.data)
    model, log = train(pairs, cfg, checkpoint_path=args.weights,
                       checkpoint_every=args.checkpoint_every)
    if args.log:
        write_log(args.log, log)
    last = next((r for r in reversed(log) if "loss" in r), None)
    diverged = any(r.get("event") == "diverged" for r in log)
    print(f"steps {len(log)} final loss "
          f"{last['loss'] if last else float('nan'):.2f}"
          + (" DIVERGED" if diverged else ""))
    return 0


def cmd_infer(args) -> int:
    model, cfg, _ = load_weights(args.weights)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stacks = sorted(Path(args.data).glob("*.fts"))
    if not stacks:
        raise StackFormatError(f"no .fts stacks in {args.data}")
    for fts in stacks:
        img = infer(model, read_stack(fts))
        write_ppm(outdir / f"{fts.stem}.ppm", img)
    print(f"decoded {len(stacks)} stacks to {outdir}")
    return 0


def _blur_variants(interp: Path, workdir: Path) -> dict[str, Path]:
    """Blur x1/x5 copies of the interpolated images via the primary CLI."""
    exe = shutil.which("trithumb")
    base = [exe] if exe else [sys.executable, "-m", "trithumb.cli"]
    out: dict[str, Path] = {}
    for passes in (1, 5):
        d = workdir / f"blurx{passes}"
        d.mkdir(parents=True, exist_ok=True)
        for img in sorted(interp.iterdir()):
            if img.suffix.lower() not in (".ppm", ".png"):
                continue
            dest = d / f"{img.stem}.ppm"
            proc = subprocess.run(
                base + ["blur", str(img), "--radius", "2",
                        "--passes", str(passes), "--out", str(dest)],
                capture_output=True, text=True)
            if proc.returncode != 0:
                raise SemanticModelError(
                    f"`trithumb blur` failed on {img.name}: {proc.stderr.strip()}")
        out[f"blurx{passes}"] = d
    return out


def cmd_eval(args) -> int:
    variants: dict[str, Path] = {"interpolated": Path(args.interp)}
    if args.nn:
        variants["nn-decoded"] = Path(args.nn)
    tmp = None
    if args.blur:
        tmp = tempfile.TemporaryDirectory(prefix="trithumb-nn-blur-")
        variants.update(_blur_variants(Path(args.interp), Path(tmp.name)))
    try:
        table = evaluate_dirs(args.orig, variants, args.model)
    finally:
        if tmp is not None:
            tmp.cleanup()
    Path(args.out).write_text(json.dumps(table, indent=2) + "\n")
    print(json.dumps(table["rows"], indent=2))
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="trithumb-nn", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the hourglass decoder to a directory")
    p.add_argument("data", type=Path)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--log", type=Path)
    p.add_argument("--checkpoint-every", type=int, default=0)
    _net_flags(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("infer", help="decode .fts stacks to PPM images")
    p.add_argument("data", type=Path)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("eval", help="semantic-similarity table")
    p.add_argument("--orig", type=Path, required=True)
    p.add_argument("--interp", type=Path, required=True)
    p.add_argument("--nn", type=Path)
    p.add_argument("--blur", action="store_true")
    p.add_argument("--model", default="stub:0")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_eval)
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
