"""Semantic-preservation metrics.

Images are scored by a 1000-class classifier's pre-softmax vector; a
reconstruction preserves semantics when its vector stays close to the
original's (L2) and keeps the original's top class in its top-k.

Model handles:
  "torchvision:<name>"  any 1000-class torchvision classifier with
                        pretrained weights (e.g. resnet50).  Raises
                        with fetch instructions when weights are not
                        installed locally.
  "stub:<seed>"         a deterministic random-projection embedder for
                        offline testing: 32x32 grayscale, flattened,
                        through a fixed seeded 1024x1000 matrix.  Not a
                        real classifier; never compare its numbers with
                        a real model's.
Every report records the handle so numbers are never cross-model
compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

CLASSES = 1000


class SemanticModelError(RuntimeError):
    pass


@dataclass
class ClassVector:
    scores: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.shape != (CLASSES,):
            raise SemanticModelError(
                f"class vector must have {CLASSES} entries, "
                f"got {self.scores.shape}")
        if not np.isfinite(self.scores).all():
            raise SemanticModelError("class vector has non-finite entries")


def _stub_vector(image: np.ndarray, seed: int) -> np.ndarray:
    gray = np.asarray(
        Image.fromarray(image, "RGB").convert("L").resize((32, 32),
                                                          Image.BILINEAR),
        dtype=np.float64) / 255.0
    proj = np.random.default_rng(seed).standard_normal((32 * 32, CLASSES))
    return gray.reshape(-1) @ proj


def _torchvision_vector(image: np.ndarray, name: str) -> np.ndarray:
    try:
        import torch
        import torchvision.models as models
        import torchvision.transforms.functional as tvf
    except ImportError as e:
        raise SemanticModelError(
            "torchvision is not installed; pip install torchvision") from e
    try:
        model = getattr(models, name)(weights="IMAGENET1K_V1")
    except AttributeError as e:
        raise SemanticModelError(f"unknown torchvision model {name!r}") from e
    except Exception as e:
        raise SemanticModelError(
            f"pretrained weights for {name!r} are not available locally: {e}. "
            f"On a networked machine run "
            f"`python -c \"import torchvision.models as m; "
            f"m.{name}(weights='IMAGENET1K_V1')\"` and copy the TORCH_HOME "
            f"cache (~/.cache/torch) here.") from e
    model.eval()
    x = tvf.to_tensor(Image.fromarray(image, "RGB"))
    x = tvf.resize(x, 256, antialias=True)
    x = tvf.center_crop(x, 224)
    x = tvf.normalize(x, [0.485, 0.456, 0.406], [0.229, 0.224, 0.225])
    with torch.no_grad():
        scores = model(x[None])[0]
    if scores.shape != (CLASSES,):
        raise SemanticModelError(
            f"{name} produced {tuple(scores.shape)} scores, not ({CLASSES},)")
    return scores.double().numpy()


def class_vector(image: np.ndarray, handle: str,
                 image_id: str = "") -> ClassVector:
    """Deterministic 1000-score vector for the image under the handle."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 3 or image.shape[2] != 3:
        raise SemanticModelError(f"expected (h, w, 3) image, got {image.shape}")
    kind, _, arg = handle.partition(":")
    if kind == "stub" and arg:
        scores = _stub_vector(image, int(arg))
    elif kind == "torchvision" and arg:
        scores = _torchvision_vector(image, arg)
    else:
        raise SemanticModelError(
            f"unknown model handle {handle!r}; use 'torchvision:<name>' "
            f"or 'stub:<seed>'")
    return ClassVector(scores, {"model": handle, "image": image_id})


def _scores(c) -> np.ndarray:
    arr = c.scores if isinstance(c, ClassVector) else np.asarray(c, np.float64)
    if arr.shape != (CLASSES,):
        raise SemanticModelError(
            f"class vector must have {CLASSES} entries, got {arr.shape}")
    return arr


def top_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k highest scores; ties broken toward lower index."""
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    return order[:k]


def semantic_compare(c_orig, c_test):
    """(l2, hit@1, hit@5, hit@10) of a reconstruction against its original."""
    a = _scores(c_orig)
    b = _scores(c_test)
    l2 = float(np.linalg.norm(a - b))
    top = int(np.argmax(a))
    ranked = top_indices(b, 10)
    hits = tuple(top in ranked[:k] for k in (1, 5, 10))
    return (l2,) + hits


def evaluate_dirs(orig_dir, variant_dirs: dict[str, Path], handle: str) -> dict:
    """Mean L2 and recall fractions for each variant directory.

    Images are matched to originals by filename stem; every original
    must have a counterpart (.ppm or .png) in every variant directory.
    """
    from .images import read_image

    orig_dir = Path(orig_dir)
    origs = sorted(p for p in orig_dir.iterdir()
                   if p.suffix.lower() in (".ppm", ".png"))
    if not origs:
        raise SemanticModelError(f"no images in {orig_dir}")

    def find(d: Path, stem: str) -> Path:
        for ext in (".ppm", ".png"):
            cand = d / f"{stem}{ext}"
            if cand.exists():
                return cand
        raise SemanticModelError(f"{d} is missing an image for {stem!r}")

    rows: dict[str, dict] = {}
    originals = {p.stem: class_vector(read_image(p), handle, p.name)
                 for p in origs}
    for variant, d in variant_dirs.items():
        l2s, h1, h5, h10 = [], 0, 0, 0
        for stem, c_orig in originals.items():
            path = find(Path(d), stem)
            c_test = class_vector(read_image(path), handle, path.name)
            l2, a, b, c = semantic_compare(c_orig, c_test)
            l2s.append(l2)
            h1 += a
            h5 += b
            h10 += c
        n = len(originals)
        rows[variant] = {"l2": sum(l2s) / n, "r1": h1 / n,
                         "r5": h5 / n, "r10": h10 / n}
    return {"model": handle, "corpus_size": len(originals), "rows": rows}
