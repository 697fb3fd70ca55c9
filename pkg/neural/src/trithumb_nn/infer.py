"""Deterministic inference: final loss head, rounded to 8-bit RGB."""

from __future__ import annotations

import numpy as np
import torch

from .model import ModelConfigError, StackedHourglass, apply_zero_planes


def infer(model: StackedHourglass, stack: np.ndarray) -> np.ndarray:
    """Decode one (8, n, n) float32 stack to an (n, n, 3) uint8 image.

    Uses eval-mode statistics, so repeated calls are byte-identical.
    """
    cfg = model.cfg
    stack = np.asarray(stack, dtype=np.float32)
    if stack.shape != (cfg.input_channels, cfg.input_size, cfg.input_size):
        raise ModelConfigError(
            f"stack shape {stack.shape} does not match configured "
            f"({cfg.input_channels}, {cfg.input_size}, {cfg.input_size})")
    model.eval()
    with torch.no_grad():
        x = apply_zero_planes(torch.from_numpy(stack)[None], cfg.zero_planes)
        y = model(x)[-1][0]  # final hourglass's head
    out = torch.clamp(torch.floor(y + 0.5), 0, 255).to(torch.uint8)
    return out.permute(1, 2, 0).numpy().copy()
