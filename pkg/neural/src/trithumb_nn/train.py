"""Training loop: summed MSE over every loss head (intermediate
supervision), Adam, fixed-seed batch sampling, divergence logged."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import torch

from .model import (
    HourglassConfig,
    StackedHourglass,
    apply_zero_planes,
    build_network,
    config_dict,
    config_from_dict,
)

WEIGHTS_FORMAT = "trithumb-nn/1"


class TrainingError(ValueError):
    pass


def _to_tensors(pairs, cfg: HourglassConfig):
    n = cfg.input_size
    stacks, targets = [], []
    for i, (stack, target) in enumerate(pairs):
        stack = np.asarray(stack, dtype=np.float32)
        target = np.asarray(target)
        if stack.shape != (cfg.input_channels, n, n):
            raise TrainingError(
                f"pair {i}: stack shape {stack.shape} != "
                f"({cfg.input_channels}, {n}, {n})")
        if target.shape != (n, n, 3) or target.dtype != np.uint8:
            raise TrainingError(
                f"pair {i}: target must be ({n}, {n}, 3) uint8, "
                f"got {target.shape} {target.dtype}")
        stacks.append(torch.from_numpy(stack))
        targets.append(torch.from_numpy(
            target.astype(np.float32).transpose(2, 0, 1)))
    x = apply_zero_planes(torch.stack(stacks), cfg.zero_planes)
    y = torch.stack(targets)
    return x, y


def train(pairs, cfg: HourglassConfig, *, learning_rate: float | None = None,
          checkpoint_path=None, checkpoint_every: int = 0):
    """Fit the network to (stack, image) pairs.

    Returns (model, log): log is a list of per-step records
    {"step", "loss", "head_losses"}; a non-finite loss appends a
    {"step", "event": "diverged"} record and stops early.  Fully
    reproducible given (pairs, cfg, learning_rate).
    """
    cfg.validate()
    if not pairs:
        raise TrainingError("empty dataset")
    x, y = _to_tensors(pairs, cfg)
    model = build_network(cfg)
    model.train()
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    sampler = torch.Generator().manual_seed(cfg.seed)
    log: list[dict] = []
    diverged = False
    for step in range(cfg.steps):
        idx = torch.randint(len(pairs), (min(cfg.batch_size, len(pairs)),),
                            generator=sampler)
        outs = model(x[idx])
        head_losses = [torch.mean((o - y[idx]) ** 2) for o in outs]
        loss = sum(head_losses)
        loss_val = loss.item()
        if not math.isfinite(loss_val):
            log.append({"step": step, "event": "diverged"})
            diverged = True
            break
        log.append({"step": step, "loss": loss_val,
                    "head_losses": [h.item() for h in head_losses]})
        opt.zero_grad()
        loss.backward()
        opt.step()
        if checkpoint_path and checkpoint_every \
                and (step + 1) % checkpoint_every == 0:
            save_weights(checkpoint_path, model, cfg, log, diverged)
    if checkpoint_path:
        save_weights(checkpoint_path, model, cfg, log, diverged)
    return model, log


def save_weights(path, model: StackedHourglass, cfg: HourglassConfig,
                 log=None, diverged: bool = False) -> None:
    torch.save({
        "format": WEIGHTS_FORMAT,
        "config": config_dict(cfg),
        "state_dict": model.state_dict(),
        "log": log or [],
        "diverged": diverged,
    }, path)


def load_weights(path):
    """Return (model in eval mode, config, metadata dict)."""
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("format") != WEIGHTS_FORMAT:
        raise TrainingError(f"{path}: not a {WEIGHTS_FORMAT} weights file")
    cfg = config_from_dict(blob["config"])
    model = build_network(cfg)
    model.load_state_dict(blob["state_dict"])
    model.eval()
    meta = {"log": blob.get("log", []), "diverged": blob.get("diverged", False)}
    return model, cfg, meta


def write_log(path, log) -> None:
    Path(path).write_text(json.dumps(log, indent=2) + "\n")
