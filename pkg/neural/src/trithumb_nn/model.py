"""Stacked-hourglass image decoder.

The network maps an 8-plane feature stack to RGB at the same
resolution.  A two-conv stem (7x7/s2 then 3x3/s2) drops to 1/4
resolution at `base_filters` channels; each hourglass then descends
`levels` times via space-to-depth(2x2) + 3x3 conv and climbs back via
depth-to-space(2x2) + 3x3 conv with additive skips, its output added to
its input.  Every hourglass feeds a loss head: depth-to-space(4x4),
1x1 conv to 3 channels, tanh, rescaled to [0, 255].  All convolutions
are followed by BatchNorm + ReLU except the tanh head.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import torch
from torch import nn
from torch.nn import functional as F


class ModelConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HourglassConfig:
    input_size: int = 256
    input_channels: int = 8
    base_filters: int = 256
    stacks: int = 2
    levels: int = 4
    batch_size: int = 32
    learning_rate: float = 0.1
    steps: int = 20_000
    seed: int = 0
    # 0-indexed stack planes zeroed before the net sees them (ablations);
    # planes 2..4 are the interpolated render.
    zero_planes: tuple[int, ...] = ()

    def validate(self) -> None:
        if self.input_size % 64 != 0 or self.input_size <= 0:
            raise ModelConfigError(
                f"input_size {self.input_size} must be a positive multiple of 64")
        if self.stacks < 1:
            raise ModelConfigError("stacks must be >= 1")
        if self.levels < 1:
            raise ModelConfigError("levels must be >= 1")
        if self.base_filters % 16 != 0:
            raise ModelConfigError(
                f"base_filters {self.base_filters} must be divisible by 16")
        if (self.input_size // 4) % (2 ** self.levels) != 0:
            raise ModelConfigError(
                f"{self.levels} levels do not evenly divide the "
                f"{self.input_size // 4}-pixel stem resolution")
        if self.input_channels < 1:
            raise ModelConfigError("input_channels must be >= 1")
        if any(not 0 <= p < 8 for p in self.zero_planes):
            raise ModelConfigError(f"zero_planes {self.zero_planes} out of range")


def desk_config(**overrides) -> HourglassConfig:
    """Small preset for CPU-scale experiments: 64-pixel inputs, 64 filters."""
    base = dict(input_size=64, base_filters=64, batch_size=8,
                learning_rate=1e-3, steps=2000)
    base.update(overrides)
    return HourglassConfig(**base)


def _conv_bn_relu(cin: int, cout: int, k: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, k, stride=stride, padding=k // 2),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class Hourglass(nn.Module):
    """Symmetric descend/climb across `levels` octaves at constant width."""

    def __init__(self, filters: int, levels: int):
        super().__init__()
        self.levels = levels
        self.downs = nn.ModuleList(
            _conv_bn_relu(4 * filters, filters, 3) for _ in range(levels))
        self.ups = nn.ModuleList(
            _conv_bn_relu(filters // 4, filters, 3) for _ in range(levels))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        h = x
        for down in self.downs:
            skips.append(h)
            h = down(F.pixel_unshuffle(h, 2))
        for up in reversed(self.ups):
            h = up(F.pixel_shuffle(h, 2)) + skips.pop()
        return h


class LossHead(nn.Module):
    """Depth-to-space(4x4) + 1x1 conv + tanh, mapped to pixel range."""

    def __init__(self, filters: int):
        super().__init__()
        self.proj = nn.Conv2d(filters // 16, 3, 1)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        y = torch.tanh(self.proj(F.pixel_shuffle(h, 4)))
        return (y + 1.0) * 127.5


class StackedHourglass(nn.Module):
    def __init__(self, cfg: HourglassConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        f = cfg.base_filters
        self.stem = nn.Sequential(
            nn.Conv2d(cfg.input_channels, f, 7, stride=2, padding=3),
            nn.BatchNorm2d(f),
            nn.ReLU(inplace=True),
            nn.Conv2d(f, f, 3, stride=2, padding=1),
            nn.BatchNorm2d(f),
            nn.ReLU(inplace=True),
        )
        self.hourglasses = nn.ModuleList(
            Hourglass(f, cfg.levels) for _ in range(cfg.stacks))
        self.heads = nn.ModuleList(LossHead(f) for _ in range(cfg.stacks))

    def forward(self, x: torch.Tensor) -> list[torch.Tensor]:
        """All loss-head outputs, shallow to deep; each (b, 3, n, n) in [0, 255]."""
        n = self.cfg.input_size
        if x.shape[1:] != (self.cfg.input_channels, n, n):
            raise ModelConfigError(
                f"input {tuple(x.shape)} does not match configured "
                f"({self.cfg.input_channels}, {n}, {n})")
        out = []
        h = self.stem(x)
        for hourglass, head in zip(self.hourglasses, self.heads):
            h = h + hourglass(h)
            out.append(head(h))
        return out


def build_network(cfg: HourglassConfig) -> StackedHourglass:
    """Construct with deterministic parameter init for cfg.seed."""
    cfg.validate()
    torch.manual_seed(cfg.seed)
    return StackedHourglass(cfg)


def apply_zero_planes(stack: torch.Tensor, planes: Sequence[int]) -> torch.Tensor:
    if not planes:
        return stack
    out = stack.clone()
    out[..., list(planes), :, :] = 0.0
    return out


def config_dict(cfg: HourglassConfig) -> dict:
    d = asdict(cfg)
    d["zero_planes"] = list(cfg.zero_planes)
    return d


def config_from_dict(d: dict) -> HourglassConfig:
    d = dict(d)
    d["zero_planes"] = tuple(d.get("zero_planes", ()))
    return HourglassConfig(**d)
